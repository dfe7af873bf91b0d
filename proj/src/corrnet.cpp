#include "clgbn/corrnet.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "clgbn/error.hpp"

namespace clgbn {

double pearson(std::span<const double> xa, std::span<const double> xb) {
  if (xa.size() != xb.size()) throw DataError("pearson: vectors differ in length");
  const std::size_t n = xa.size();
  if (n < 2) throw DataError("pearson: at least two observations required");
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += xa[i];
    mb += xb[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = xa[i] - ma;
    const double db = xb[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) throw NumericalError("pearson: correlation undefined for a zero-variance vector");
  const double r = sab / std::sqrt(saa * sbb);
  return std::clamp(r, -1.0, 1.0);
}

CorrelationNetwork correlation_network(const Dataset& data, double threshold) {
  if (data.rows() < 2) throw DataError("correlation network needs at least two rows");
  CorrelationNetwork net;
  net.threshold = threshold;
  std::vector<std::size_t> cols;
  for (std::size_t c = 0; c < data.cols(); ++c) {
    const auto& v = data.variable(c);
    if (!v.discrete() || v.levels.size() == 2) {
      cols.push_back(c);
      net.matrix.labels.push_back(v.name);
    }
  }
  const std::size_t m = cols.size();
  net.matrix.values.assign(m, std::vector<double>(m, 1.0));
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double r = 0.0;
      try {
        r = pearson(data.column(cols[i]), data.column(cols[j]));
      } catch (const NumericalError&) {
        const auto ci = data.column(cols[i]);
        const bool i_const = std::all_of(ci.begin(), ci.end(), [&](double x) { return x == ci[0]; });
        throw NumericalError("zero variance in column '" + net.matrix.labels[i_const ? i : j] + "'");
      }
      net.matrix.values[i][j] = r;
      net.matrix.values[j][i] = r;
    }
  }
  net.graph.nodes = net.matrix.labels;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      const double r = net.matrix.values[i][j];
      if (std::abs(r) > threshold) net.graph.edges.push_back({net.matrix.labels[i], net.matrix.labels[j], r});
    }
  }
  return net;
}

std::string matrix_to_text(const CorrelationMatrix& m, char delimiter) {
  std::ostringstream out;
  out << "variable";
  for (const auto& l : m.labels) out << delimiter << l;
  out << '\n';
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    out << m.labels[i];
    for (std::size_t j = 0; j < m.labels.size(); ++j) out << delimiter << format_double(m.values[i][j]);
    out << '\n';
  }
  return out.str();
}

std::string network_to_dot(const CorrelationNetwork& net) {
  std::ostringstream out;
  out << "graph {\n";
  for (const auto& n : net.graph.nodes) out << "  \"" << n << "\";\n";
  for (const auto& e : net.graph.edges) {
    char label[32];
    std::snprintf(label, sizeof(label), "%.2f", e.r);
    out << "  \"" << e.a << "\" -- \"" << e.b << "\" [label=\"" << label << "\", weight=" << format_double(std::abs(e.r))
        << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace clgbn
