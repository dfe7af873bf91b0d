#pragma once

// Test-only generators, network builders and independent reference computations.
// Nothing here calls into the estimators under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "clgbn/clg_model.hpp"
#include "clgbn/dataset.hpp"
#include "clgbn/graph.hpp"

namespace testing {

using clgbn::Arc;
using clgbn::Dataset;
using clgbn::Variable;
using clgbn::VarType;

inline Variable continuous(std::string name) { return {std::move(name), VarType::kContinuous, {}}; }
inline Variable discrete(std::string name, std::vector<std::string> levels) {
  return {std::move(name), VarType::kDiscrete, std::move(levels)};
}

inline Dataset table(std::vector<Variable> vars, std::vector<std::vector<double>> cols) {
  return Dataset(std::move(vars), std::move(cols));
}

/// Independent standard normal columns.
inline Dataset noise(std::size_t n, const std::vector<std::string>& names, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<Variable> vars;
  std::vector<std::vector<double>> cols;
  for (const auto& name : names) {
    vars.push_back(continuous(name));
    std::vector<double> c(n);
    for (auto& v : c) v = z(rng);
    cols.push_back(std::move(c));
  }
  return table(std::move(vars), std::move(cols));
}

// ---------------------------------------------------------------- network builders

inline clgbn::LocalGaussian gaussian(std::string node, std::vector<std::string> dpar, std::vector<std::string> cpar,
                                     std::vector<clgbn::GaussianBlock> blocks) {
  clgbn::LocalGaussian g;
  g.node = std::move(node);
  g.discrete_parents = std::move(dpar);
  g.continuous_parents = cpar;
  g.regressors = std::move(cpar);
  g.blocks = std::move(blocks);
  for (auto& b : g.blocks) b.degenerate = b.sd == 0.0;
  return g;
}

inline clgbn::GaussianBlock block(double intercept, std::vector<double> coef, double sd) {
  clgbn::GaussianBlock b;
  b.intercept = intercept;
  b.coefficients = std::move(coef);
  b.sd = sd;
  return b;
}

inline clgbn::LocalDiscrete cpt(std::string node, std::vector<std::string> levels, std::vector<std::string> dpar,
                                std::vector<std::vector<double>> rows) {
  clgbn::LocalDiscrete d;
  d.node = std::move(node);
  d.levels = std::move(levels);
  d.discrete_parents = std::move(dpar);
  for (auto& r : rows) {
    clgbn::DiscreteBlock b;
    b.probabilities = std::move(r);
    d.blocks.push_back(std::move(b));
  }
  return d;
}

inline clgbn::ClgNetwork network(std::vector<Variable> vars, std::vector<clgbn::LocalDistribution> locals) {
  std::set<Arc> arcs;
  std::vector<std::string> names;
  for (const auto& v : vars) names.push_back(v.name);
  for (const auto& l : locals) {
    std::visit(
        [&](const auto& x) {
          for (const auto& p : x.discrete_parents) arcs.insert({p, x.node});
          for (const auto& p : x.continuous_parents) arcs.insert({p, x.node});
        },
        l);
  }
  return clgbn::ClgNetwork(clgbn::Dag(names, arcs), std::move(vars), std::move(locals));
}

inline const std::vector<std::string>& growth_levels() {
  static const std::vector<std::string> l{"Bad", "Good"};
  return l;
}
inline const std::vector<std::string>& treatment_levels() {
  static const std::vector<std::string> l{"untreated", "treated"};
  return l;
}

/// Nine-node synthetic truth shaped like the clinical networks: Treatment is a discrete root, dT a
/// continuous root driving Growth through a logistic link, six difference features below.
inline clgbn::ClgNetwork growth_network() {
  std::vector<Variable> vars{continuous("dANB"),  continuous("dIMPA"), continuous("dPPPM"),
                             continuous("dCoA"),  continuous("dGoPg"), continuous("dCoGo"),
                             continuous("dT"),    discrete("Treatment", treatment_levels()),
                             discrete("Growth", growth_levels())};
  clgbn::LocalDiscrete growth;
  growth.node = "Growth";
  growth.levels = growth_levels();
  growth.continuous_parents = {"dT"};
  clgbn::DiscreteBlock gb;
  gb.logits = {{0.0, 0.0}, {-5.0, 1.0}};
  growth.blocks.push_back(gb);

  std::vector<clgbn::LocalDistribution> locals{
      // configurations: Growth slowest, then Treatment
      gaussian("dANB", {"Growth", "Treatment"}, {},
               {block(0.0, {}, 1.0), block(1.5, {}, 1.0), block(-1.5, {}, 1.0), block(0.0, {}, 1.0)}),
      gaussian("dIMPA", {}, {"dANB", "dPPPM"}, {block(0.0, {1.0, -1.0}, 1.0)}),
      gaussian("dPPPM", {}, {"dCoGo"}, {block(0.0, {1.0}, 1.0)}),
      gaussian("dCoA", {"Treatment"}, {"dANB", "dT"}, {block(-5.0, {1.0, 1.0}, 1.0), block(-3.5, {1.0, 1.0}, 1.0)}),
      gaussian("dGoPg", {}, {"dCoA"}, {block(0.0, {1.0}, 1.0)}),
      gaussian("dCoGo", {"Growth"}, {"dCoA", "dT"}, {block(5.0, {1.0, -1.0}, 1.0), block(6.5, {1.0, -1.0}, 1.0)}),
      gaussian("dT", {}, {}, {block(5.0, {}, 1.0)}),
      cpt("Treatment", treatment_levels(), {}, {{0.5, 0.5}}),
      growth,
  };
  return network(std::move(vars), std::move(locals));
}

// ---------------------------------------------------------------- linear algebra oracle

/// Gaussian elimination with partial pivoting; a is n x n, b has n entries.
inline std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    }
    std::swap(a[col], a[piv]);
    std::swap(b[col], b[piv]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= a[i][c] * x[c];
    x[i] = s / a[i][i];
  }
  return x;
}

struct Regression {
  std::vector<double> beta;  // intercept first
  double rss = 0.0;
  std::size_t n = 0;
};

/// OLS through the normal equations of centered data.
inline Regression regress(const std::vector<std::vector<double>>& x, const std::vector<double>& y) {
  const std::size_t n = y.size();
  const std::size_t p = x.empty() ? 0 : x.front().size();
  std::vector<double> mx(p, 0.0);
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    my += y[i] / static_cast<double>(n);
    for (std::size_t j = 0; j < p; ++j) mx[j] += x[i][j] / static_cast<double>(n);
  }
  std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
  std::vector<double> xty(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < p; ++a) {
      xty[a] += (x[i][a] - mx[a]) * (y[i] - my);
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += (x[i][a] - mx[a]) * (x[i][b] - mx[b]);
    }
  }
  Regression r;
  r.n = n;
  const auto slopes = p ? solve(xtx, xty) : std::vector<double>{};
  double intercept = my;
  for (std::size_t j = 0; j < p; ++j) intercept -= slopes[j] * mx[j];
  r.beta.push_back(intercept);
  r.beta.insert(r.beta.end(), slopes.begin(), slopes.end());
  for (std::size_t i = 0; i < n; ++i) {
    double fit = intercept;
    for (std::size_t j = 0; j < p; ++j) fit += slopes[j] * x[i][j];
    r.rss += (y[i] - fit) * (y[i] - fit);
  }
  return r;
}

/// Standard errors of [intercept, slopes] for design rows `x` and noise sd `sigma`:
/// sqrt of the diagonal of sigma^2 (X'X)^-1 with an intercept column.
inline std::vector<double> standard_errors(const std::vector<std::vector<double>>& x, double sigma) {
  const std::size_t p = (x.empty() ? 0 : x.front().size()) + 1;
  std::vector<std::vector<double>> xtx(p, std::vector<double>(p, 0.0));
  for (const auto& row : x) {
    std::vector<double> z{1.0};
    z.insert(z.end(), row.begin(), row.end());
    for (std::size_t a = 0; a < p; ++a) {
      for (std::size_t b = 0; b < p; ++b) xtx[a][b] += z[a] * z[b];
    }
  }
  std::vector<double> se(p);
  for (std::size_t j = 0; j < p; ++j) {
    std::vector<double> e(p, 0.0);
    e[j] = 1.0;
    se[j] = sigma * std::sqrt(solve(xtx, e)[j]);
  }
  return se;
}

/// BIC term of one node from raw rows: per discrete-parent configuration, a regression on the
/// continuous parents (continuous node) or relative frequencies (discrete node). Log-likelihood is
/// summed row by row.
inline double local_bic(const Dataset& d, const std::string& node, const std::vector<std::string>& parents) {
  const auto y = d.index_of(node);
  std::vector<std::size_t> dp, cp;
  for (const auto& p : parents) (d.variable(d.index_of(p)).discrete() ? dp : cp).push_back(d.index_of(p));
  std::map<std::vector<int>, std::vector<std::size_t>> groups;
  for (std::size_t r = 0; r < d.rows(); ++r) {
    std::vector<int> key;
    for (const auto c : dp) key.push_back(static_cast<int>(d.at(r, c)));
    groups[key].push_back(r);
  }
  double ll = 0.0;
  double k = 0.0;
  for (const auto& [key, rows] : groups) {
    if (d.variable(y).discrete()) {
      const auto states = d.variable(y).levels.size();
      std::vector<double> count(states, 0.0);
      for (const auto r : rows) count[static_cast<std::size_t>(d.at(r, y))] += 1.0;
      for (const auto r : rows) ll += std::log(count[static_cast<std::size_t>(d.at(r, y))] / static_cast<double>(rows.size()));
      k += static_cast<double>(states - 1);
      continue;
    }
    std::vector<std::vector<double>> x;
    std::vector<double> yy;
    for (const auto r : rows) {
      std::vector<double> xr;
      for (const auto c : cp) xr.push_back(d.at(r, c));
      x.push_back(xr);
      yy.push_back(d.at(r, y));
    }
    const auto fit = regress(x, yy);
    const double var = fit.rss / static_cast<double>(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double mean = fit.beta[0];
      for (std::size_t j = 0; j < cp.size(); ++j) mean += fit.beta[j + 1] * x[i][j];
      ll += -0.5 * std::log(2.0 * std::numbers::pi * var) - 0.5 * (yy[i] - mean) * (yy[i] - mean) / var;
    }
    k += static_cast<double>(cp.size() + 2);
  }
  return ll - 0.5 * k * std::log(static_cast<double>(d.rows()));
}

inline double dag_bic(const Dataset& d, const clgbn::Dag& g) {
  double s = 0.0;
  for (const auto& n : g.nodes()) s += local_bic(d, n, g.parents(n));
  return s;
}

// ---------------------------------------------------------------- enumeration

/// Every DAG on `nodes` (three pair states per unordered pair, cyclic ones dropped).
inline std::vector<clgbn::Dag> all_dags(const std::vector<std::string>& nodes) {
  std::vector<std::pair<std::string, std::string>> pairs;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) pairs.emplace_back(nodes[i], nodes[j]);
  }
  std::size_t total = 1;
  for (std::size_t i = 0; i < pairs.size(); ++i) total *= 3;
  std::vector<clgbn::Dag> out;
  for (std::size_t code = 0; code < total; ++code) {
    std::set<Arc> arcs;
    std::size_t c = code;
    for (const auto& [a, b] : pairs) {
      if (c % 3 == 1) arcs.insert({a, b});
      if (c % 3 == 2) arcs.insert({b, a});
      c /= 3;
    }
    // Depth-first cycle check written out independently of the graph module.
    std::map<std::string, std::vector<std::string>> out_edges;
    for (const auto& arc : arcs) out_edges[arc.from].push_back(arc.to);
    std::map<std::string, int> state;
    bool cyclic = false;
    std::function<void(const std::string&)> dfs = [&](const std::string& u) {
      state[u] = 1;
      for (const auto& v : out_edges[u]) {
        if (state[v] == 1) cyclic = true;
        else if (state[v] == 0) dfs(v);
      }
      state[u] = 2;
    };
    for (const auto& n : nodes) {
      if (state[n] == 0) dfs(n);
    }
    if (!cyclic) out.emplace_back(nodes, arcs);
  }
  return out;
}

// ---------------------------------------------------------------- threshold objective

/// Exact L1 objective scaled by m * denominator, for strengths numerators[i] / denominator:
/// the integral of |F(x) - (1 - p(t))| over [0, 1] with F the empirical CDF.
inline std::int64_t l1_scaled(std::vector<std::int64_t> numerators, std::int64_t denominator, std::int64_t t) {
  std::sort(numerators.begin(), numerators.end());
  const auto m = static_cast<std::int64_t>(numerators.size());
  std::int64_t kept = 0;
  for (const auto s : numerators) kept += s >= t;
  const std::int64_t level = m - kept;  // (1 - p) * m
  std::int64_t total = 0;
  for (std::int64_t x = 0; x < denominator; ++x) {  // unit cell [x, x+1) / denominator
    std::int64_t f = 0;
    for (const auto s : numerators) f += s <= x;
    total += std::abs(f - level);
  }
  return total;
}

// ---------------------------------------------------------------- exact inference

/// Joint distribution of a discrete network by enumeration. cards[i] = #states of node i,
/// parents[i] indexes earlier nodes, tables[i][config][state] with config mixed radix (first parent slowest).
struct DiscreteJoint {
  std::vector<std::size_t> cards;
  std::vector<std::vector<std::size_t>> parents;
  std::vector<std::vector<std::vector<double>>> tables;

  double probability(const std::vector<std::size_t>& x) const {
    double p = 1.0;
    for (std::size_t i = 0; i < cards.size(); ++i) {
      std::size_t config = 0;
      for (const auto q : parents[i]) config = config * cards[q] + x[q];
      p *= tables[i][config][x[i]];
    }
    return p;
  }

  /// P(event | evidence); each is a list of (node, state) pairs.
  double conditional(const std::vector<std::pair<std::size_t, std::size_t>>& event,
                     const std::vector<std::pair<std::size_t, std::size_t>>& evidence) const {
    std::vector<std::size_t> x(cards.size(), 0);
    double num = 0.0, den = 0.0;
    while (true) {
      auto holds = [&](const auto& conds) {
        return std::all_of(conds.begin(), conds.end(), [&](const auto& c) { return x[c.first] == c.second; });
      };
      if (holds(evidence)) {
        const double p = probability(x);
        den += p;
        if (holds(event)) num += p;
      }
      std::size_t i = 0;
      while (i < x.size() && ++x[i] == cards[i]) x[i++] = 0;
      if (i == x.size()) break;
    }
    return num / den;
  }
};

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

inline double interval_mass(double mean, double sd, double lo, double hi) {
  return normal_cdf((hi - mean) / sd) - normal_cdf((lo - mean) / sd);
}

}  // namespace testing
