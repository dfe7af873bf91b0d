#include "clgbn/scorer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <Eigen/Dense>

#include "clgbn/error.hpp"
#include "fit_internal.hpp"

namespace clgbn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Aggregated statistics of one discrete-parent configuration over a chosen feature list.
struct Moments {
  std::size_t n = 0;
  Eigen::MatrixXd gram;  // over [1, features...]
  std::vector<std::size_t> rows;
  bool constant_response = true;
};

}  // namespace

BicScorer::BicScorer(const Dataset& data, FitOptions options) : data_(data), options_(options) {
  if (data.cols() > 64) throw DataError("at most 64 variables are supported by the scorer");
  if (data.rows() == 0) throw DataError("cannot score an empty dataset");
  slot_.assign(data.cols(), -1);
  for (std::size_t c = 0; c < data.cols(); ++c) {
    auto& list = data.variable(c).discrete() ? discrete_ : continuous_;
    slot_[c] = static_cast<int>(list.size());
    list.push_back(c);
  }
  const auto p = continuous_.size();
  std::vector<double> mean(p, 0.0);
  for (std::size_t j = 0; j < p; ++j) {
    const auto col = data.column(continuous_[j]);
    double s = 0.0;
    for (const double v : col) s += v;
    mean[j] = s / static_cast<double>(data.rows());
  }

  std::map<std::vector<int>, std::size_t> index;
  Eigen::VectorXd g(static_cast<Eigen::Index>(p + 1));
  for (std::size_t r = 0; r < data.rows(); ++r) {
    std::vector<int> codes(discrete_.size());
    for (std::size_t j = 0; j < discrete_.size(); ++j) codes[j] = static_cast<int>(data.at(r, discrete_[j]));
    auto [it, inserted] = index.try_emplace(codes, cells_.size());
    if (inserted) {
      cells_.push_back({codes, 0, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p + 1), static_cast<Eigen::Index>(p + 1)), {}});
    }
    auto& cell = cells_[it->second];
    g(0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) g(static_cast<Eigen::Index>(j + 1)) = data.at(r, continuous_[j]) - mean[j];
    cell.gram.selfadjointView<Eigen::Lower>().rankUpdate(g);
    ++cell.n;
    cell.rows.push_back(r);
  }
  for (auto& cell : cells_) cell.gram = cell.gram.selfadjointView<Eigen::Lower>();
  log_n_ = std::log(static_cast<double>(data.rows()));
  cache_.resize(data.cols());
}

std::size_t BicScorer::cache_size() const {
  std::size_t total = 0;
  for (const auto& m : cache_) total += m.size();
  return total;
}

double BicScorer::local_score(std::size_t node, ParentMask parents) {
  auto& memo = cache_.at(node);
  if (const auto it = memo.find(parents); it != memo.end()) {
    if (const auto* v = std::get_if<double>(&it->second)) return *v;
    throw NumericalError(std::get<std::string>(it->second));
  }
  ++computed_;
  try {
    const double s = compute(node, parents);
    memo.emplace(parents, s);
    return s;
  } catch (const NumericalError& e) {
    memo.emplace(parents, std::string(e.what()));
    throw;
  }
}

double BicScorer::local_score(std::string_view node, const std::vector<std::string>& parents) {
  ParentMask mask = 0;
  for (const auto& p : parents) mask |= ParentMask{1} << data_.index_of(p);
  return local_score(data_.index_of(node), mask);
}

double BicScorer::compute(std::size_t node, ParentMask parents) const {
  if (parents & (ParentMask{1} << node)) throw GraphError("a node cannot be its own parent");
  std::vector<std::size_t> dpar, cpar;
  for (std::size_t c = 0; c < data_.cols(); ++c) {
    if (!(parents & (ParentMask{1} << c))) continue;
    (data_.variable(c).discrete() ? dpar : cpar).push_back(c);
  }
  if (data_.variable(node).discrete()) return discrete_score(node, dpar, cpar);
  if (options_.coding == DiscreteParentCoding::kIndicator && !dpar.empty()) {
    return gaussian_indicator_score(node, dpar, cpar);
  }
  return gaussian_score(node, dpar, cpar);
}

namespace {

std::size_t config_key(const std::vector<int>& codes, const std::vector<std::size_t>& dslots,
                       const std::vector<std::size_t>& radix) {
  std::size_t idx = 0;
  for (std::size_t j = 0; j < dslots.size(); ++j) idx = idx * radix[j] + static_cast<std::size_t>(codes[dslots[j]]);
  return idx;
}

// Log-likelihood of the regression of the last feature on the others from aggregated moments.
// Returns nullopt when the moment route is not trustworthy and the rows must be used.
std::optional<double> moment_loglik(const Moments& m, const std::string& node) {
  const auto dim = m.gram.rows();  // 1 + q + 1
  const auto q = dim - 2;
  const double n = static_cast<double>(m.n);
  const Eigen::VectorXd sums = m.gram.row(0).tail(dim - 1);
  Eigen::MatrixXd c = m.gram.bottomRightCorner(dim - 1, dim - 1) - sums * sums.transpose() / n;
  for (Eigen::Index j = 0; j < dim - 1; ++j) {
    if (c(j, j) <= 1e-8 * m.gram(j + 1, j + 1)) return std::nullopt;
  }
  const double syy = c(q, q);
  double rss = syy;
  if (q > 0) {
    const Eigen::MatrixXd cxx = c.topLeftCorner(q, q);
    detail::check_rank(cxx, node);
    const Eigen::VectorXd cxy = c.col(q).head(q);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(cxx);
    if (ldlt.info() != Eigen::Success) return std::nullopt;
    rss = syy - cxy.dot(ldlt.solve(cxy));
  }
  if (!(rss > 1e-8 * syy)) return std::nullopt;
  return detail::gaussian_ml_loglik(rss, syy, m.n);
}

}  // namespace

double BicScorer::gaussian_score(std::size_t node, const std::vector<std::size_t>& dpar,
                                 const std::vector<std::size_t>& cpar) const {
  const auto& name = data_.variable(node).name;
  std::vector<std::size_t> dslots, radix;
  for (const auto d : dpar) {
    dslots.push_back(static_cast<std::size_t>(slot_[d]));
    radix.push_back(data_.variable(d).levels.size());
  }
  // Feature indices into a cell gram: 0 is the constant, then the parents, then the response.
  std::vector<Eigen::Index> feat{0};
  for (const auto c : cpar) feat.push_back(slot_[c] + 1);
  feat.push_back(slot_[node] + 1);
  const auto dim = static_cast<Eigen::Index>(feat.size());

  std::map<std::size_t, Moments> configs;
  for (const auto& cell : cells_) {
    auto& m = configs[config_key(cell.codes, dslots, radix)];
    if (m.n == 0) m.gram = Eigen::MatrixXd::Zero(dim, dim);
    for (Eigen::Index a = 0; a < dim; ++a) {
      for (Eigen::Index b = 0; b < dim; ++b) m.gram(a, b) += cell.gram(feat[a], feat[b]);
    }
    m.n += cell.n;
    m.rows.insert(m.rows.end(), cell.rows.begin(), cell.rows.end());
  }

  std::vector<detail::Regressor> regs;
  for (const auto c : cpar) regs.push_back({c, -1});
  double ll = 0.0;
  std::size_t k = 0;
  for (auto& [key, m] : configs) {
    if (m.n < cpar.size() + 2) {
      throw NumericalError("insufficient data for node '" + name + "': " + std::to_string(m.n) +
                           " rows, need at least " + std::to_string(cpar.size() + 2));
    }
    auto part = moment_loglik(m, name);
    if (!part) {
      std::sort(m.rows.begin(), m.rows.end());
      const auto fit = detail::ols(data_, m.rows, node, regs, name);
      part = detail::gaussian_ml_loglik(fit.rss, fit.syy, fit.n);
    }
    ll += *part;
    k += cpar.size() + 2;
  }
  return ll - 0.5 * static_cast<double>(k) * log_n_;
}

double BicScorer::gaussian_indicator_score(std::size_t node, const std::vector<std::size_t>& dpar,
                                           const std::vector<std::size_t>& cpar) const {
  const auto& name = data_.variable(node).name;
  std::vector<detail::Regressor> regs;
  for (const auto d : dpar) {
    for (std::size_t l = 1; l < data_.variable(d).levels.size(); ++l) regs.push_back({d, static_cast<int>(l)});
  }
  const std::size_t indicators = regs.size();
  for (const auto c : cpar) regs.push_back({c, -1});
  const auto dim = static_cast<Eigen::Index>(regs.size() + 2);
  const auto p = static_cast<Eigen::Index>(continuous_.size() + 1);

  // Each cell's features are a linear map of its gram coordinates: indicators are constant in a cell.
  Moments m;
  m.gram = Eigen::MatrixXd::Zero(dim, dim);
  for (const auto& cell : cells_) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(dim, p);
    a(0, 0) = 1.0;
    for (std::size_t j = 0; j < indicators; ++j) {
      const auto code = cell.codes[static_cast<std::size_t>(slot_[regs[j].col])];
      a(static_cast<Eigen::Index>(j + 1), 0) = code == regs[j].level ? 1.0 : 0.0;
    }
    for (std::size_t j = 0; j < cpar.size(); ++j) a(static_cast<Eigen::Index>(indicators + j + 1), slot_[cpar[j]] + 1) = 1.0;
    a(dim - 1, slot_[node] + 1) = 1.0;
    m.gram += a * cell.gram * a.transpose();
    m.n += cell.n;
  }
  if (m.n < regs.size() + 2) {
    throw NumericalError("insufficient data for node '" + name + "': " + std::to_string(m.n) +
                         " rows, need at least " + std::to_string(regs.size() + 2));
  }
  auto ll = moment_loglik(m, name);
  if (!ll) {
    std::vector<std::size_t> rows(data_.rows());
    for (std::size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    const auto fit = detail::ols(data_, rows, node, regs, name);
    ll = detail::gaussian_ml_loglik(fit.rss, fit.syy, fit.n);
  }
  return *ll - 0.5 * static_cast<double>(regs.size() + 2) * log_n_;
}

double BicScorer::discrete_score(std::size_t node, const std::vector<std::size_t>& dpar,
                                 const std::vector<std::size_t>& cpar) const {
  const auto& var = data_.variable(node);
  const std::size_t states = var.levels.size();
  std::vector<std::size_t> dslots, radix;
  for (const auto d : dpar) {
    dslots.push_back(static_cast<std::size_t>(slot_[d]));
    radix.push_back(data_.variable(d).levels.size());
  }
  const auto own = static_cast<std::size_t>(slot_[node]);

  double ll = 0.0;
  std::size_t k = 0;
  if (cpar.empty()) {
    std::map<std::size_t, std::vector<double>> counts;
    for (const auto& cell : cells_) {
      auto& cnt = counts[config_key(cell.codes, dslots, radix)];
      if (cnt.empty()) cnt.assign(states, 0.0);
      cnt[static_cast<std::size_t>(cell.codes[own])] += static_cast<double>(cell.n);
    }
    for (const auto& [key, cnt] : counts) {
      double total = 0.0;
      for (const double c : cnt) total += c;
      for (const double c : cnt) {
        if (c > 0) ll += c * std::log(c / total);
      }
      k += states - 1;
    }
  } else {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (const auto& cell : cells_) {
      auto& rows = groups[config_key(cell.codes, dslots, radix)];
      rows.insert(rows.end(), cell.rows.begin(), cell.rows.end());
    }
    for (auto& [key, rows] : groups) {
      std::sort(rows.begin(), rows.end());
      ll += detail::logistic(data_, rows, node, states, cpar, var.name).loglik;
      k += (states - 1) * (cpar.size() + 1);
    }
  }
  return ll - 0.5 * static_cast<double>(k) * log_n_;
}

std::vector<double> local_scores(const Dag& dag, const Dataset& data, const FitOptions& options) {
  BicScorer scorer(data, options);
  std::vector<double> out;
  for (const auto& node : dag.nodes()) out.push_back(scorer.local_score(node, dag.parents(node)));
  return out;
}

double bic_score(const Dag& dag, const Dataset& data, const FitOptions& options) {
  double total = 0.0;
  for (const double s : local_scores(dag, data, options)) total += s;
  return total;
}

}  // namespace clgbn
