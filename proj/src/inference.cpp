#include "clgbn/inference.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include <Eigen/Dense>

#include "clgbn/error.hpp"
#include "clgbn/random.hpp"

namespace clgbn {

Condition Condition::equals(std::string variable, std::string level) {
  Condition c;
  c.variable = std::move(variable);
  c.level = std::move(level);
  return c;
}

Condition Condition::between(std::string variable, double lo, double hi) {
  Condition c;
  c.variable = std::move(variable);
  c.lo = lo;
  c.hi = hi;
  return c;
}

Condition Condition::near(std::string variable, double value, double epsilon) {
  return between(std::move(variable), value - epsilon, value + epsilon);
}

namespace {

constexpr std::size_t kChunk = 4096;

struct Matcher {
  std::size_t var = 0;
  int state = -1;  // discrete when >= 0
  double lo = 0.0;
  double hi = 0.0;

  bool operator()(std::span<const double> row) const {
    const double v = row[var];
    return state >= 0 ? v == state : (v >= lo && v <= hi);
  }
};

std::vector<Matcher> resolve(const ClgNetwork& model, const Evidence& evidence) {
  std::vector<Matcher> out;
  for (const auto& c : evidence) {
    std::size_t i = 0;
    try {
      i = model.index_of(c.variable);
    } catch (const DataError&) {
      throw DataError("unknown variable '" + c.variable + "' in evidence");
    }
    const auto& var = model.variable(i);
    Matcher m{i};
    if (var.discrete()) {
      if (!c.level) throw DataError("discrete variable '" + c.variable + "' needs a level, not an interval");
      const auto it = std::find(var.levels.begin(), var.levels.end(), *c.level);
      if (it == var.levels.end()) throw DataError("unknown level '" + *c.level + "' of '" + c.variable + "'");
      m.state = static_cast<int>(it - var.levels.begin());
    } else {
      if (c.level) throw DataError("continuous variable '" + c.variable + "' needs an interval, not a level");
      if (!(c.lo <= c.hi)) throw DataError("empty interval for '" + c.variable + "'");
      m.lo = c.lo;
      m.hi = c.hi;
    }
    out.push_back(m);
  }
  return out;
}

bool matches(const std::vector<Matcher>& ms, std::span<const double> row) {
  return std::all_of(ms.begin(), ms.end(), [&](const Matcher& m) { return m(row); });
}

class Sampler {
 public:
  explicit Sampler(const ClgNetwork& model, Rng rng) : model_(model), rng_(std::move(rng)), row_(model.size()) {}

  std::span<const double> next() {
    for (const auto i : model_.order()) {
      if (model_.variable(i).discrete()) {
        const auto p = model_.probabilities(i, row_);
        const double u = uniform_(rng_);
        double cum = 0.0;
        std::size_t pick = p.size();
        for (std::size_t s = 0; s < p.size(); ++s) {
          cum += p[s];
          if (u < cum) {
            pick = s;
            break;
          }
        }
        if (pick == p.size()) {  // rounding left u above the total mass
          pick = 0;
          for (std::size_t s = p.size(); s-- > 0;) {
            if (p[s] > 0) {
              pick = s;
              break;
            }
          }
        }
        row_[i] = static_cast<double>(pick);
      } else {
        const auto m = model_.gaussian(i, row_);
        row_[i] = m.sd == 0.0 ? m.mean : m.mean + m.sd * normal_(rng_);
      }
    }
    return row_;
  }

 private:
  const ClgNetwork& model_;
  Rng rng_;
  std::vector<double> row_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::normal_distribution<double> normal_{0.0, 1.0};
};

// Runs `body(sampler, count)` for every chunk and returns the per-chunk results in chunk order.
template <typename Result, typename Body>
std::vector<Result> by_chunks(const ClgNetwork& model, std::size_t n, std::uint64_t seed, std::size_t threads,
                              Body body) {
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<Result> out(chunks);
  parallel_for(chunks, threads, [&](std::size_t c) {
    Sampler sampler(model, substream(seed, c));
    const std::size_t count = std::min(kChunk, n - c * kChunk);
    out[c] = body(sampler, count);
  });
  return out;
}

}  // namespace

void validate_evidence(const ClgNetwork& model, const Evidence& evidence) { resolve(model, evidence); }

Dataset simulate(const ClgNetwork& model, std::size_t n, std::uint64_t seed, std::size_t threads) {
  using Block = std::vector<std::vector<double>>;
  const auto blocks = by_chunks<Block>(model, n, seed, threads, [&](Sampler& s, std::size_t count) {
    Block rows;
    rows.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
      const auto row = s.next();
      rows.emplace_back(row.begin(), row.end());
    }
    return rows;
  });
  std::vector<std::vector<double>> columns(model.size());
  for (auto& c : columns) c.reserve(n);
  for (const auto& block : blocks) {
    for (const auto& row : block) {
      for (std::size_t i = 0; i < row.size(); ++i) columns[i].push_back(row[i]);
    }
  }
  return Dataset(model.variables(), std::move(columns));
}

QueryResult query(const ClgNetwork& model, const Evidence& event, const Evidence& evidence,
                  const SamplingOptions& options) {
  const auto ev = resolve(model, evidence);
  const auto q = resolve(model, event);
  if (q.empty()) throw DataError("a probability query needs an event");
  struct Counts {
    std::size_t evidence = 0, event = 0;
  };
  const auto parts = by_chunks<Counts>(model, options.samples, options.seed, options.threads,
                                       [&](Sampler& s, std::size_t count) {
                                         Counts c;
                                         for (std::size_t r = 0; r < count; ++r) {
                                           const auto row = s.next();
                                           if (!matches(ev, row)) continue;
                                           ++c.evidence;
                                           if (matches(q, row)) ++c.event;
                                         }
                                         return c;
                                       });
  QueryResult out;
  out.kind = "probability";
  out.samples = options.samples;
  for (const auto& p : parts) {
    out.evidence_matches += p.evidence;
    out.event_matches += p.event;
  }
  if (out.evidence_matches > 0) {
    const double ne = static_cast<double>(out.evidence_matches);
    const double p = static_cast<double>(out.event_matches) / ne;
    out.estimate = p;
    out.standard_error = std::sqrt(p * (1.0 - p) / ne);
  }
  return out;
}

QueryResult expectation(const ClgNetwork& model, const std::string& target, const Evidence& evidence,
                        const SamplingOptions& options) {
  const auto ev = resolve(model, evidence);
  const auto t = model.index_of(target);
  if (model.variable(t).discrete()) throw DataError("expectation target '" + target + "' must be continuous");
  struct Sums {
    std::size_t n = 0;
    double sum = 0.0;
    double sq = 0.0;
  };
  const auto parts = by_chunks<Sums>(model, options.samples, options.seed, options.threads,
                                     [&](Sampler& s, std::size_t count) {
                                       Sums acc;
                                       for (std::size_t r = 0; r < count; ++r) {
                                         const auto row = s.next();
                                         if (!matches(ev, row)) continue;
                                         ++acc.n;
                                         acc.sum += row[t];
                                         acc.sq += row[t] * row[t];
                                       }
                                       return acc;
                                     });
  Sums total;
  for (const auto& p : parts) {
    total.n += p.n;
    total.sum += p.sum;
    total.sq += p.sq;
  }
  QueryResult out;
  out.kind = "expectation";
  out.samples = options.samples;
  out.evidence_matches = out.event_matches = total.n;
  if (total.n > 0) {
    const double n = static_cast<double>(total.n);
    const double mean = total.sum / n;
    out.estimate = mean;
    if (total.n > 1) {
      const double var = std::max(0.0, (total.sq - n * mean * mean) / (n - 1.0));
      out.standard_error = std::sqrt(var / n);
    }
  }
  return out;
}

// ---------------------------------------------------------------- interventions

ClgNetwork intervene(const ClgNetwork& model, const std::string& node, LocalDistribution marginal) {
  const auto i = model.index_of(node);
  if (node_of(marginal) != node) throw DataError("replacement distribution is for '" + node_of(marginal) + "'");
  const bool parentless = std::visit(
      [](const auto& l) { return l.discrete_parents.empty() && l.continuous_parents.empty(); }, marginal);
  if (!parentless) throw GraphError("an intervention distribution cannot have parents");
  return model.with_local(i, std::move(marginal));
}

ClgNetwork intervene(const ClgNetwork& model, const std::string& node, double value) {
  const auto i = model.index_of(node);
  const auto& var = model.variable(i);
  if (var.discrete()) {
    const auto code = static_cast<std::size_t>(value);
    if (value < 0 || static_cast<double>(code) != value || code >= var.levels.size()) {
      throw DataError("invalid level code for '" + node + "'");
    }
    LocalDiscrete d{node, var.levels, {}, {}, {}};
    DiscreteBlock b;
    b.probabilities.assign(var.levels.size(), 0.0);
    b.probabilities[code] = 1.0;
    d.blocks.push_back(std::move(b));
    return intervene(model, node, LocalDistribution(std::move(d)));
  }
  if (!std::isfinite(value)) throw DataError("intervention value for '" + node + "' must be finite");
  LocalGaussian g;
  g.node = node;
  GaussianBlock b;
  b.intercept = value;
  b.degenerate = true;
  g.blocks.push_back(b);
  return intervene(model, node, LocalDistribution(std::move(g)));
}

ClgNetwork intervene(const ClgNetwork& model, const std::string& node, const std::string& value) {
  const auto& var = model.variable(model.index_of(node));
  if (var.discrete()) {
    const auto it = std::find(var.levels.begin(), var.levels.end(), value);
    if (it == var.levels.end()) throw DataError("unknown level '" + value + "' of '" + node + "'");
    return intervene(model, node, static_cast<double>(it - var.levels.begin()));
  }
  double v = 0.0;
  const auto* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) throw DataError("intervention value '" + value + "' for '" + node + "' is not a number");
  return intervene(model, node, v);
}

// ---------------------------------------------------------------- prediction

Quadrature gauss_hermite(std::size_t points) {
  const auto n = static_cast<Eigen::Index>(points);
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index k = 1; k < n; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k) / 2.0);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  Quadrature q;
  for (Eigen::Index k = 0; k < n; ++k) {
    q.nodes.push_back(eig.eigenvalues()(k));
    const double v = eig.eigenvectors()(0, k);
    q.weights.push_back(std::sqrt(std::numbers::pi) * v * v);
  }
  return q;
}

namespace {

bool consistent(double observed, double predicted) {
  return std::abs(observed - predicted) <= 1e-7 * (1.0 + std::abs(observed) + std::abs(predicted));
}

double predict_continuous(const ClgNetwork& model, std::size_t t, std::vector<double> row) {
  const auto& name = model.variable(t).name;
  const auto prior = model.gaussian(t, row);
  double precision = 0.0;
  double shift = 0.0;  // precision-weighted mean
  std::optional<double> fixed;
  if (prior.sd == 0.0) {
    fixed = prior.mean;
  } else {
    precision = 1.0 / (prior.sd * prior.sd);
    shift = prior.mean * precision;
  }
  std::vector<std::size_t> logistic_children;
  std::vector<std::pair<std::size_t, ClgNetwork::Linear>> exact;
  for (const auto c : model.children(t)) {
    if (model.variable(c).discrete()) {
      logistic_children.push_back(c);
      continue;
    }
    const auto lin = model.gaussian_linear(c, row, t);
    const double y = row[c];
    if (lin.sd == 0.0) {
      exact.emplace_back(c, lin);
      if (lin.slope != 0.0 && !fixed) fixed = (y - lin.offset) / lin.slope;
      continue;
    }
    const double w = 1.0 / (lin.sd * lin.sd);
    precision += lin.slope * lin.slope * w;
    shift += lin.slope * (y - lin.offset) * w;
  }
  auto infeasible = [&](std::size_t c) {
    return NumericalError("evidence is infeasible: '" + model.variable(c).name + "' has zero variance and " +
                          "cannot match the observed values around '" + name + "'");
  };
  if (fixed) {
    for (const auto& [c, lin] : exact) {
      if (!consistent(row[c], lin.offset + lin.slope * *fixed)) throw infeasible(c);
    }
    return *fixed;
  }
  for (const auto& [c, lin] : exact) {
    if (!consistent(row[c], lin.offset)) throw infeasible(c);  // slope is zero here
  }
  const double mean = shift / precision;
  if (logistic_children.empty()) return mean;

  static const Quadrature gh = gauss_hermite(32);
  const double sd = std::sqrt(1.0 / precision);
  std::vector<double> logw(gh.nodes.size());
  std::vector<double> xs(gh.nodes.size());
  for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
    xs[k] = mean + std::numbers::sqrt2 * sd * gh.nodes[k];
    row[t] = xs[k];
    double lw = std::log(gh.weights[k]);
    for (const auto c : logistic_children) {
      lw += std::log(model.probabilities(c, row)[static_cast<std::size_t>(row[c])]);
    }
    logw[k] = lw;
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  if (!std::isfinite(top)) throw infeasible(logistic_children.front());
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double w = std::exp(logw[k] - top);
    num += w * xs[k];
    den += w;
  }
  return num / den;
}

}  // namespace

std::vector<double> posterior_states(const ClgNetwork& model, std::size_t t, std::span<const double> values) {
  const auto& var = model.variable(t);
  if (!var.discrete()) throw DataError("'" + var.name + "' is not discrete");
  std::vector<double> row(values.begin(), values.end());
  const std::size_t k = var.levels.size();
  std::vector<double> finite(k, 0.0);
  std::vector<int> exact(k, 0);
  std::vector<bool> possible(k, true);
  for (std::size_t s = 0; s < k; ++s) {
    row[t] = static_cast<double>(s);
    auto add = [&](double ld) {
      if (ld == -std::numeric_limits<double>::infinity()) possible[s] = false;
      else if (ld == std::numeric_limits<double>::infinity()) ++exact[s];
      else finite[s] += ld;
    };
    add(model.log_density(t, row));
    for (const auto c : model.children(t)) add(model.log_density(c, row));
  }
  int best_exact = -1;
  for (std::size_t s = 0; s < k; ++s) {
    if (possible[s]) best_exact = std::max(best_exact, exact[s]);
  }
  if (best_exact < 0) {
    throw NumericalError("evidence is infeasible for every state of '" + var.name + "'");
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < k; ++s) {
    if (possible[s] && exact[s] == best_exact) top = std::max(top, finite[s]);
  }
  std::vector<double> post(k, 0.0);
  double z = 0.0;
  for (std::size_t s = 0; s < k; ++s) {
    if (possible[s] && exact[s] == best_exact) {
      post[s] = std::exp(finite[s] - top);
      z += post[s];
    }
  }
  for (auto& p : post) p /= z;
  return post;
}

double predict_node(const ClgNetwork& model, std::size_t target, std::span<const double> row) {
  if (row.size() != model.size()) throw DataError("prediction row has the wrong number of values");
  if (!model.variable(target).discrete()) {
    return predict_continuous(model, target, std::vector<double>(row.begin(), row.end()));
  }
  const auto post = posterior_states(model, target, row);
  return static_cast<double>(std::max_element(post.begin(), post.end()) - post.begin());
}

}  // namespace clgbn
