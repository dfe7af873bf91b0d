#include "clgbn/clg_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <Eigen/Dense>

#include "clgbn/error.hpp"
#include "fit_internal.hpp"

namespace clgbn {

namespace detail {

void check_rank(const Eigen::MatrixXd& c, const std::string& node) {
  const auto q = c.rows();
  if (q == 0) return;
  Eigen::VectorXd scale(q);
  for (Eigen::Index i = 0; i < q; ++i) {
    if (!(c(i, i) > 0.0)) throw NumericalError("collinear design for node '" + node + "': a regressor is constant");
    scale(i) = 1.0 / std::sqrt(c(i, i));
  }
  const Eigen::MatrixXd corr = scale.asDiagonal() * c * scale.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr, Eigen::EigenvaluesOnly);
  if (eig.info() != Eigen::Success || eig.eigenvalues()(0) < kCollinearityTolerance) {
    throw NumericalError("collinear design for node '" + node + "'");
  }
}

namespace {

double regressor_value(const Dataset& data, const Regressor& reg, std::size_t row) {
  const double v = data.at(row, reg.col);
  if (reg.level < 0) return v;
  return v == static_cast<double>(reg.level) ? 1.0 : 0.0;
}

// Zero-variance guard relative to the raw magnitude, so that rounding in the mean of a
// constant column is not mistaken for variation.
Eigen::MatrixXd centered_cross_products(const Eigen::MatrixXd& x) {
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const Eigen::MatrixXd xc = x.rowwise() - mean;
  Eigen::MatrixXd c = xc.transpose() * xc;
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double raw = x.col(j).squaredNorm();
    if (c(j, j) <= 1e-24 * raw) c(j, j) = 0.0;
  }
  return c;
}

}  // namespace

OlsFit ols(const Dataset& data, std::span<const std::size_t> rows, std::size_t y,
           std::span<const Regressor> regressors, const std::string& node) {
  const std::size_t n = rows.size();
  const std::size_t q = regressors.size();
  if (n < q + 2) {
    throw NumericalError("insufficient data for node '" + node + "': " + std::to_string(n) + " rows, need at least " +
                         std::to_string(q + 2));
  }
  Eigen::MatrixXd x(n, q + 1);
  Eigen::VectorXd yv(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 0; j < q; ++j) x(i, j + 1) = regressor_value(data, regressors[j], rows[i]);
    yv(i) = data.at(rows[i], y);
  }
  if (q > 0) check_rank(centered_cross_products(x.rightCols(q)), node);

  OlsFit fit;
  fit.n = n;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(q + 1);
  if (q == 0) {
    beta(0) = yv.mean();
  } else {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    beta = qr.solve(yv);
  }
  const Eigen::VectorXd resid = yv - x * beta;
  fit.rss = resid.squaredNorm();
  fit.syy = (yv.array() - yv.mean()).square().sum();
  if (yv.maxCoeff() == yv.minCoeff()) {
    fit.rss = 0.0;
    fit.syy = 0.0;
  }
  fit.intercept = beta(0);
  fit.coefficients.assign(beta.data() + 1, beta.data() + 1 + q);
  return fit;
}

bool is_degenerate(double rss, double syy) {
  return std::max(rss, 0.0) <= kDegenerateTolerance * kDegenerateTolerance * syy;
}

double gaussian_ml_loglik(double rss, double syy, std::size_t n) {
  if (is_degenerate(rss, syy)) return std::numeric_limits<double>::infinity();
  const double nn = static_cast<double>(n);
  return -0.5 * nn * (std::log(2.0 * std::numbers::pi * rss / nn) + 1.0);
}

std::vector<double> softmax(const std::vector<std::vector<double>>& weights, std::span<const double> x) {
  std::vector<double> eta(weights.size());
  for (std::size_t k = 0; k < weights.size(); ++k) {
    double e = weights[k][0];
    for (std::size_t j = 0; j < x.size(); ++j) e += weights[k][j + 1] * x[j];
    eta[k] = e;
  }
  const double m = *std::max_element(eta.begin(), eta.end());
  double z = 0.0;
  for (auto& e : eta) {
    e = std::exp(e - m);
    z += e;
  }
  for (auto& e : eta) e /= z;
  return eta;
}

LogisticFit logistic(const Dataset& data, std::span<const std::size_t> rows, std::size_t y, std::size_t states,
                     std::span<const std::size_t> continuous, const std::string& node) {
  const std::size_t n = rows.size();
  const std::size_t p = continuous.size();
  if (n < p + 2) {
    throw NumericalError("insufficient data for node '" + node + "': " + std::to_string(n) + " rows, need at least " +
                         std::to_string(p + 2));
  }
  const std::size_t k1 = states - 1;
  const std::size_t dim = p + 1;
  Eigen::MatrixXd x(n, dim);
  std::vector<std::size_t> label(n);
  for (std::size_t i = 0; i < n; ++i) {
    x(i, 0) = 1.0;
    for (std::size_t j = 0; j < p; ++j) x(i, j + 1) = data.at(rows[i], continuous[j]);
    label[i] = static_cast<std::size_t>(data.at(rows[i], y));
  }
  if (p > 0) check_rank(centered_cross_products(x.rightCols(p)), node);
  // Center the slopes' columns for conditioning; undone at the end.
  Eigen::RowVectorXd shift = Eigen::RowVectorXd::Zero(dim);
  if (p > 0) shift.tail(p) = x.rightCols(p).colwise().mean();
  x = x.rowwise() - shift;

  const std::size_t m = k1 * dim;
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
  Eigen::MatrixXd prob(n, states);

  auto evaluate = [&](const Eigen::VectorXd& t) {
    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double mx = 0.0;
      std::vector<double> eta(states, 0.0);
      for (std::size_t k = 1; k < states; ++k) {
        eta[k] = x.row(i).dot(t.segment(static_cast<Eigen::Index>((k - 1) * dim), static_cast<Eigen::Index>(dim)));
        mx = std::max(mx, eta[k]);
      }
      double z = 0.0;
      for (std::size_t k = 0; k < states; ++k) z += std::exp(eta[k] - mx);
      for (std::size_t k = 0; k < states; ++k) prob(i, k) = std::exp(eta[k] - mx) / z;
      ll += eta[label[i]] - mx - std::log(z);
    }
    return ll;
  };

  double ll = evaluate(theta);
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m));
    Eigen::MatrixXd info = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < n; ++i) {
      const Eigen::RowVectorXd xi = x.row(i);
      for (std::size_t a = 1; a < states; ++a) {
        const double resid = (label[i] == a ? 1.0 : 0.0) - prob(i, a);
        grad.segment(static_cast<Eigen::Index>((a - 1) * dim), static_cast<Eigen::Index>(dim)) += resid * xi.transpose();
        for (std::size_t b = 1; b < states; ++b) {
          const double w = prob(i, a) * ((a == b ? 1.0 : 0.0) - prob(i, b));
          info.block(static_cast<Eigen::Index>((a - 1) * dim), static_cast<Eigen::Index>((b - 1) * dim),
                     static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim)) += w * xi.transpose() * xi;
        }
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
    if (ldlt.info() != Eigen::Success) break;
    const Eigen::VectorXd step = ldlt.solve(grad);
    if (!step.allFinite()) break;
    double t = 1.0;
    double next_ll = ll;
    Eigen::VectorXd next = theta;
    bool improved = false;
    for (int h = 0; h < 30; ++h) {
      next = theta + t * step;
      next_ll = evaluate(next);
      if (next_ll >= ll - 1e-12 * (1.0 + std::abs(ll))) {
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) {
      evaluate(theta);
      break;
    }
    const double change = next_ll - ll;
    const double move = (t * step).cwiseAbs().maxCoeff();
    theta = next;
    ll = next_ll;
    if (std::abs(change) < 1e-11 * (1.0 + std::abs(ll)) && move < 1e-8) break;
  }

  LogisticFit fit;
  fit.loglik = ll;
  fit.weights.assign(states, std::vector<double>(dim, 0.0));
  for (std::size_t k = 1; k < states; ++k) {
    const auto seg = theta.segment(static_cast<Eigen::Index>((k - 1) * dim), static_cast<Eigen::Index>(dim));
    double intercept = seg(0);
    for (std::size_t j = 1; j < dim; ++j) {
      fit.weights[k][j] = seg(static_cast<Eigen::Index>(j));
      intercept -= seg(static_cast<Eigen::Index>(j)) * shift(static_cast<Eigen::Index>(j));
    }
    fit.weights[k][0] = intercept;
  }
  return fit;
}

}  // namespace detail

const std::string& node_of(const LocalDistribution& local) {
  return std::visit([](const auto& l) -> const std::string& { return l.node; }, local);
}

// ---------------------------------------------------------------- ClgNetwork

namespace {

bool near_one(double s) { return std::abs(s - 1.0) <= 1e-9; }

std::string configuration_label(const std::vector<Variable>& vars, const std::vector<std::size_t>& dpar,
                                std::size_t config) {
  std::vector<std::string> parts(dpar.size());
  for (std::size_t j = dpar.size(); j-- > 0;) {
    const auto& v = vars[dpar[j]];
    parts[j] = v.name + "=" + v.levels[config % v.levels.size()];
    config /= v.levels.size();
  }
  std::string out;
  for (std::size_t j = 0; j < parts.size(); ++j) out += (j ? "," : "") + parts[j];
  return out.empty() ? "(none)" : out;
}

}  // namespace

ClgNetwork::ClgNetwork(Dag dag, std::vector<Variable> variables, std::vector<LocalDistribution> locals,
                       std::size_t fitted_n)
    : dag_(std::move(dag)), variables_(std::move(variables)), locals_(std::move(locals)), fitted_n_(fitted_n) {
  resolve();
}

std::size_t ClgNetwork::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    if (variables_[i].name == name) return i;
  }
  throw DataError("unknown variable '" + std::string(name) + "'");
}

void ClgNetwork::resolve() {
  {
    auto a = dag_.nodes();
    std::vector<std::string> b;
    for (const auto& v : variables_) b.push_back(v.name);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    if (a != b) throw GraphError("network variables do not match the DAG nodes");
  }
  if (locals_.size() != variables_.size()) throw GraphError("one local distribution per variable required");

  resolved_.assign(variables_.size(), {});
  children_.assign(variables_.size(), {});
  for (std::size_t i = 0; i < variables_.size(); ++i) {
    const auto& var = variables_[i];
    const auto& local = locals_[i];
    if (node_of(local) != var.name) throw GraphError("local distribution order does not match variables at '" + var.name + "'");
    const auto& dpar = std::visit([](const auto& l) -> const auto& { return l.discrete_parents; }, local);
    const auto& cpar = std::visit([](const auto& l) -> const auto& { return l.continuous_parents; }, local);
    std::vector<std::string> all(dpar);
    all.insert(all.end(), cpar.begin(), cpar.end());
    std::sort(all.begin(), all.end());
    if (all != dag_.parents(var.name)) throw GraphError("parents of local '" + var.name + "' do not match the DAG");
    if (!std::is_sorted(dpar.begin(), dpar.end()) || !std::is_sorted(cpar.begin(), cpar.end())) {
      throw GraphError("parent lists of '" + var.name + "' must be sorted");
    }

    auto& r = resolved_[i];
    std::size_t configs = 1;
    for (const auto& p : dpar) {
      const auto j = index_of(p);
      if (!variables_[j].discrete()) throw GraphError("'" + p + "' listed as discrete parent of '" + var.name + "'");
      r.discrete_parents.push_back(j);
      r.radix.push_back(variables_[j].levels.size());
      configs *= variables_[j].levels.size();
    }
    for (const auto& p : cpar) {
      const auto j = index_of(p);
      if (variables_[j].discrete()) throw GraphError("'" + p + "' listed as continuous parent of '" + var.name + "'");
      r.continuous_parents.push_back(j);
    }

    if (const auto* g = std::get_if<LocalGaussian>(&local)) {
      if (var.discrete()) throw GraphError("Gaussian local for discrete variable '" + var.name + "'");
      if (g->indicator_coding) {
        for (const auto dp : r.discrete_parents) {
          for (std::size_t l = 1; l < variables_[dp].levels.size(); ++l) {
            r.regressor_cols.push_back(dp);
            r.regressor_levels.push_back(static_cast<int>(l));
          }
        }
      }
      for (const auto cp : r.continuous_parents) {
        r.regressor_cols.push_back(cp);
        r.regressor_levels.push_back(-1);
      }
      if (g->regressors.size() != r.regressor_cols.size()) throw GraphError("regressor list mismatch for '" + var.name + "'");
      const std::size_t want = g->indicator_coding ? 1 : configs;
      if (g->blocks.size() != want) throw GraphError("wrong number of parameter blocks for '" + var.name + "'");
      for (const auto& b : g->blocks) {
        if (b.coefficients.size() != g->regressors.size() || !(b.sd >= 0.0)) {
          throw GraphError("malformed parameter block for '" + var.name + "'");
        }
      }
    } else {
      const auto& d = std::get<LocalDiscrete>(local);
      if (!var.discrete() || d.levels != var.levels) throw GraphError("discrete local mismatch for '" + var.name + "'");
      if (d.blocks.size() != configs) throw GraphError("wrong number of parameter blocks for '" + var.name + "'");
      for (const auto& b : d.blocks) {
        if (cpar.empty()) {
          if (b.probabilities.size() != d.levels.size()) throw GraphError("malformed CPT for '" + var.name + "'");
          double s = 0.0;
          for (const double p : b.probabilities) {
            if (!(p >= 0.0)) throw GraphError("negative probability for '" + var.name + "'");
            s += p;
          }
          if (!near_one(s)) throw GraphError("probabilities of '" + var.name + "' do not sum to 1");
        } else {
          if (b.logits.size() != d.levels.size()) throw GraphError("malformed logistic block for '" + var.name + "'");
          for (const auto& w : b.logits) {
            if (w.size() != cpar.size() + 1) throw GraphError("malformed logistic block for '" + var.name + "'");
          }
        }
      }
    }
  }
  for (const auto& a : dag_.arcs()) children_[index_of(a.from)].push_back(index_of(a.to));
  order_.clear();
  for (const auto& name : dag_.topological_order()) order_.push_back(index_of(name));
}

std::size_t ClgNetwork::configuration(std::size_t i, std::span<const double> row) const {
  const auto& r = resolved_[i];
  if (const auto* g = std::get_if<LocalGaussian>(&locals_[i]); g && g->indicator_coding) return 0;
  std::size_t idx = 0;
  for (std::size_t j = 0; j < r.discrete_parents.size(); ++j) {
    idx = idx * r.radix[j] + static_cast<std::size_t>(row[r.discrete_parents[j]]);
  }
  return idx;
}

double ClgNetwork::linear_predictor(const LocalGaussian&, const Resolved& r, const GaussianBlock& b,
                                    std::span<const double> row, std::size_t skip) const {
  double mean = b.intercept;
  for (std::size_t j = 0; j < r.regressor_cols.size(); ++j) {
    const auto col = r.regressor_cols[j];
    if (col == skip) continue;
    const double v = r.regressor_levels[j] < 0 ? row[col] : (row[col] == r.regressor_levels[j] ? 1.0 : 0.0);
    mean += b.coefficients[j] * v;
  }
  return mean;
}

ClgNetwork::Moments ClgNetwork::gaussian(std::size_t i, std::span<const double> row) const {
  const auto& g = std::get<LocalGaussian>(locals_[i]);
  const auto& b = g.blocks[configuration(i, row)];
  return {linear_predictor(g, resolved_[i], b, row, static_cast<std::size_t>(-1)), b.sd};
}

ClgNetwork::Linear ClgNetwork::gaussian_linear(std::size_t i, std::span<const double> row, std::size_t target) const {
  const auto& g = std::get<LocalGaussian>(locals_[i]);
  const auto& r = resolved_[i];
  const auto& b = g.blocks[configuration(i, row)];
  Linear lin;
  lin.offset = linear_predictor(g, r, b, row, target);
  for (std::size_t j = 0; j < r.regressor_cols.size(); ++j) {
    if (r.regressor_cols[j] == target && r.regressor_levels[j] < 0) lin.slope += b.coefficients[j];
  }
  lin.sd = b.sd;
  return lin;
}

std::vector<double> ClgNetwork::probabilities(std::size_t i, std::span<const double> row) const {
  const auto& d = std::get<LocalDiscrete>(locals_[i]);
  const auto& b = d.blocks[configuration(i, row)];
  if (d.continuous_parents.empty()) return b.probabilities;
  std::vector<double> x;
  x.reserve(resolved_[i].continuous_parents.size());
  for (const auto cp : resolved_[i].continuous_parents) x.push_back(row[cp]);
  return detail::softmax(b.logits, x);
}

double ClgNetwork::log_density(std::size_t i, std::span<const double> row) const {
  if (std::holds_alternative<LocalGaussian>(locals_[i])) {
    const auto m = gaussian(i, row);
    const double x = row[i];
    if (m.sd == 0.0) {
      const double tol = 1e-7 * (1.0 + std::abs(x) + std::abs(m.mean));
      return std::abs(x - m.mean) <= tol ? std::numeric_limits<double>::infinity()
                                         : -std::numeric_limits<double>::infinity();
    }
    const double z = (x - m.mean) / m.sd;
    return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(m.sd) - 0.5 * z * z;
  }
  const auto p = probabilities(i, row);
  const double pi = p[static_cast<std::size_t>(row[i])];
  return pi > 0.0 ? std::log(pi) : -std::numeric_limits<double>::infinity();
}

ClgNetwork ClgNetwork::with_local(std::size_t i, LocalDistribution local) const {
  const auto& name = variables_.at(i).name;
  Dag dag = dag_.without_arcs_into(name);
  const auto& dpar = std::visit([](const auto& l) -> const auto& { return l.discrete_parents; }, local);
  const auto& cpar = std::visit([](const auto& l) -> const auto& { return l.continuous_parents; }, local);
  for (const auto* ps : {&dpar, &cpar}) {
    for (const auto& p : *ps) dag = dag.with_arc({p, name});
  }
  auto locals = locals_;
  locals[i] = std::move(local);
  ClgNetwork out(std::move(dag), variables_, std::move(locals), fitted_n_);
  out.warnings = warnings;
  return out;
}

// ---------------------------------------------------------------- fitting

std::vector<std::size_t> column_mapping(const ClgNetwork& model, const Dataset& data) {
  std::vector<std::size_t> map;
  map.reserve(model.size());
  for (const auto& var : model.variables()) {
    const auto c = data.index_of(var.name);
    const auto& dv = data.variable(c);
    if (dv.type != var.type) throw DataError("column '" + var.name + "' has a different type than in the model");
    if (var.discrete() && dv.levels != var.levels) {
      throw DataError("column '" + var.name + "' has different levels than in the model");
    }
    map.push_back(c);
  }
  return map;
}

ClgNetwork fit_parameters(const Dag& dag, const Dataset& data, const FitOptions& options) {
  std::vector<Variable> vars;
  std::vector<std::size_t> col;
  for (const auto& name : dag.nodes()) {
    col.push_back(data.index_of(name));
    vars.push_back(data.variable(col.back()));
  }
  if (vars.size() != data.cols()) throw DataError("DAG nodes do not cover every data column");
  auto var_index = [&](const std::string& name) {
    return static_cast<std::size_t>(std::find(dag.nodes().begin(), dag.nodes().end(), name) - dag.nodes().begin());
  };

  std::vector<std::size_t> all_rows(data.rows());
  for (std::size_t r = 0; r < data.rows(); ++r) all_rows[r] = r;

  std::vector<LocalDistribution> locals;
  std::vector<std::string> warnings;
  for (std::size_t i = 0; i < vars.size(); ++i) {
    const auto& var = vars[i];
    std::vector<std::string> dpar, cpar;
    std::vector<std::size_t> dpar_idx;
    for (const auto& p : dag.parents(var.name)) {
      if (vars[var_index(p)].discrete()) {
        dpar.push_back(p);
        dpar_idx.push_back(var_index(p));
      } else {
        cpar.push_back(p);
      }
    }
    std::size_t configs = 1;
    for (const auto j : dpar_idx) configs *= vars[j].levels.size();
    std::vector<std::vector<std::size_t>> groups(configs);
    for (std::size_t r = 0; r < data.rows(); ++r) {
      std::size_t idx = 0;
      for (const auto j : dpar_idx) idx = idx * vars[j].levels.size() + static_cast<std::size_t>(data.at(r, col[j]));
      groups[idx].push_back(r);
    }
    std::vector<std::size_t> cont_cols;
    for (const auto& p : cpar) cont_cols.push_back(col[var_index(p)]);
    auto inherit_warning = [&](std::size_t config) {
      warnings.push_back("node '" + var.name + "': no rows for configuration " +
                         configuration_label(vars, dpar_idx, config) + "; using the marginal fit");
    };

    if (!var.discrete()) {
      LocalGaussian g;
      g.node = var.name;
      g.discrete_parents = dpar;
      g.continuous_parents = cpar;
      g.indicator_coding = options.coding == DiscreteParentCoding::kIndicator && !dpar.empty();
      std::vector<detail::Regressor> regs;
      if (g.indicator_coding) {
        for (const auto j : dpar_idx) {
          for (std::size_t l = 1; l < vars[j].levels.size(); ++l) {
            regs.push_back({col[j], static_cast<int>(l)});
            g.regressors.push_back(vars[j].name + "=" + vars[j].levels[l]);
          }
        }
      }
      for (std::size_t k = 0; k < cpar.size(); ++k) {
        regs.push_back({cont_cols[k], -1});
        g.regressors.push_back(cpar[k]);
      }
      auto make_block = [&](const detail::OlsFit& fit) {
        GaussianBlock b;
        b.intercept = fit.intercept;
        b.coefficients = fit.coefficients;
        b.n = fit.n;
        b.degenerate = detail::is_degenerate(fit.rss, fit.syy);
        if (!b.degenerate) {
          b.sd = std::sqrt(fit.rss / static_cast<double>(fit.n));
          const auto dof = static_cast<double>(fit.n) - static_cast<double>(fit.coefficients.size()) - 1.0;
          b.sd_unbiased = dof > 0 ? std::sqrt(fit.rss / dof) : 0.0;
        }
        return b;
      };
      if (g.indicator_coding) {
        g.blocks.push_back(make_block(detail::ols(data, all_rows, col[i], regs, var.name)));
      } else {
        for (std::size_t c = 0; c < configs; ++c) {
          if (groups[c].empty()) {
            auto b = make_block(detail::ols(data, all_rows, col[i], {}, var.name));
            b.coefficients.assign(regs.size(), 0.0);
            b.n = 0;
            b.inherited = true;
            g.blocks.push_back(std::move(b));
            inherit_warning(c);
          } else {
            g.blocks.push_back(make_block(detail::ols(data, groups[c], col[i], regs, var.name)));
          }
        }
      }
      locals.emplace_back(std::move(g));
      continue;
    }

    LocalDiscrete d;
    d.node = var.name;
    d.levels = var.levels;
    d.discrete_parents = dpar;
    d.continuous_parents = cpar;
    const std::size_t k = var.levels.size();
    std::vector<double> marginal(k, 0.0);
    for (std::size_t r = 0; r < data.rows(); ++r) marginal[static_cast<std::size_t>(data.at(r, col[i]))] += 1.0;
    for (auto& m : marginal) m /= static_cast<double>(data.rows());

    for (std::size_t c = 0; c < configs; ++c) {
      DiscreteBlock b;
      b.n = groups[c].size();
      if (groups[c].empty()) {
        b.inherited = true;
        inherit_warning(c);
        if (cpar.empty()) {
          b.probabilities = marginal;
        } else {
          b.logits.assign(k, std::vector<double>(cpar.size() + 1, 0.0));
          for (std::size_t s = 1; s < k; ++s) {
            b.logits[s][0] = std::log(std::max(marginal[s], 1e-300) / std::max(marginal[0], 1e-300));
          }
        }
      } else if (cpar.empty()) {
        b.probabilities.assign(k, 0.0);
        for (const auto r : groups[c]) b.probabilities[static_cast<std::size_t>(data.at(r, col[i]))] += 1.0;
        for (auto& p : b.probabilities) p /= static_cast<double>(groups[c].size());
      } else {
        b.logits = detail::logistic(data, groups[c], col[i], k, cont_cols, var.name).weights;
      }
      d.blocks.push_back(std::move(b));
    }
    locals.emplace_back(std::move(d));
  }
  ClgNetwork model(dag, std::move(vars), std::move(locals), data.rows());
  model.warnings = std::move(warnings);
  return model;
}

std::vector<double> log_likelihood_rows(const ClgNetwork& model, const Dataset& data) {
  const auto map = column_mapping(model, data);
  std::vector<double> out(data.rows());
  std::vector<double> row(model.size());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t i = 0; i < model.size(); ++i) row[i] = data.at(r, map[i]);
    double total = 0.0;
    bool neg_inf = false, pos_inf = false;
    for (std::size_t i = 0; i < model.size(); ++i) {
      const double ld = model.log_density(i, row);
      if (ld == -std::numeric_limits<double>::infinity()) neg_inf = true;
      else if (ld == std::numeric_limits<double>::infinity()) pos_inf = true;
      else total += ld;
    }
    if (neg_inf) out[r] = -std::numeric_limits<double>::infinity();
    else if (pos_inf) out[r] = std::numeric_limits<double>::infinity();
    else out[r] = total;
  }
  return out;
}

double log_likelihood(const ClgNetwork& model, const Dataset& data) {
  const auto rows = log_likelihood_rows(model, data);
  double total = 0.0;
  bool pos_inf = false;
  for (const double v : rows) {
    if (v == -std::numeric_limits<double>::infinity()) return v;
    if (v == std::numeric_limits<double>::infinity()) pos_inf = true;
    else total += v;
  }
  return pos_inf ? std::numeric_limits<double>::infinity() : total;
}

std::size_t free_parameters(const ClgNetwork& model) {
  std::size_t k = 0;
  for (std::size_t i = 0; i < model.size(); ++i) {
    const auto& local = model.local(i);
    if (const auto* g = std::get_if<LocalGaussian>(&local)) {
      for (const auto& b : g->blocks) {
        if (!b.inherited) k += g->regressors.size() + 2;
      }
    } else {
      const auto& d = std::get<LocalDiscrete>(local);
      for (const auto& b : d.blocks) {
        if (!b.inherited) k += (d.levels.size() - 1) * (d.continuous_parents.size() + 1);
      }
    }
  }
  return k;
}

}  // namespace clgbn
