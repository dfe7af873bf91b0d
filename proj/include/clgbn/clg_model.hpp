#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "clgbn/dataset.hpp"
#include "clgbn/graph.hpp"

namespace clgbn {

/// How discrete parents enter the regression of a continuous node.
enum class DiscreteParentCoding {
  kPerConfiguration,  // separate (intercept, slopes, sd) per discrete-parent configuration
  kIndicator,         // one regression with 0/1 indicator regressors and a shared sd
};

struct FitOptions {
  DiscreteParentCoding coding = DiscreteParentCoding::kPerConfiguration;
};

struct GaussianBlock {
  double intercept = 0.0;
  std::vector<double> coefficients;  // aligned with LocalGaussian::regressors
  double sd = 0.0;                   // maximum-likelihood (divisor n)
  double sd_unbiased = 0.0;          // divisor n - #coefficients - 1; 0 when undefined
  std::size_t n = 0;
  bool degenerate = false;  // sd == 0: the node is a deterministic function of its parents
  bool inherited = false;   // no rows for this configuration: marginal fit of the node
};

/// Linear-Gaussian local distribution of a continuous node.
struct LocalGaussian {
  std::string node;
  std::vector<std::string> discrete_parents;    // sorted
  std::vector<std::string> continuous_parents;  // sorted
  bool indicator_coding = false;
  /// Coefficient names. Per-configuration coding: the continuous parents. Indicator coding:
  /// "<parent>=<level>" for every non-reference level, then the continuous parents.
  std::vector<std::string> regressors;
  /// One block per discrete-parent configuration (mixed radix, first parent slowest);
  /// a single block under indicator coding.
  std::vector<GaussianBlock> blocks;
};

struct DiscreteBlock {
  std::vector<double> probabilities;        // used when there are no continuous parents
  std::vector<std::vector<double>> logits;  // [state][intercept, slopes...]; state 0 is all zeros
  std::size_t n = 0;
  bool inherited = false;
};

/// Conditional probability table of a discrete node. Continuous parents (only reachable through a
/// whitelisted arc) are handled with a multinomial-logistic block per discrete configuration.
struct LocalDiscrete {
  std::string node;
  std::vector<std::string> levels;
  std::vector<std::string> discrete_parents;    // sorted
  std::vector<std::string> continuous_parents;  // sorted
  std::vector<DiscreteBlock> blocks;
};

using LocalDistribution = std::variant<LocalGaussian, LocalDiscrete>;

const std::string& node_of(const LocalDistribution& local);

class ClgNetwork {
 public:
  ClgNetwork(Dag dag, std::vector<Variable> variables, std::vector<LocalDistribution> locals,
             std::size_t fitted_n = 0);

  const Dag& dag() const { return dag_; }
  const std::vector<Variable>& variables() const { return variables_; }
  const Variable& variable(std::size_t i) const { return variables_.at(i); }
  std::size_t size() const { return variables_.size(); }
  std::size_t index_of(std::string_view name) const;
  const LocalDistribution& local(std::size_t i) const { return locals_.at(i); }
  const LocalDistribution& local(std::string_view name) const { return locals_.at(index_of(name)); }
  std::size_t fitted_n() const { return fitted_n_; }
  /// Ancestral order as variable indices.
  const std::vector<std::size_t>& order() const { return order_; }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_.at(i); }

  /// Configuration index of node i's discrete parents for a full row (values in variable order).
  std::size_t configuration(std::size_t i, std::span<const double> row) const;

  struct Moments {
    double mean = 0.0;
    double sd = 0.0;
  };
  /// Conditional mean/sd of continuous node i given its parents in `row`.
  Moments gaussian(std::size_t i, std::span<const double> row) const;
  /// Conditional mean of continuous node i written as offset + slope * row[target].
  struct Linear {
    double offset = 0.0;
    double slope = 0.0;
    double sd = 0.0;
  };
  Linear gaussian_linear(std::size_t i, std::span<const double> row, std::size_t target) const;
  /// Conditional state probabilities of discrete node i given its parents in `row`.
  std::vector<double> probabilities(std::size_t i, std::span<const double> row) const;
  /// log p(row[i] | parents). Degenerate Gaussian blocks give +inf on a match and -inf otherwise.
  double log_density(std::size_t i, std::span<const double> row) const;

  /// Copy with node i's local distribution replaced and the DAG adjusted to its parents.
  ClgNetwork with_local(std::size_t i, LocalDistribution local) const;

  std::vector<std::string> warnings;

 private:
  struct Resolved {
    std::vector<std::size_t> discrete_parents;
    std::vector<std::size_t> continuous_parents;
    std::vector<std::size_t> radix;
    std::vector<std::size_t> regressor_cols;  // indicator coding: column of each regressor
    std::vector<int> regressor_levels;        // -1 for a continuous value
  };

  void resolve();
  double linear_predictor(const LocalGaussian& g, const Resolved& r, const GaussianBlock& b,
                          std::span<const double> row, std::size_t skip) const;

  Dag dag_;
  std::vector<Variable> variables_;
  std::vector<LocalDistribution> locals_;
  std::size_t fitted_n_ = 0;
  std::vector<Resolved> resolved_;
  std::vector<std::size_t> order_;
  std::vector<std::vector<std::size_t>> children_;
};

/// Maximum-likelihood parameters for every local distribution of `dag` on `data`.
/// Throws NumericalError on collinear designs or configurations with too few rows.
ClgNetwork fit_parameters(const Dag& dag, const Dataset& data, const FitOptions& options = {});

/// Sum over rows and nodes of the log local densities. Returns -inf when any term is -inf,
/// otherwise +inf when a degenerate block matches.
double log_likelihood(const ClgNetwork& model, const Dataset& data);
/// Per-row totals (same sentinel rules per row).
std::vector<double> log_likelihood_rows(const ClgNetwork& model, const Dataset& data);

/// Number of free parameters: per fitted configuration, #regressors + 2 for continuous nodes and
/// (#states - 1) * (#continuous parents + 1) for discrete nodes. Inherited configurations add nothing.
std::size_t free_parameters(const ClgNetwork& model);

/// Row values of `data` reordered to the network's variable order, matched by name.
std::vector<std::size_t> column_mapping(const ClgNetwork& model, const Dataset& data);

}  // namespace clgbn
