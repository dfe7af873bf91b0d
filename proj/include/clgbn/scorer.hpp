#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "clgbn/clg_model.hpp"

namespace clgbn {

using ParentMask = std::uint64_t;

/// Decomposable BIC (log-likelihood minus (k/2) log n, higher is better).
///
/// Continuous local scores come from per-cell sufficient statistics (a cell is one observed
/// combination of all discrete variables), so a score costs O(#cells * p^2) regardless of n.
/// Near-exact fits are recomputed from the rows. Results are memoized per (node, parent set).
/// Not thread-safe; use one scorer per search.
class BicScorer {
 public:
  explicit BicScorer(const Dataset& data, FitOptions options = {});

  const Dataset& data() const { return data_; }
  std::size_t size() const { return data_.cols(); }

  /// Throws NumericalError (also cached) when the local model cannot be fitted.
  double local_score(std::size_t node, ParentMask parents);
  double local_score(std::string_view node, const std::vector<std::string>& parents);

  std::size_t cache_size() const;
  std::size_t computed() const { return computed_; }

 private:
  struct Cell {
    std::vector<int> codes;  // one per discrete variable
    std::size_t n = 0;
    Eigen::MatrixXd gram;    // over [1, shifted continuous values...]
    std::vector<std::size_t> rows;
  };

  double compute(std::size_t node, ParentMask parents) const;
  double gaussian_score(std::size_t node, const std::vector<std::size_t>& dpar,
                        const std::vector<std::size_t>& cpar) const;
  double gaussian_indicator_score(std::size_t node, const std::vector<std::size_t>& dpar,
                                  const std::vector<std::size_t>& cpar) const;
  double discrete_score(std::size_t node, const std::vector<std::size_t>& dpar,
                        const std::vector<std::size_t>& cpar) const;

  const Dataset& data_;
  FitOptions options_;
  std::vector<std::size_t> discrete_;     // column indices of discrete variables
  std::vector<std::size_t> continuous_;   // column indices of continuous variables
  std::vector<int> slot_;                 // column -> position in discrete_ or continuous_
  std::vector<Cell> cells_;
  double log_n_ = 0.0;
  std::vector<std::unordered_map<ParentMask, std::variant<double, std::string>>> cache_;
  std::size_t computed_ = 0;
};

/// BIC of `dag` on `data`: the sum of local scores in the DAG's node order.
double bic_score(const Dag& dag, const Dataset& data, const FitOptions& options = {});
/// Local score of every node, in the DAG's node order.
std::vector<double> local_scores(const Dag& dag, const Dataset& data, const FitOptions& options = {});

}  // namespace clgbn
