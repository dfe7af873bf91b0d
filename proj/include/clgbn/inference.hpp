#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "clgbn/clg_model.hpp"
#include "clgbn/dataset.hpp"

namespace clgbn {

/// One condition on one variable: a discrete level, or a closed interval for a continuous value.
struct Condition {
  std::string variable;
  std::optional<std::string> level;  // discrete
  double lo = 0.0;                   // continuous
  double hi = 0.0;

  static Condition equals(std::string variable, std::string level);
  static Condition between(std::string variable, double lo, double hi);
  /// [value - epsilon, value + epsilon]
  static Condition near(std::string variable, double value, double epsilon);
};

/// Conjunction of conditions; several conditions may name the same variable.
using Evidence = std::vector<Condition>;

struct QueryResult {
  std::string kind;               // "probability" or "expectation"
  std::optional<double> estimate; // empty when no sample matched the evidence
  std::optional<double> standard_error;
  std::size_t samples = 0;
  std::size_t evidence_matches = 0;
  std::size_t event_matches = 0;  // expectation queries: equal to evidence_matches
};

struct SamplingOptions {
  std::size_t samples = 10000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

/// Ancestral sampling; columns in the network's variable order. Rows are generated in fixed-size
/// chunks with one RNG substream per chunk, so the output does not depend on `threads`.
Dataset simulate(const ClgNetwork& model, std::size_t n, std::uint64_t seed, std::size_t threads = 1);

/// Logic-sampling estimate of P(event | evidence).
QueryResult query(const ClgNetwork& model, const Evidence& event, const Evidence& evidence,
                  const SamplingOptions& options = {});
/// Logic-sampling estimate of E[target | evidence] for a continuous target.
QueryResult expectation(const ClgNetwork& model, const std::string& target, const Evidence& evidence,
                        const SamplingOptions& options = {});

/// Throws DataError when a condition names an unknown variable or level, or lo > hi.
void validate_evidence(const ClgNetwork& model, const Evidence& evidence);

/// Mutilated network: arcs into `node` removed and its local replaced by a point mass at `value`
/// (a level name for a discrete node, a number for a continuous one).
ClgNetwork intervene(const ClgNetwork& model, const std::string& node, const std::string& value);
ClgNetwork intervene(const ClgNetwork& model, const std::string& node, double value);
/// Replaces the local of `node` by a parentless `marginal`.
ClgNetwork intervene(const ClgNetwork& model, const std::string& node, LocalDistribution marginal);

/// Prediction of variable `target` from every other value in `row` (network variable order; the
/// target entry is ignored). Continuous: posterior mean. Discrete: most probable state code, ties to
/// the lowest. Throws NumericalError when a zero-sd child contradicts the row.
double predict_node(const ClgNetwork& model, std::size_t target, std::span<const double> row);

/// Posterior state probabilities of a discrete target given every other value in `row`.
std::vector<double> posterior_states(const ClgNetwork& model, std::size_t target, std::span<const double> row);

/// Nodes and weights for integrals against exp(-x^2) (physicists' Gauss-Hermite).
struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};
Quadrature gauss_hermite(std::size_t points);

}  // namespace clgbn
