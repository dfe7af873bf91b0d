#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "clgbn/clg_model.hpp"
#include "clgbn/dataset.hpp"
#include "clgbn/graph.hpp"

namespace clgbn {

/// Declaration order is the tie-break order.
enum class MoveKind { kAdd, kDelete, kReverse };

std::string to_string(MoveKind kind);

struct Move {
  MoveKind kind = MoveKind::kAdd;
  Arc arc;  // for a reversal, the arc as it is before the move
  double delta = 0.0;
};

struct SearchOptions {
  bool allow_reversals = true;
  /// A move is taken only when its score delta exceeds this.
  double min_improvement = 1e-9;
  /// Deltas within this (relative to max(1, |best delta|)) of the best count as ties.
  double tie_tolerance = 1e-9;
  /// Continuous -> discrete arcs are only present when whitelisted unless this is set.
  bool allow_continuous_to_discrete = false;
  /// 0 selects N^2 * 10.
  std::size_t max_iterations = 0;
  FitOptions fit;
};

struct TraceStep {
  Move move;
  double score = 0.0;  // after the move
};

struct SearchTrace {
  double initial_score = 0.0;
  double final_score = 0.0;
  std::size_t iterations = 0;
  std::vector<TraceStep> steps;
};

/// Greedy BIC hill-climbing from the whitelist-only graph over `data`'s columns.
/// Candidate moves whose local fit fails numerically are skipped; a failure on the
/// whitelist-only graph propagates.
std::pair<Dag, SearchTrace> hill_climb(const Dataset& data, const ArcConstraints& constraints = {},
                                       const SearchOptions& options = {});

/// The move hill_climb would take from `dag`, or nullopt at a local optimum.
std::optional<Move> best_move_oracle(const Dataset& data, const Dag& dag, const ArcConstraints& constraints = {},
                                     const SearchOptions& options = {});

/// Every move that satisfies acyclicity and the constraints from `dag`, with its delta.
std::vector<Move> legal_moves(const Dataset& data, const Dag& dag, const ArcConstraints& constraints = {},
                              const SearchOptions& options = {});

/// Graph after applying `move`.
Dag apply_move(const Dag& dag, const Move& move);

}  // namespace clgbn
