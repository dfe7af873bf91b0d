#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "clgbn/dataset.hpp"
#include "clgbn/graph.hpp"
#include "clgbn/search.hpp"

namespace clgbn {

struct BootstrapOptions {
  std::size_t replicates = 200;
  std::uint64_t seed = 0;
  std::size_t threads = 0;  // 0 = hardware concurrency
  SearchOptions search;
};

struct BootstrapResult {
  std::vector<Dag> dags;              // successful replicates, in replicate order
  std::vector<std::size_t> replicate; // replicate index of each entry of `dags`
  std::vector<std::string> warnings;  // one per failed replicate
  std::size_t requested = 0;
};

/// Learns one DAG per bootstrap resample (n rows drawn with replacement). Replicate r uses
/// substream(seed, r), so results do not depend on the thread count. Failed replicates are
/// skipped with a warning.
BootstrapResult bootstrap_dags(const Dataset& data, const ArcConstraints& constraints = {},
                               const BootstrapOptions& options = {});

/// Rows of the bootstrap resample for replicate `index`.
std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t index);

struct PairStrength {
  std::string a;  // a < b
  std::string b;
  double strength = 0.0;     // fraction of DAGs with a and b adjacent
  double forward = 0.0;      // P(a -> b | adjacent); 0 when never adjacent
  double backward = 0.0;     // P(b -> a | adjacent)
};

class ArcStrengthTable {
 public:
  ArcStrengthTable(std::vector<std::string> nodes, std::vector<PairStrength> pairs, std::size_t replicates);

  /// Node order of the first input DAG.
  const std::vector<std::string>& nodes() const { return nodes_; }
  /// One entry per unordered node pair, sorted by (a, b).
  const std::vector<PairStrength>& pairs() const { return pairs_; }
  std::size_t replicates() const { return replicates_; }

  double strength(const std::string& x, const std::string& y) const;
  /// P(from -> to | adjacent); 0 when the pair was never adjacent.
  double direction(const std::string& from, const std::string& to) const;
  /// Skeleton strength of every unordered pair, in pairs() order.
  std::vector<double> strengths() const;

 private:
  const PairStrength& find(const std::string& x, const std::string& y) const;

  std::vector<std::string> nodes_;
  std::vector<PairStrength> pairs_;
  std::size_t replicates_ = 0;
};

/// Throws GraphError on an empty list or mismatched node sets.
ArcStrengthTable arc_strengths(std::span<const Dag> dags);

/// L1 fit of the empirical CDF of `strengths` to a step at 1 with mass 1 - p(t) at 0;
/// returns the minimizing observed strength (ties to the smallest). Throws on empty input.
double estimate_threshold(std::span<const double> strengths);
double estimate_threshold(const ArcStrengthTable& table);

/// Objective minimized by estimate_threshold for a candidate split t.
double threshold_objective(std::span<const double> strengths, double t);

struct ConsensusResult {
  Dag dag;
  std::vector<Arc> dropped;  // arcs removed to break cycles, in removal order
};

/// Pairs with strength >= threshold (and > 0), oriented by majority direction (a 50/50 tie goes
/// from the smaller name), plus the whitelist. Cycles are broken by dropping the weakest
/// non-whitelisted arc of a cycle (ties: the largest arc in name order) until acyclic.
ConsensusResult consensus(const ArcStrengthTable& table, double threshold, const ArcConstraints& constraints = {});

/// Delimited text with header from,to,strength,direction: both orientations of every pair with
/// strength > 0, sorted by (from, to).
void write_strengths(std::ostream& out, const ArcStrengthTable& table, char delimiter = ',');

/// Per-arc strengths of a consensus graph (skeleton strength of each arc's pair).
std::map<Arc, double> arc_strength_map(const ArcStrengthTable& table, const Dag& dag);

struct AveragedStructure {
  BootstrapResult bootstrap;
  ArcStrengthTable strengths;
  double threshold = 0.0;
  bool estimated = false;  // threshold came from estimate_threshold
  ConsensusResult consensus;
};

/// bootstrap_dags -> arc_strengths -> threshold (estimated when `threshold` is empty) -> consensus.
AveragedStructure average_structure(const Dataset& data, const ArcConstraints& constraints,
                                    const BootstrapOptions& options, std::optional<double> threshold = std::nullopt);

}  // namespace clgbn
