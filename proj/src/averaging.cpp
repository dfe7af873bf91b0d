#include "clgbn/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <random>

#include "clgbn/error.hpp"
#include "clgbn/random.hpp"

namespace clgbn {

std::vector<std::size_t> bootstrap_rows(std::size_t n, std::uint64_t seed, std::size_t index) {
  auto rng = substream(seed, index);
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  std::vector<std::size_t> rows(n);
  for (auto& r : rows) r = pick(rng);
  return rows;
}

BootstrapResult bootstrap_dags(const Dataset& data, const ArcConstraints& constraints,
                               const BootstrapOptions& options) {
  if (options.replicates < 1) throw DataError("at least one bootstrap replicate is required");
  if (data.rows() < 2) throw DataError("bootstrap needs at least 2 rows");
  constraints.validate(data.names());

  std::vector<std::optional<Dag>> dags(options.replicates);
  std::vector<std::string> errors(options.replicates);
  parallel_for(options.replicates, options.threads, [&](std::size_t r) {
    const auto rows = bootstrap_rows(data.rows(), options.seed, r);
    const auto sample = data.select_rows(rows);
    try {
      dags[r] = hill_climb(sample, constraints, options.search).first;
    } catch (const NumericalError& e) {
      errors[r] = e.what();
    }
  });

  BootstrapResult out;
  out.requested = options.replicates;
  for (std::size_t r = 0; r < options.replicates; ++r) {
    if (dags[r]) {
      out.dags.push_back(std::move(*dags[r]));
      out.replicate.push_back(r);
    } else {
      out.warnings.push_back("bootstrap replicate " + std::to_string(r) + " skipped: " + errors[r]);
    }
  }
  if (out.dags.empty()) throw NumericalError("every bootstrap replicate failed");
  return out;
}

// ---------------------------------------------------------------- strengths

ArcStrengthTable::ArcStrengthTable(std::vector<std::string> nodes, std::vector<PairStrength> pairs,
                                   std::size_t replicates)
    : nodes_(std::move(nodes)), pairs_(std::move(pairs)), replicates_(replicates) {
  for (auto& p : pairs_) {
    if (p.b < p.a) {
      std::swap(p.a, p.b);
      std::swap(p.forward, p.backward);
    }
  }
  std::sort(pairs_.begin(), pairs_.end(), [](const auto& x, const auto& y) { return std::tie(x.a, x.b) < std::tie(y.a, y.b); });
}

const PairStrength& ArcStrengthTable::find(const std::string& x, const std::string& y) const {
  const auto& [a, b] = std::minmax(x, y);
  const auto it = std::lower_bound(pairs_.begin(), pairs_.end(), std::tie(a, b),
                                   [](const PairStrength& p, const auto& key) { return std::tie(p.a, p.b) < key; });
  if (it == pairs_.end() || it->a != a || it->b != b) throw GraphError("unknown node pair " + x + " - " + y);
  return *it;
}

double ArcStrengthTable::strength(const std::string& x, const std::string& y) const { return find(x, y).strength; }

double ArcStrengthTable::direction(const std::string& from, const std::string& to) const {
  const auto& p = find(from, to);
  if (p.strength == 0.0) return 0.0;
  return from == p.a ? p.forward : p.backward;
}

std::vector<double> ArcStrengthTable::strengths() const {
  std::vector<double> out;
  out.reserve(pairs_.size());
  for (const auto& p : pairs_) out.push_back(p.strength);
  return out;
}

ArcStrengthTable arc_strengths(std::span<const Dag> dags) {
  if (dags.empty()) throw GraphError("arc strengths need at least one DAG");
  const auto nodes = dags.front().nodes();
  auto sorted = nodes;
  std::sort(sorted.begin(), sorted.end());
  for (const auto& d : dags) {
    auto other = d.nodes();
    std::sort(other.begin(), other.end());
    if (other != sorted) throw GraphError("DAGs have different node sets");
  }
  std::map<std::pair<std::string, std::string>, std::pair<std::size_t, std::size_t>> counts;  // (adjacent, a->b)
  for (const auto& d : dags) {
    for (const auto& arc : d.arcs()) {
      const bool forward = arc.from < arc.to;
      auto& c = counts[std::minmax(arc.from, arc.to)];
      ++c.first;
      if (forward) ++c.second;
    }
  }
  const auto b = static_cast<double>(dags.size());
  std::vector<PairStrength> pairs;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const auto& [lo, hi] = std::minmax(nodes[i], nodes[j]);
      PairStrength p{lo, hi, 0.0, 0.0, 0.0};
      if (const auto it = counts.find({lo, hi}); it != counts.end()) {
        p.strength = static_cast<double>(it->second.first) / b;
        const auto adjacent = static_cast<double>(it->second.first);
        p.forward = static_cast<double>(it->second.second) / adjacent;
        p.backward = static_cast<double>(it->second.first - it->second.second) / adjacent;
      }
      pairs.push_back(std::move(p));
    }
  }
  return ArcStrengthTable(nodes, std::move(pairs), dags.size());
}

// ---------------------------------------------------------------- threshold

double threshold_objective(std::span<const double> strengths, double t) {
  std::vector<double> s(strengths.begin(), strengths.end());
  std::sort(s.begin(), s.end());
  const auto m = static_cast<double>(s.size());
  const double kept = static_cast<double>(s.end() - std::lower_bound(s.begin(), s.end(), t));
  const double level = 1.0 - kept / m;  // ideal CDF on [0, 1)

  // Integrate |F - level| over [0, 1]; F is constant between consecutive knots.
  double total = 0.0;
  double left = 0.0;
  std::size_t below = 0;  // strengths <= left
  while (below < s.size() && s[below] <= left) ++below;
  while (left < 1.0) {
    const double right = below < s.size() ? std::min(s[below], 1.0) : 1.0;
    total += (right - left) * std::abs(static_cast<double>(below) / m - level);
    left = right;
    while (below < s.size() && s[below] <= left) ++below;
    if (right == 1.0) break;
  }
  return total;
}

double estimate_threshold(std::span<const double> strengths) {
  if (strengths.empty()) throw GraphError("threshold estimation needs at least one strength");
  std::vector<double> candidates(strengths.begin(), strengths.end());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  double best_t = candidates.front();
  double best = threshold_objective(strengths, best_t);
  for (const double t : candidates) {
    const double obj = threshold_objective(strengths, t);
    if (obj < best - 1e-12) {
      best = obj;
      best_t = t;
    }
  }
  return best_t;
}

double estimate_threshold(const ArcStrengthTable& table) {
  const auto s = table.strengths();
  return estimate_threshold(s);
}

// ---------------------------------------------------------------- consensus

ConsensusResult consensus(const ArcStrengthTable& table, double threshold, const ArcConstraints& constraints) {
  std::set<Arc> arcs;
  std::map<Arc, double> weight;
  for (const auto& p : table.pairs()) {
    const Arc ab{p.a, p.b};
    const Arc ba{p.b, p.a};
    if (constraints.requires_arc(ab) || constraints.requires_arc(ba)) continue;
    if (!(p.strength > 0.0) || p.strength < threshold) continue;
    Arc arc = p.forward >= p.backward ? ab : ba;
    if (constraints.forbids(arc)) {
      const Arc flipped{arc.to, arc.from};
      if (constraints.forbids(flipped)) continue;
      arc = flipped;
    }
    arcs.insert(arc);
    weight[arc] = p.strength;
  }
  for (const auto& a : constraints.whitelist) arcs.insert(a);

  ConsensusResult out;
  const auto& nodes = table.nodes();
  while (const auto cycle = find_cycle(nodes, arcs)) {
    std::optional<Arc> weakest;
    for (const auto& a : *cycle) {
      if (constraints.requires_arc(a)) continue;
      if (!weakest || weight[a] < weight[*weakest] || (weight[a] == weight[*weakest] && *weakest < a)) weakest = a;
    }
    if (!weakest) throw GraphError("whitelist contains a cycle");
    arcs.erase(*weakest);
    out.dropped.push_back(*weakest);
  }
  out.dag = Dag(nodes, std::move(arcs));
  return out;
}

void write_strengths(std::ostream& out, const ArcStrengthTable& table, char delimiter) {
  struct Line {
    std::string from, to;
    double strength, direction;
  };
  std::vector<Line> lines;
  for (const auto& p : table.pairs()) {
    if (!(p.strength > 0.0)) continue;
    lines.push_back({p.a, p.b, p.strength, p.forward});
    lines.push_back({p.b, p.a, p.strength, p.backward});
  }
  std::sort(lines.begin(), lines.end(), [](const Line& x, const Line& y) { return std::tie(x.from, x.to) < std::tie(y.from, y.to); });
  out << "from" << delimiter << "to" << delimiter << "strength" << delimiter << "direction\n";
  for (const auto& l : lines) {
    out << l.from << delimiter << l.to << delimiter << format_double(l.strength) << delimiter
        << format_double(l.direction) << '\n';
  }
}

std::map<Arc, double> arc_strength_map(const ArcStrengthTable& table, const Dag& dag) {
  std::map<Arc, double> out;
  for (const auto& a : dag.arcs()) out[a] = table.strength(a.from, a.to);
  return out;
}

AveragedStructure average_structure(const Dataset& data, const ArcConstraints& constraints,
                                    const BootstrapOptions& options, std::optional<double> threshold) {
  auto boot = bootstrap_dags(data, constraints, options);
  auto table = arc_strengths(boot.dags);
  const double t = threshold ? *threshold : estimate_threshold(table);
  auto cons = consensus(table, t, constraints);
  return {std::move(boot), std::move(table), t, !threshold.has_value(), std::move(cons)};
}

}  // namespace clgbn
