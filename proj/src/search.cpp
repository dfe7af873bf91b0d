#include "clgbn/search.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "clgbn/error.hpp"
#include "clgbn/scorer.hpp"

namespace clgbn {

std::string to_string(MoveKind kind) {
  switch (kind) {
    case MoveKind::kAdd: return "add";
    case MoveKind::kDelete: return "delete";
    case MoveKind::kReverse: return "reverse";
  }
  return "?";
}

Dag apply_move(const Dag& dag, const Move& move) {
  switch (move.kind) {
    case MoveKind::kAdd: return dag.with_arc(move.arc);
    case MoveKind::kDelete: return dag.without_arc(move.arc);
    case MoveKind::kReverse: return dag.without_arc(move.arc).with_arc({move.arc.to, move.arc.from});
  }
  return dag;
}

namespace {

class Searcher {
 public:
  Searcher(const Dataset& data, const ArcConstraints& constraints, const SearchOptions& options)
      : data_(data), options_(options), scorer_(data, options.fit), names_(data.names()), n_(names_.size()) {
    constraints.validate(names_);
    white_.assign(n_ * n_, false);
    black_.assign(n_ * n_, false);
    for (const auto& a : constraints.whitelist) white_[pair(data.index_of(a.from), data.index_of(a.to))] = true;
    for (const auto& a : constraints.blacklist) black_[pair(data.index_of(a.from), data.index_of(a.to))] = true;
    parents_.assign(n_, 0);
  }

  void set_graph(const Dag& dag) {
    std::fill(parents_.begin(), parents_.end(), ParentMask{0});
    for (const auto& a : dag.arcs()) parents_[data_.index_of(a.to)] |= bit(data_.index_of(a.from));
    current_.resize(n_);
    for (std::size_t v = 0; v < n_; ++v) current_[v] = scorer_.local_score(v, parents_[v]);
  }

  Dag graph() const {
    std::set<Arc> arcs;
    for (std::size_t v = 0; v < n_; ++v) {
      for (std::size_t u = 0; u < n_; ++u) {
        if (parents_[v] & bit(u)) arcs.insert({names_[u], names_[v]});
      }
    }
    return Dag(names_, std::move(arcs));
  }

  double score() const {
    double s = 0.0;
    for (const double x : current_) s += x;
    return s;
  }

  std::vector<Move> moves() {
    std::vector<Move> out;
    for (std::size_t u = 0; u < n_; ++u) {
      for (std::size_t v = 0; v < n_; ++v) {
        if (u == v) continue;
        const bool present = parents_[v] & bit(u);
        if (!present) {
          if (parents_[u] & bit(v)) continue;  // covered by reversing v -> u
          if (!can_add(u, v) || reaches(v, u, n_, n_)) continue;
          try_move(out, MoveKind::kAdd, u, v, [&] {
            return scorer_.local_score(v, parents_[v] | bit(u)) - current_[v];
          });
          continue;
        }
        if (white_[pair(u, v)]) continue;
        try_move(out, MoveKind::kDelete, u, v, [&] {
          return scorer_.local_score(v, parents_[v] & ~bit(u)) - current_[v];
        });
        if (!options_.allow_reversals || !can_add(v, u) || reaches(u, v, u, v)) continue;
        try_move(out, MoveKind::kReverse, u, v, [&] {
          return (scorer_.local_score(v, parents_[v] & ~bit(u)) - current_[v]) +
                 (scorer_.local_score(u, parents_[u] | bit(v)) - current_[u]);
        });
      }
    }
    return out;
  }

  std::optional<Move> best_move() {
    const auto all = moves();
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& m : all) best = std::max(best, m.delta);
    if (!(best > options_.min_improvement)) return std::nullopt;
    const double slack = std::isinf(best) ? 0.0 : options_.tie_tolerance * std::max(1.0, std::abs(best));
    std::optional<Move> chosen;
    for (const auto& m : all) {
      if (!(m.delta >= best - slack)) continue;
      if (!chosen || std::tie(m.arc.from, m.arc.to, m.kind) < std::tie(chosen->arc.from, chosen->arc.to, chosen->kind)) {
        chosen = m;
      }
    }
    return chosen;
  }

  void apply(const Move& m) {
    const auto u = data_.index_of(m.arc.from);
    const auto v = data_.index_of(m.arc.to);
    switch (m.kind) {
      case MoveKind::kAdd: parents_[v] |= bit(u); break;
      case MoveKind::kDelete: parents_[v] &= ~bit(u); break;
      case MoveKind::kReverse:
        parents_[v] &= ~bit(u);
        parents_[u] |= bit(v);
        current_[u] = scorer_.local_score(u, parents_[u]);
        break;
    }
    current_[v] = scorer_.local_score(v, parents_[v]);
  }

  std::size_t size() const { return n_; }

 private:
  static ParentMask bit(std::size_t i) { return ParentMask{1} << i; }
  std::size_t pair(std::size_t u, std::size_t v) const { return u * n_ + v; }

  bool can_add(std::size_t u, std::size_t v) const {
    if (black_[pair(u, v)]) return false;
    if (!options_.allow_continuous_to_discrete && !white_[pair(u, v)] && !data_.variable(u).discrete() &&
        data_.variable(v).discrete()) {
      return false;
    }
    return true;
  }

  // Directed path from `from` to `to`, ignoring the arc skip_u -> skip_v.
  bool reaches(std::size_t from, std::size_t to, std::size_t skip_u, std::size_t skip_v) const {
    std::vector<bool> seen(n_, false);
    std::vector<std::size_t> stack{from};
    seen[from] = true;
    while (!stack.empty()) {
      const auto x = stack.back();
      stack.pop_back();
      if (x == to) return true;
      for (std::size_t y = 0; y < n_; ++y) {
        if (seen[y] || !(parents_[y] & bit(x)) || (x == skip_u && y == skip_v)) continue;
        seen[y] = true;
        stack.push_back(y);
      }
    }
    return false;
  }

  template <typename F>
  void try_move(std::vector<Move>& out, MoveKind kind, std::size_t u, std::size_t v, F delta) {
    try {
      const double d = delta();
      if (!std::isnan(d)) out.push_back({kind, {names_[u], names_[v]}, d});
    } catch (const NumericalError&) {
      // The candidate parent set cannot be fitted; the move is not legal.
    }
  }

  const Dataset& data_;
  SearchOptions options_;
  BicScorer scorer_;
  std::vector<std::string> names_;
  std::size_t n_;
  std::vector<bool> white_, black_;
  std::vector<ParentMask> parents_;
  std::vector<double> current_;
};

Dag whitelist_graph(const Dataset& data, const ArcConstraints& constraints) {
  return Dag(data.names(), constraints.whitelist);
}

}  // namespace

std::pair<Dag, SearchTrace> hill_climb(const Dataset& data, const ArcConstraints& constraints,
                                       const SearchOptions& options) {
  Searcher s(data, constraints, options);
  s.set_graph(whitelist_graph(data, constraints));
  SearchTrace trace;
  trace.initial_score = s.score();
  const std::size_t cap = options.max_iterations ? options.max_iterations : s.size() * s.size() * 10;
  while (auto move = s.best_move()) {
    if (trace.iterations == cap) throw Error("hill-climbing exceeded its iteration cap of " + std::to_string(cap));
    s.apply(*move);
    ++trace.iterations;
    trace.steps.push_back({*move, s.score()});
  }
  trace.final_score = s.score();
  return {s.graph(), std::move(trace)};
}

std::optional<Move> best_move_oracle(const Dataset& data, const Dag& dag, const ArcConstraints& constraints,
                                     const SearchOptions& options) {
  Searcher s(data, constraints, options);
  s.set_graph(dag);
  return s.best_move();
}

std::vector<Move> legal_moves(const Dataset& data, const Dag& dag, const ArcConstraints& constraints,
                              const SearchOptions& options) {
  Searcher s(data, constraints, options);
  s.set_graph(dag);
  return s.moves();
}

}  // namespace clgbn
