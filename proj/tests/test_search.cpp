#include <doctest.h>

#include <cmath>
#include <random>

#include "clgbn/error.hpp"
#include "clgbn/inference.hpp"
#include "clgbn/scorer.hpp"
#include "clgbn/search.hpp"
#include "support.hpp"

using namespace clgbn;
using testing::continuous;

namespace {

Dataset chain(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  std::vector<std::vector<double>> cols(3, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    cols[0][r] = z(rng);
    cols[1][r] = 1.5 * cols[0][r] + z(rng);
    cols[2][r] = -1.2 * cols[1][r] + z(rng);
  }
  return testing::table({continuous("X"), continuous("Y"), continuous("Z")}, cols);
}

/// Three continuous columns with random linear links drawn per dataset.
Dataset random_three(std::mt19937_64& rng, std::size_t n) {
  std::normal_distribution<double> z;
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::bernoulli_distribution link(0.6);
  const double b10 = link(rng) ? coef(rng) : 0.0;
  const double b20 = link(rng) ? coef(rng) : 0.0;
  const double b21 = link(rng) ? coef(rng) : 0.0;
  std::vector<std::vector<double>> cols(3, std::vector<double>(n));
  for (std::size_t r = 0; r < n; ++r) {
    cols[0][r] = z(rng);
    cols[1][r] = b10 * cols[0][r] + z(rng);
    cols[2][r] = b20 * cols[0][r] + b21 * cols[1][r] + z(rng);
  }
  return testing::table({continuous("A"), continuous("B"), continuous("C")}, cols);
}

}  // namespace

TEST_CASE("independent columns give the empty graph") {
  const auto d = testing::noise(10000, {"a", "b", "c", "d"}, 42);
  const auto [g, trace] = hill_climb(d);
  CHECK(g.arcs().empty());
  CHECK(trace.steps.empty());
}

TEST_CASE("a strong chain is recovered up to orientation") {
  const auto d = chain(10000, 7);
  const auto [g, trace] = hill_climb(d);
  CHECK(g.skeleton() == std::set<std::pair<std::string, std::string>>{{"X", "Y"}, {"Y", "Z"}});
}

TEST_CASE("whitelisted arcs are kept on noise, blacklisted ones never appear") {
  const auto d = testing::noise(500, {"A", "B", "C"}, 5);
  ArcConstraints c;
  c.whitelist = {{"A", "B"}};
  const auto [g, trace] = hill_climb(d, c);
  CHECK(g.has_arc({"A", "B"}));

  const auto strong = chain(2000, 8);
  ArcConstraints forbid;
  forbid.blacklist = {{"X", "Y"}, {"Y", "X"}};
  const auto [h, t2] = hill_climb(strong, forbid);
  CHECK_FALSE(h.has_arc({"X", "Y"}));
  CHECK_FALSE(h.has_arc({"Y", "X"}));
  for (const auto& m : legal_moves(strong, Dag(strong.names()), forbid)) {
    CHECK_FALSE(forbid.forbids(m.kind == MoveKind::kReverse ? Arc{m.arc.to, m.arc.from} : m.arc));
  }
}

TEST_CASE("trace is strictly improving, sums to the score gain and respects constraints throughout") {
  const auto truth = testing::growth_network();
  const auto d = simulate(truth, 1000, 2);
  const auto c = default_constraints(d.names());
  const auto [g, trace] = hill_climb(d, c);
  double sum = 0.0;
  Dag state(d.names(), c.whitelist);
  CHECK(trace.initial_score == doctest::Approx(bic_score(state, d)).epsilon(1e-12));
  double previous = trace.initial_score;
  for (const auto& step : trace.steps) {
    CHECK(step.move.delta > 0.0);
    CHECK(step.score > previous);
    previous = step.score;
    sum += step.move.delta;
    state = apply_move(state, step.move);
    for (const auto& a : c.whitelist) CHECK(state.has_arc(a));
    for (const auto& a : state.arcs()) {
      CHECK_FALSE(c.forbids(a));
      const bool cont_to_disc = !d.variable(d.index_of(a.from)).discrete() && d.variable(d.index_of(a.to)).discrete();
      if (cont_to_disc) CHECK(c.requires_arc(a));
    }
  }
  CHECK(state == g);
  CHECK(std::abs(trace.final_score - trace.initial_score - sum) < 1e-6);
  CHECK(trace.final_score == doctest::Approx(bic_score(g, d)).epsilon(1e-12));
  CHECK_FALSE(best_move_oracle(d, g, c).has_value());
}

TEST_CASE("best_move_oracle agrees with a brute-force rescoring of all legal moves") {
  const auto d = chain(10000, 13);
  const std::vector<std::string> nodes = d.names();
  for (const auto& g : testing::all_dags(nodes)) {
    const auto move = best_move_oracle(d, g);
    const double base = testing::dag_bic(d, g);
    double best = -INFINITY;
    std::optional<std::tuple<std::string, std::string, int>> best_key;
    for (const auto& from : nodes) {
      for (const auto& to : nodes) {
        if (from == to) continue;
        for (int kind = 0; kind < 3; ++kind) {
          std::set<Arc> arcs = g.arcs();
          if (kind == 0) {
            if (arcs.contains({from, to}) || arcs.contains({to, from})) continue;
            arcs.insert({from, to});
          } else {
            if (!arcs.contains({from, to})) continue;
            arcs.erase({from, to});
            if (kind == 2) arcs.insert({to, from});
          }
          if (!is_acyclic(nodes, arcs)) continue;
          const double delta = testing::dag_bic(d, Dag(nodes, arcs)) - base;
          const std::tuple<std::string, std::string, int> key{from, to, kind};
          if (!best_key || delta > best + 1e-6 * std::max(1.0, std::abs(best)) ||
              (std::abs(delta - best) <= 1e-6 * std::max(1.0, std::abs(best)) && key < *best_key)) {
            best = delta;
            best_key = key;
          }
        }
      }
    }
    if (best <= 1e-9) {
      CHECK_FALSE(move.has_value());
      continue;
    }
    REQUIRE(move.has_value());
    CHECK(move->arc.from == std::get<0>(*best_key));
    CHECK(move->arc.to == std::get<1>(*best_key));
    CHECK(static_cast<int>(move->kind) == std::get<2>(*best_key));
    CHECK(move->delta == doctest::Approx(best).epsilon(1e-8));
  }
}

TEST_CASE("equal-delta moves are broken by the lowest (from, to, kind)") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> z;
  std::vector<double> p(500), q(500);
  for (std::size_t i = 0; i < 500; ++i) {
    p[i] = z(rng);
    q[i] = p[i] + z(rng);
  }
  const auto d = testing::table({continuous("Q"), continuous("P")}, {q, p});
  const auto move = best_move_oracle(d, Dag({"Q", "P"}));
  REQUIRE(move.has_value());
  CHECK(move->kind == MoveKind::kAdd);
  CHECK(move->arc == Arc{"P", "Q"});
}

TEST_CASE("hill climbing on random 3-node data never beats brute force and is a local optimum") {
  std::mt19937_64 rng(2024);
  std::size_t exact = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = random_three(rng, 300);
    const auto [g, trace] = hill_climb(d);
    double best = -INFINITY;
    for (const auto& h : testing::all_dags(d.names())) best = std::max(best, bic_score(h, d));
    CHECK(best >= trace.final_score - 1e-9 * std::abs(best));
    CHECK_FALSE(best_move_oracle(d, g).has_value());
    exact += std::abs(best - trace.final_score) <= 1e-9 * std::abs(best);
  }
  MESSAGE("hill climbing reached the brute-force optimum on " << exact << "/100 datasets");
}

TEST_CASE("reversals can be disabled") {
  const auto d = chain(2000, 1);
  SearchOptions opts;
  opts.allow_reversals = false;
  for (const auto& m : legal_moves(d, Dag(d.names(), {{"X", "Y"}}), {}, opts)) CHECK(m.kind != MoveKind::kReverse);
  CHECK(to_string(MoveKind::kReverse) == "reverse");
}

TEST_CASE("an unfittable whitelist propagates the error") {
  const auto d = testing::table({continuous("x"), continuous("w"), continuous("y")},
                                {{1, 2, 3, 4, 5}, {2, 4, 6, 8, 10}, {1, 0, 1, 0, 2}});
  ArcConstraints c;
  c.whitelist = {{"x", "y"}, {"w", "y"}};
  CHECK_THROWS_AS(hill_climb(d, c), NumericalError);
}
