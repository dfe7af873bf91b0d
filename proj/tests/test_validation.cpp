#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "clgbn/corrnet.hpp"
#include "clgbn/error.hpp"
#include "clgbn/inference.hpp"
#include "clgbn/io.hpp"
#include "clgbn/validation.hpp"
#include "support.hpp"

using namespace clgbn;
using testing::continuous;
using testing::discrete;

namespace {

void check_partition(const CvReport& report, std::size_t n) {
  REQUIRE(report.fold_of_row.size() == n);
  std::vector<std::size_t> sizes(report.k, 0);
  for (const auto f : report.fold_of_row) {
    REQUIRE(f < report.k);
    ++sizes[f];
  }
  for (const auto s : sizes) CHECK((s == n / report.k || s == (n + report.k - 1) / report.k));
  std::size_t test_total = 0;
  for (const auto& f : report.folds) {
    CHECK(f.train_rows + f.test_rows == n);
    test_total += f.test_rows;
  }
  CHECK(test_total == n);
}

}  // namespace

TEST_CASE("fold assignment is a balanced seeded partition") {
  for (const std::size_t n : {10, 11, 147, 500}) {
    for (const std::size_t k : {2, 3, 10}) {
      const auto a = assign_folds(n, k, 4);
      CHECK(a == assign_folds(n, k, 4));
      std::vector<std::size_t> sizes(k, 0);
      for (const auto f : a) ++sizes[f];
      for (const auto s : sizes) CHECK((s == n / k || s == (n + k - 1) / k));
    }
  }
  CHECK(assign_folds(100, 10, 1) != assign_folds(100, 10, 2));
  CHECK_THROWS_AS(assign_folds(5, 10, 1), DataError);
  CHECK_THROWS_AS(assign_folds(5, 1, 1), DataError);
}

TEST_CASE("noiseless relation is predicted perfectly, an independent target is not") {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> z;
  std::vector<double> x(200), y(200);
  for (std::size_t i = 0; i < 200; ++i) {
    x[i] = z(rng);
    y[i] = 2.0 * x[i];
  }
  const auto det = testing::table({continuous("X"), continuous("Y")}, {x, y});
  CvOptions opts;
  opts.seed = 3;
  opts.replicates = 20;
  const auto report = cross_validate(det, {}, opts);
  check_partition(report, 200);
  REQUIRE(report.variable("Y").value.has_value());
  CHECK(*report.variable("Y").value > 0.999);

}

TEST_CASE("an independent target is predicted by its training-fold mean") {
  const auto noise = testing::noise(500, {"A", "B", "T"}, 77);
  CvOptions opts;
  opts.seed = 3;
  opts.learner = Learner::kSingle;
  const auto report = cross_validate(noise, {}, opts);
  check_partition(report, 500);
  for (const auto& f : report.folds) REQUIRE(f.arcs.empty());

  const auto t = noise.column(noise.index_of("T"));
  std::vector<double> sum(report.k, 0.0), count(report.k, 0.0);
  double total = 0.0;
  for (std::size_t r = 0; r < 500; ++r) {
    sum[report.fold_of_row[r]] += t[r];
    ++count[report.fold_of_row[r]];
    total += t[r];
  }
  std::vector<double> mean(500), observed(t.begin(), t.end());
  for (std::size_t r = 0; r < 500; ++r) {
    const auto f = report.fold_of_row[r];
    mean[r] = (total - sum[f]) / (500.0 - count[f]);
    CHECK(report.variable("T").predicted[r] == doctest::Approx(mean[r]).epsilon(1e-12));
  }
  const double expected = pearson(observed, mean);
  CHECK(*report.variable("T").value == doctest::Approx(expected).epsilon(1e-9));
  // Training means move against the held-out fold, so the pooled correlation leans negative.
  CHECK(expected < 0.0);
}

TEST_CASE("test rows never influence their own predictions") {
  const auto truth = testing::growth_network();
  auto d = simulate(truth, 200, 5);
  CvOptions opts;
  opts.folds = 5;
  opts.learner = Learner::kSingle;
  opts.seed = 9;
  opts.threads = 1;
  const auto c = default_constraints(d.names());
  const auto base = cross_validate(d, c, opts);

  // Changing a test row's dCoA leaves its dCoA prediction and every prediction for the rest of
  // its fold unchanged.
  const std::size_t row = 17;
  const auto col = d.index_of("dCoA");
  std::vector<std::vector<double>> cols;
  for (std::size_t j = 0; j < d.cols(); ++j) cols.emplace_back(d.column(j).begin(), d.column(j).end());
  cols[col][row] += 25.0;
  const Dataset changed(d.variables(), cols);
  const auto after = cross_validate(changed, c, opts);
  const auto fold = base.fold_of_row[row];
  CHECK(after.fold_of_row == base.fold_of_row);
  CHECK(after.variable("dCoA").predicted[row] == base.variable("dCoA").predicted[row]);
  for (std::size_t r = 0; r < d.rows(); ++r) {
    if (base.fold_of_row[r] != fold || r == row) continue;
    for (const auto& v : base.variables) CHECK(after.variable(v.name).predicted[r] == v.predicted[r]);
  }
}

TEST_CASE("fixed-structure mode and reports") {
  const auto truth = testing::growth_network();
  const auto d = simulate(truth, 300, 8);
  CvOptions opts;
  opts.folds = 4;
  opts.mode = StructureMode::kFixed;
  opts.structure = truth.dag();
  opts.seed = 2;
  const auto report = cross_validate(d, {}, opts);
  check_partition(report, 300);
  for (const auto& f : report.folds) CHECK(std::set<Arc>(f.arcs.begin(), f.arcs.end()) == truth.dag().arcs());
  const auto& growth = report.variable("Growth");
  CHECK(growth.discrete);
  REQUIRE(growth.value.has_value());
  CHECK(*growth.value >= 0.0);
  CHECK(*growth.value <= 1.0);
  CHECK(report.variable("dGoPg").value.value() > 0.5);
  CHECK_THROWS_AS(report.variable("nope"), DataError);

  std::ostringstream a, b;
  write_cv_summary(a, report);
  write_cv_summary(b, cross_validate(d, {}, opts));
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind("variable,type,metric,value\n", 0) == 0);
  CHECK(a.str().find("Growth,discrete,classification_error,") != std::string::npos);
  CHECK(to_json(report).dump() == to_json(cross_validate(d, {}, opts)).dump());
}

TEST_CASE("averaged per-fold runs are reproducible across thread counts") {
  const auto truth = testing::growth_network();
  const auto d = simulate(truth, 200, 31);
  CvOptions opts;
  opts.folds = 3;
  opts.replicates = 8;
  opts.seed = 5;
  opts.threads = 1;
  const auto c = default_constraints(d.names());
  const auto serial = cross_validate(d, c, opts);
  opts.threads = 3;
  CHECK(to_json(serial).dump() == to_json(cross_validate(d, c, opts)).dump());
  for (const auto& f : serial.folds) CHECK(f.threshold.has_value());
}

TEST_CASE("fold failures name the fold") {
  const auto d = testing::table({discrete("g", {"a", "b"}), continuous("y")},
                                {{0, 0, 0, 0, 0, 0, 0, 0, 0, 1}, {1, 2, 3, 4, 5, 6, 7, 8, 9, 10}});
  ArcConstraints c;
  c.whitelist = {{"g", "y"}};
  CvOptions opts;
  opts.folds = 2;
  opts.learner = Learner::kSingle;
  opts.seed = 1;
  try {
    cross_validate(d, c, opts);
    FAIL("expected a fold error");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).rfind("fold ", 0) == 0);
  }
}

TEST_CASE("subgroup networks") {
  // X -> Y only within level A.
  std::mt19937_64 rng(6);
  std::normal_distribution<double> z;
  std::vector<double> g, x, y, w;
  for (int i = 0; i < 2000; ++i) {
    const bool in_a = i < 1000;
    g.push_back(in_a ? 0 : 1);
    x.push_back(z(rng));
    y.push_back((in_a ? 1.5 * x.back() : 0.0) + z(rng));
    w.push_back(z(rng));
  }
  const auto d = testing::table({discrete("grp", {"A", "B"}), continuous("X"), continuous("Y"), continuous("W")},
                                {g, x, y, w});
  BootstrapOptions opts;
  opts.replicates = 30;
  opts.seed = 4;
  const auto groups = subgroup_networks(d, "grp", {}, opts);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].level == "A");
  CHECK(groups[0].rows == 1000);
  CHECK(groups[0].structure.consensus.dag.skeleton().contains({"X", "Y"}));
  CHECK_FALSE(groups[1].structure.consensus.dag.skeleton().contains({"X", "Y"}));
  CHECK(groups[1].structure.consensus.dag.nodes() == std::vector<std::string>{"X", "Y", "W"});

  // A single-level grouping column reproduces the full pipeline without that column.
  std::vector<double> ones(2000, 0.0);
  const auto single = testing::table({discrete("grp", {"only"}), continuous("X"), continuous("Y"), continuous("W")},
                                     {ones, x, y, w});
  ArcConstraints c;
  c.blacklist = {{"grp", "X"}, {"W", "X"}};
  const auto one = subgroup_networks(single, "grp", c, opts);
  REQUIRE(one.size() == 1);
  const auto full = average_structure(single.drop_column("grp"), without_node(c, "grp"), opts);
  CHECK(one[0].structure.consensus.dag == full.consensus.dag);
  CHECK(one[0].structure.strengths.strengths() == full.strengths.strengths());
  CHECK(without_node(c, "grp").blacklist == std::set<Arc>{{"W", "X"}});

  CHECK_THROWS_AS(subgroup_networks(d, "X", {}, opts), DataError);
}
