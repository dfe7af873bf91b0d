#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "clgbn/dataset.hpp"
#include "clgbn/error.hpp"

using namespace clgbn;

namespace {

std::string header() { return "id,t1,t2,ANB_t1,ANB_t2,treatment,growth\n"; }

LongitudinalTable load(const std::string& text) {
  std::istringstream in(text);
  return load_table(in);
}

std::string error_of(const std::string& text) {
  try {
    load(text);
  } catch (const DataError& e) {
    return e.what();
  }
  return {};
}

LongitudinalTable random_table(std::mt19937_64& rng, std::size_t n, const std::vector<std::string>& features) {
  std::uniform_real_distribution<double> age(6.0, 12.0), gap(0.5, 6.0), value(-50.0, 150.0);
  LongitudinalTable t;
  t.features = features;
  for (std::size_t i = 0; i < n; ++i) {
    Subject s;
    s.id = "s" + std::to_string(i);
    s.t1 = age(rng);
    s.t2 = s.t1 + gap(rng);
    for (std::size_t f = 0; f < features.size(); ++f) {
      s.m1.push_back(value(rng));
      s.m2.push_back(value(rng));
    }
    s.treatment = static_cast<Treatment>(i % 3);
    s.growth = i % 2 ? Growth::kGood : Growth::kBad;
    t.subjects.push_back(s);
  }
  return t;
}

}  // namespace

TEST_CASE("load_table reads a minimal file") {
  const auto t = load(header() + "p1,8,14,4,2,TG,Good\n");
  REQUIRE(t.subjects.size() == 1);
  CHECK(t.features == std::vector<std::string>{"ANB"});
  CHECK(t.subjects[0].id == "p1");
  CHECK(t.subjects[0].treatment == Treatment::kTG);
  CHECK(t.subjects[0].growth == Growth::kGood);
}

TEST_CASE("load_table diagnostics carry the row index") {
  CHECK(error_of(header() + "p1,8,14,4,2,NT,Good\np2,9,9,1,1,NT,Bad\n") == "non-positive ΔT at row 2");
  CHECK(error_of(header() + "p1,8,14,x,2,NT,Good\n").find("row 1") != std::string::npos);
  CHECK(error_of(header() + "p1,8,14,4,2,XX,Good\n").find("unknown treatment level 'XX' at row 1") != std::string::npos);
  CHECK(error_of(header() + "p1,8,14,4,2,NT,Fine\n").find("unknown growth level") != std::string::npos);
  CHECK(error_of("id,t1,ANB_t1,ANB_t2,treatment,growth\np,8,4,2,NT,Good\n") == "missing column 't2'");
  CHECK(error_of(header() + "p1,8,14,4,,NT,Good\n").find("missing value") != std::string::npos);
  CHECK(error_of(header() + "p1,8,14,4,NT,Good\n").find("fields") != std::string::npos);
  CHECK(error_of("id,t1,t2,ANB_t1,treatment,growth\np,8,9,4,NT,Good\n") == "missing column 'ANB_t2'");
  CHECK(error_of("") != "");
  CHECK(error_of(header()) == "no data rows");
}

TEST_CASE("load_table handles a 147-subject, six-feature file") {
  const std::vector<std::string> features{"ANB", "IMPA", "PPPM", "CoA", "GoPg", "CoGo"};
  std::ostringstream text;
  text << "id,t1,t2";
  for (const auto& f : features) text << ',' << f << "_t1," << f << "_t2";
  text << ",treatment,growth\n";
  for (int i = 0; i < 147; ++i) {
    text << "p" << i << ',' << 7 + i % 5 << ',' << 12 + i % 4;
    for (std::size_t f = 0; f < features.size(); ++f) text << ',' << i + f << ',' << i + 2 * f;
    text << ',' << (i % 3 == 0 ? "NT" : i % 3 == 1 ? "TB" : "TG") << ',' << (i % 2 ? "Good" : "Bad") << '\n';
  }
  const auto t = load(text.str());
  CHECK(t.subjects.size() == 147);
  CHECK(t.features == features);
}

TEST_CASE("compute_deltas subtracts measurements and times") {
  const auto t = load(header() + "p1,8,14,4,2,TG,Good\np2,9,10,5,5,NT,Bad\n");
  const auto d = compute_deltas(t);
  CHECK(d.names() == std::vector<std::string>{"dANB", "dT", "Treatment", "Growth"});
  CHECK(d.at(0, 0) == -2.0);
  CHECK(d.at(0, 1) == 6.0);
  CHECK(d.variable(2).levels[static_cast<std::size_t>(d.at(0, 2))] == "treated");
  CHECK(d.variable(2).levels[static_cast<std::size_t>(d.at(1, 2))] == "untreated");
  CHECK(d.variable(3).levels[static_cast<std::size_t>(d.at(0, 3))] == "Good");
  CHECK(d.at(1, 0) == 0.0);
  CHECK(d.at(1, 1) > 0.0);

  const auto d3 = compute_deltas(t, TreatmentCoding::kThreeLevel);
  CHECK(d3.variable(2).levels == std::vector<std::string>{"NT", "TB", "TG"});
  CHECK(d3.variable(2).levels[static_cast<std::size_t>(d3.at(0, 2))] == "TG");
}

TEST_CASE("compute_deltas reconstructs m2 within one rounding step") {
  std::mt19937_64 rng(11);
  const auto t = random_table(rng, 300, {"A", "B", "C"});
  const auto d = compute_deltas(t);
  for (std::size_t r = 0; r < t.subjects.size(); ++r) {
    const auto& s = t.subjects[r];
    for (std::size_t f = 0; f < 3; ++f) {
      // Two roundings, each at most half an ulp at the scale of |m1| + |m2|.
      const double back = s.m1[f] + d.at(r, f);
      const double scale = std::abs(s.m1[f]) + std::abs(s.m2[f]);
      CHECK(std::abs(back - s.m2[f]) <= std::nextafter(scale, INFINITY) - scale);
      CHECK(d.at(r, f) == s.m2[f] - s.m1[f]);
    }
    CHECK(d.at(r, 3) == s.t2 - s.t1);
  }
}

TEST_CASE("atlas lookup interpolates linearly and clamps") {
  ReferenceAtlas atlas({{"ANB", {{9.0, 80.0}, {8.0, 78.0}}}});
  CHECK(atlas.reference("ANB", 8.0) == 78.0);
  CHECK(atlas.reference("ANB", 8.5) == doctest::Approx(79.0).epsilon(1e-15));
  CHECK(atlas.reference("ANB", 5.0) == 78.0);
  CHECK(atlas.reference("ANB", 30.0) == 80.0);
  CHECK_THROWS_AS(ReferenceAtlas({{"ANB", {{8.0, 1.0}, {8.0, 2.0}}}}), DataError);

  LongitudinalTable t;
  t.features = {"ANB"};
  t.subjects.push_back({"p", 8.0, 8.5, {80.0}, {80.0}, Treatment::kNT, Growth::kGood});
  const auto adjusted = adjust_with_atlas(t, atlas);
  CHECK(adjusted.subjects[0].m1[0] == 2.0);
  CHECK(adjusted.subjects[0].m2[0] == doctest::Approx(1.0));
}

TEST_CASE("atlas coverage violation names the feature") {
  ReferenceAtlas atlas({{"ANB", {{8.0, 1.0}}}});
  LongitudinalTable t;
  t.features = {"ANB", "PPPM"};
  t.subjects.push_back({"p", 8.0, 9.0, {1.0, 2.0}, {1.0, 2.0}, Treatment::kNT, Growth::kGood});
  try {
    adjust_with_atlas(t, atlas);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("PPPM") != std::string::npos);
  }
}

TEST_CASE("load_atlas parses feature,age,value rows") {
  std::istringstream in("feature,age,value\nANB,8,78\nANB,9,80\n");
  const auto atlas = load_atlas(in);
  CHECK(atlas.reference("ANB", 8.25) == doctest::Approx(78.5));
  std::istringstream bad("feature,age\nANB,8\n");
  CHECK_THROWS_AS(load_atlas(bad), DataError);
}

TEST_CASE("atlas adjustment commutes with differencing") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> v(-10.0, 10.0);
  std::map<std::string, std::vector<std::pair<double, double>>> entries;
  for (const std::string f : {"A", "B"}) {
    for (double age = 5.0; age <= 20.0; age += 1.5) entries[f].emplace_back(age, v(rng));
  }
  const ReferenceAtlas atlas(entries);
  for (int trial = 0; trial < 20; ++trial) {
    const auto t = random_table(rng, 50, {"A", "B"});
    const auto lhs = compute_deltas(adjust_with_atlas(t, atlas));
    const auto rhs = compute_deltas(t);
    for (std::size_t r = 0; r < t.subjects.size(); ++r) {
      const auto& s = t.subjects[r];
      for (std::size_t f = 0; f < 2; ++f) {
        const auto& name = t.features[f];
        const double expected = rhs.at(r, f) - (atlas.reference(name, s.t2) - atlas.reference(name, s.t1));
        CHECK(lhs.at(r, f) == doctest::Approx(expected).epsilon(1e-12).scale(100.0));
      }
    }
  }
}

TEST_CASE("modeling tables round-trip through delimited text") {
  std::mt19937_64 rng(2);
  const auto d = compute_deltas(random_table(rng, 20, {"A"}));
  std::ostringstream out;
  write_dataset(out, d, ';');
  std::istringstream in(out.str());
  const auto back = read_dataset(in, ';', canonical_level_order(TreatmentCoding::kBinary));
  CHECK(back.names() == d.names());
  for (std::size_t c = 0; c < d.cols(); ++c) {
    CHECK(back.variable(c) == d.variable(c));
    for (std::size_t r = 0; r < d.rows(); ++r) CHECK(back.at(r, c) == d.at(r, c));
  }
}

TEST_CASE("read_dataset rejects missing values and unknown levels") {
  std::istringstream missing("x,Growth\n1,Good\n,Bad\n");
  CHECK_THROWS_AS(read_dataset(missing), DataError);
  std::istringstream level("x,Growth\n1,Good\n2,Meh\n");
  CHECK_THROWS_AS(read_dataset(level, ',', canonical_level_order(TreatmentCoding::kBinary)), DataError);
  std::istringstream ok("x,g\n1,b\n2,a\n");
  const auto d = read_dataset(ok);
  CHECK(d.variable(1).levels == std::vector<std::string>{"a", "b"});
}

TEST_CASE("format_double round-trips") {
  for (const double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
}
