#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "fixture_path.hpp"
#include "puppy/chamfer.hpp"
#include "puppy/corpus.hpp"
#include "puppy/diagram.hpp"
#include "puppy/error.hpp"
#include "puppy/strategy.hpp"

using namespace puppy;

namespace {

constexpr double kPi = std::numbers::pi;

// Interior angle at vertex i of a counterclockwise polygon, from the raw
// coordinates.
double interior_angle(const Track& t, int i) {
  const Point2 p = to_point(t.exact_vertex(i - 1));
  const Point2 c = to_point(t.exact_vertex(i));
  const Point2 q = to_point(t.exact_vertex(i + 1));
  const Point2 a = c - p;
  const Point2 b = q - c;
  return kPi - std::atan2(cross(a, b), dot(a, b));
}

double degrees(double r) { return r * 180.0 / kPi; }

AttractionDiagram chamfered_diagram(const ChamferMap& m) {
  AttractionDiagram d = build_diagram(m.chamfered);
  classify_cycles(d);
  return d;
}

std::vector<Configuration> nine_starts(const Track& t) {
  std::vector<Configuration> out;
  for (int k = 0; k < 9; ++k) {
    out.push_back({{t.perimeter() * (k + 0.37) / 9.0}, {Feature::Edge, (k * 5) % t.size(), 0.3 + 0.05 * k}});
  }
  return out;
}

void check_angle_formula(const ChamferMap& m) {
  const Track& t = m.original;
  for (int i = 0; i < t.size(); ++i) {
    const double expect = 0.5 * kPi + 0.5 * interior_angle(t, i);
    CHECK(interior_angle(m.chamfered, 2 * i) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(interior_angle(m.chamfered, 2 * i + 1) == doctest::Approx(expect).epsilon(1e-12));
    CHECK(expect > 0.5 * kPi);
    CHECK(abs(m.isosceles_defect(i)) < Rational(1, mpz_class("1000000000000000000000000000000")));
  }
}

}  // namespace

TEST_CASE("triangle chamfers into a hexagon with 120 degree corners") {
  const Track t = fixture("triangle");
  const ChamferMap m = chamfer(t, Rational(1, 5));
  REQUIRE(m.chamfered.size() == 6);
  for (int k = 0; k < 6; ++k) CHECK(degrees(interior_angle(m.chamfered, k)) == doctest::Approx(120.0).epsilon(1e-9));
  check_angle_formula(m);
  // Cut points sit epsilon from the corner.
  for (int i = 0; i < 3; ++i) {
    CHECK(norm(to_point(m.chamfered.exact_vertex(2 * i)) - t.vertex(i)) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(norm(to_point(m.chamfered.exact_vertex(2 * i + 1)) - t.vertex(i)) == doctest::Approx(0.2).epsilon(1e-15));
  }
}

TEST_CASE("rectangle chamfers into an octagon with 135 degree corners, exactly") {
  const Track t = fixture("rectangle");
  const ChamferMap m = chamfer(t, Rational(1, 2));
  REQUIRE(m.chamfered.size() == 8);
  for (int k = 0; k < 8; ++k) CHECK(degrees(interior_angle(m.chamfered, k)) == doctest::Approx(135.0).epsilon(1e-12));
  for (int i = 0; i < 4; ++i) CHECK(m.isosceles_defect(i) == 0);
  CHECK(m.chamfered.exact_vertex(0) == RPoint{Rational(0), Rational(1, 2)});
  CHECK(m.chamfered.exact_vertex(1) == RPoint{Rational(1, 2), Rational(0)});
  CHECK(m.chamfered.exact_vertex(2) == RPoint{Rational(11, 2), Rational(0)});
  CHECK(m.chamfered.exact_vertex(6) == RPoint{Rational(1, 2), Rational(4)});
  CHECK(m.chamfered.exact_vertex(7) == RPoint{Rational(0), Rational(7, 2)});
}

TEST_CASE("epsilon bound on the notched fixture") {
  const Track t = fixture("notched");
  CHECK_THROWS_AS(chamfer(t, parse_decimal("0.3")), EpsilonTooLarge);
  CHECK_THROWS_AS(chamfer(t, parse_decimal("0.25")), EpsilonTooLarge);  // strict
  CHECK_THROWS_AS(chamfer(t, Rational(0)), EpsilonTooLarge);
  CHECK_NOTHROW(chamfer(t, parse_decimal("0.2")));
}

TEST_CASE("angle formula and no forbidden degeneracy after selection") {
  std::vector<Track> tracks;
  for (const char* name : {"triangle", "rectangle", "notched", "quad", "pentagon", "pocket", "staircase", "star"}) {
    tracks.push_back(fixture(name));
  }
  std::mt19937_64 rng(corpus_seed());
  for (int k = 0; k < 8; ++k) tracks.push_back(random_degenerate_polygon(rng));
  for (const Track& t : tracks) {
    CAPTURE(t.name());
    const EpsilonSelection sel = select_epsilon(t);
    CHECK(sel.attempts >= 1);
    CHECK(sel.attempts <= 64);
    CHECK(sel.map.chamfered.size() == 2 * t.size());
    CHECK(sel.map.eps() < 0.5 * min_feature_distance(t));
    CHECK(sel.map.eps() < 0.5 * min_edge_length(t));
    check_angle_formula(sel.map);
    for (const Degeneracy& d : detect_degeneracies(sel.map.chamfered)) CHECK_FALSE(is_forbidden(d.type));
    if (t.is_orthogonal()) {
      for (int i = 0; i < t.size(); ++i) CHECK(sel.map.isosceles_defect(i) == 0);
    }
  }
}

TEST_CASE("triangle needs no retry and its chamfer has no type 1 corner") {
  const EpsilonSelection sel = select_epsilon(fixture("triangle"));
  CHECK(sel.attempts == 1);
  CHECK(sel.rejected.empty());
  for (int k = 0; k < 6; ++k) CHECK(sel.map.chamfered.corner_dot_sign(k) > 0);
  // T5 is already non-degenerate; selection still yields a usable map.
  const EpsilonSelection p = select_epsilon(fixture("pentagon"));
  CHECK_NOTHROW(chamfered_diagram(p.map));
}

TEST_CASE("edgy parameters coincide exactly on both tracks") {
  const Track t = fixture("pocket");
  const ChamferMap m = select_epsilon(t).map;
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> edge(0, t.size() - 1);
  std::uniform_int_distribution<long> num(1, 999999);
  int checked = 0;
  while (checked < 1000) {
    const int i = edge(rng);
    Rational f(num(rng), 1000000);
    f.canonicalize();
    const RPoint p = t.exact_vertex(i) + f * t.exact_edge(i);
    if (dot(p - t.exact_vertex(i), p - t.exact_vertex(i)) <= m.epsilon * m.epsilon) continue;
    if (dot(p - t.exact_vertex(i + 1), p - t.exact_vertex(i + 1)) <= m.epsilon * m.epsilon) continue;
    const Rational g = m.chamfered_fraction(i, f);
    REQUIRE(g > 0);
    REQUIRE(g < 1);
    const RPoint q = m.chamfered.exact_vertex(2 * i + 1) + g * m.chamfered.exact_edge(2 * i + 1);
    REQUIRE(p == q);

    const double s = t.edge_start(i) + f.get_d() * t.edge_length(i);
    REQUIRE(classify_param(m, {s}) == ParamKind::Edgy);
    const double s_hat = m.to_chamfered(s);
    CHECK(norm(t.human_position(s) - m.chamfered.human_position(s_hat)) < 1e-12 * t.perimeter());
    CHECK(m.to_original(s_hat) == doctest::Approx(s).epsilon(1e-12));
    ++checked;
  }
}

TEST_CASE("edgy and verty classification with a closed tie") {
  const ChamferMap m = chamfer(fixture("rectangle"), Rational(1, 2));
  CHECK(classify_param(m, {3.0}) == ParamKind::Edgy);
  CHECK(classify_param(m, {0.2}) == ParamKind::Verty);
  CHECK(classify_param(m, {0.5}) == ParamKind::Verty);
  CHECK(classify_param(m, {5.5}) == ParamKind::Verty);
  CHECK(classify_param(m, {0.5000001}) == ParamKind::Edgy);
  CHECK(classify_param(m, {19.8}) == ParamKind::Verty);
}

TEST_CASE("pulled-back strategies capture on triangle and rectangle") {
  for (const char* name : {"triangle", "rectangle"}) {
    CAPTURE(name);
    const Track t = fixture(name);
    const ChamferMap m = select_epsilon(t).map;
    const AttractionDiagram d = chamfered_diagram(m);
    const StrategyGraph g = build_strategy_graph(d);
    for (const Configuration& c : nine_starts(t)) {
      CAPTURE(format_configuration(c));
      const PullbackReport r = chamfered_strategy(m, d, g, c);
      CHECK(r.captured);
      // Independent replay of the returned script.
      CHECK(simulate(t, r.script).captured);
      CHECK(dense_oracle(t, r.script, 4000.0).captured);
      if (t.is_orthogonal()) CHECK(simulate(t, orthogonal_strategy(t, c).script).captured);
    }
  }
}

TEST_CASE("pull-back across degenerate corpus polygons") {
  std::mt19937_64 rng(corpus_seed() + 1);
  int total = 0, captured = 0;
  for (int k = 0; k < 6; ++k) {
    const Track t = random_degenerate_polygon(rng);
    const ChamferMap m = select_epsilon(t).map;
    const AttractionDiagram d = chamfered_diagram(m);
    const StrategyGraph g = build_strategy_graph(d);
    for (const Configuration& c : nine_starts(t)) {
      ++total;
      captured += chamfered_strategy(m, d, g, c).captured ? 1 : 0;
    }
  }
  CHECK(captured == total);
}

TEST_CASE("final start pulls back to an empty script") {
  const Track t = fixture("triangle");
  const ChamferMap m = select_epsilon(t).map;
  const AttractionDiagram d = chamfered_diagram(m);
  const StrategyGraph g = build_strategy_graph(d);
  const Configuration c{{3.0}, {Feature::Edge, 1, 0.5}};
  REQUIRE(classify(t, c) == ConfigClass::Final);
  const PullbackReport r = chamfered_strategy(m, d, g, c);
  CHECK(r.captured);
  CHECK(r.script.legs.empty());
}

TEST_CASE("a truncated chamfered strategy fails to pull back") {
  const Track t = fixture("rectangle");
  const ChamferMap m = select_epsilon(t).map;
  const AttractionDiagram d = chamfered_diagram(m);
  const StrategyGraph g = build_strategy_graph(d);
  bool tried = false;
  for (const Configuration& c : nine_starts(t)) {
    const EdgyStart es = reach_edgy(m, c);
    if (es.captured) continue;
    Strategy s = find_strategy(d, g, es.chamfered);
    if (s.initial_run && s.initial_run->captured) continue;
    if (s.steps.empty()) continue;
    s.steps.clear();  // stand still
    tried = true;
    CHECK_THROWS_AS(pull_back(m, s, c), PullbackFailed);
    break;
  }
  CHECK(tried);
}

TEST_CASE("chamfer export is exact and reloads") {
  const Track t = fixture("notched");
  const ChamferMap m = select_epsilon(t).map;
  const nlohmann::json a = chamfer_map_to_json(m);
  const nlohmann::json b = chamfer_map_to_json(select_epsilon(t).map);
  CHECK(a.dump() == b.dump());
  CHECK(a["format"] == "puppychamfer v1");
  CHECK(a["vertices"].size() == 8);
  CHECK(a["correspondence"].size() == 16);
  CHECK(parse_decimal("0.0625") == m.epsilon);
  CHECK(a["vertices"][3]["v_prime"][0].get<std::string>() == to_string(m.chamfered.exact_vertex(6).x));
  const Track back = load_track(dump_track(m.chamfered));
  CHECK(back.exact_vertices() == m.chamfered.exact_vertices());
}
