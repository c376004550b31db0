#include <doctest.h>

#include <cmath>
#include <numbers>

#include "fixture_path.hpp"
#include "puppy/error.hpp"
#include "puppy/track.hpp"

using namespace puppy;

namespace {

// Signed dot product (h - p) . theta for an explicit parameter, recomputed
// from scratch so it does not share code with classify.
double raw_dot(const Track& t, double s, double ycoord) {
  const Point2 h = t.human_position(s);
  const PuppyParam y = t.puppy_param_at(ycoord);
  return dot(h - puppy_position(t, y), puppy_direction(t, y));
}

}  // namespace

TEST_CASE("rectangle loads with perimeter 20") {
  const Track t = fixture("rectangle");
  CHECK(t.size() == 4);
  CHECK(t.perimeter() == doctest::Approx(20.0));
  CHECK_FALSE(t.reversed_on_load());
}

TEST_CASE("clockwise input is reversed to counterclockwise") {
  const Track t = load_track(
      R"({"format":"puppytrack v1","vertices":[["0","4"],["6","4"],["6","0"],["0","0"]]})");
  CHECK(t.reversed_on_load());
  CHECK(t.exact_signed_area2() == 48);  // twice the area 24
}

TEST_CASE("bow-tie is rejected as not simple") {
  CHECK_THROWS_AS(fixture("bowtie"), NotSimple);
}

TEST_CASE("loader errors") {
  CHECK_THROWS_AS(load_track("{"), ParseError);
  CHECK_THROWS_AS(load_track(R"({"format":"puppytrack v2","vertices":[]})"), ParseError);
  CHECK_THROWS_AS(load_track(R"({"format":"puppytrack v1","vertices":[["0","0"],["1","0"]]})"),
                  DegenerateGeometry);
  CHECK_THROWS_AS(
      load_track(R"({"format":"puppytrack v1","vertices":[["0","0"],["1","0"],["1","0"],["0","1"]]})"),
      DegenerateGeometry);
  CHECK_THROWS_AS(
      load_track(R"({"format":"puppytrack v1","vertices":[["0","0"],["1","0"],["2","0"],["0","1"]]})"),
      DegenerateGeometry);
  CHECK_THROWS_AS(load_track(R"({"format":"puppytrack v1","vertices":[["0","0"],["1x","0"],["0","1"]]})"),
                  ParseError);
}

TEST_CASE("dump and reload round-trips exact coordinates") {
  const Track t = fixture("pentagon");
  const Track u = load_track(dump_track(t));
  REQUIRE(u.size() == t.size());
  for (int i = 0; i < t.size(); ++i) CHECK(u.exact_vertex(i) == t.exact_vertex(i));
}

TEST_CASE("puppy position and direction on the rectangle") {
  const Track t = fixture("rectangle");
  Point2 p = puppy_position(t, {Feature::Edge, 0, 0.5});
  CHECK(p.x == doctest::Approx(3.0));
  CHECK(p.y == doctest::Approx(0.0));
  p = puppy_position(t, {Feature::Vertex, 1, 0.7});
  CHECK(p.x == doctest::Approx(6.0));
  CHECK(p.y == doctest::Approx(0.0));
  Point2 d = puppy_direction(t, {Feature::Edge, 0, 0.3});
  CHECK(d.x == doctest::Approx(1.0));
  CHECK(d.y == doctest::Approx(0.0));
  d = puppy_direction(t, {Feature::Vertex, 1, 0.5});
  CHECK(d.x == doctest::Approx(std::sqrt(2.0) / 2));
  CHECK(d.y == doctest::Approx(std::sqrt(2.0) / 2));
}

TEST_CASE("pentagon position agrees with the arc-length walker") {
  const Track t = fixture("pentagon");
  const Point2 a = puppy_position(t, {Feature::Edge, 2, 0.25});
  const Point2 b = t.human_position(t.edge_start(2) + 0.25 * t.edge_length(2));
  const Point2 affine = t.vertex(2) + 0.25 * (t.vertex(3) - t.vertex(2));
  CHECK(norm(a - b) < 1e-12);
  CHECK(norm(a - affine) < 1e-12);
  for (int k = 0; k < t.size(); ++k) {
    const Point2 d0 = puppy_direction(t, {Feature::Vertex, k, 0.0});
    const Point2 d1 = puppy_direction(t, {Feature::Vertex, k, 1.0});
    CHECK(norm(d0 - t.direction(k - 1)) < 1e-12);
    CHECK(norm(d1 - t.direction(k)) < 1e-12);
  }
}

TEST_CASE("parameterization is continuous and closes with total turning 2 pi") {
  for (const char* name : {"rectangle", "pentagon", "notched"}) {
    const Track t = fixture(name);
    const int samples = 10000;
    const double step = t.puppy_length() / samples;
    double turning = 0.0;
    Point2 prev_p = puppy_position(t, t.puppy_param_at(0.0));
    Point2 prev_d = puppy_direction(t, t.puppy_param_at(0.0));
    for (int k = 1; k <= samples; ++k) {
      const PuppyParam y = t.puppy_param_at(k * step);
      const Point2 p = puppy_position(t, y);
      const Point2 d = puppy_direction(t, y);
      CHECK(norm(p - prev_p) <= step * (1 + 1e-9));
      CHECK(norm(d - prev_d) <= step * (1 + 1e-9));
      turning += std::atan2(cross(prev_d, d), dot(prev_d, d));
      prev_p = p;
      prev_d = d;
    }
    CHECK(turning == doctest::Approx(2 * std::numbers::pi));
    CHECK(norm(prev_p - puppy_position(t, t.puppy_param_at(0.0))) < 1e-9);
  }
}

TEST_CASE("classify examples on the rectangle") {
  const Track t = fixture("rectangle");
  // Human at (3,4): s = 6 + 4 + 3.
  CHECK(classify(t, {{13.0}, {Feature::Edge, 0, 0.5}}) == ConfigClass::Stable);
  // Human at (5,4): s = 6 + 4 + 1; (h - p) . theta = 2 > 0.
  CHECK(classify(t, {{11.0}, {Feature::Edge, 0, 0.5}}) == ConfigClass::Forward);
  CHECK(classify(t, {{3.0}, {Feature::Edge, 0, 0.5}}) == ConfigClass::Final);
  CHECK(classify(t, {{6.0}, {Feature::Vertex, 1, 0.3}}) == ConfigClass::Final);
}

TEST_CASE("unstable vertex configuration on the pentagon") {
  const Track t = fixture("pentagon");
  const int k = 1;
  // Human on the edge opposite v_1: inside its inner normal cone.
  const double s = t.edge_start(3) + 0.5 * t.edge_length(3);
  const Point2 w = t.human_position(s) - t.vertex(k);
  REQUIRE(dot(w, t.direction(k - 1)) < 0);
  REQUIRE(dot(w, t.direction(k)) > 0);
  // theta perpendicular to w inside the turn range.
  const Point2 theta = {w.y / norm(w), -w.x / norm(w)};
  const Point2 d0 = t.direction(k - 1);
  const double tt = std::atan2(cross(d0, theta), dot(d0, theta)) / t.turn(k);
  REQUIRE(tt > 0);
  REQUIRE(tt < 1);
  const Configuration c{{s}, {Feature::Vertex, k, tt}};
  CHECK(classify(t, c) == ConfigClass::Unstable);
  // One-sided check at resolution 1e-6: backward below, forward above.
  const double yc = t.puppy_coordinate(c.y);
  CHECK(raw_dot(t, s, yc - 1e-6) < 0);
  CHECK(raw_dot(t, s, yc + 1e-6) > 0);
}

TEST_CASE("total classification agrees with the dot-product sign") {
  const Track t = fixture("pentagon");
  int forward = 0, backward = 0;
  for (int a = 0; a < 97; ++a) {
    for (int b = 0; b < 101; ++b) {
      const double s = (a + 0.37) * t.perimeter() / 97;
      const double yc = (b + 0.61) * t.puppy_length() / 101;
      const ConfigClass c = classify(t, {{s}, t.puppy_param_at(yc)});
      const double f = raw_dot(t, s, yc);
      if (c == ConfigClass::Forward) {
        ++forward;
        CHECK(f > 0);
      } else if (c == ConfigClass::Backward) {
        ++backward;
        CHECK(f < 0);
      }
    }
  }
  CHECK(forward > 0);
  CHECK(backward > 0);
}

TEST_CASE("min feature distance") {
  CHECK(min_feature_distance(fixture("rectangle")) == doctest::Approx(4.0));
  CHECK(min_feature_distance(fixture("notched")) == doctest::Approx(0.5));
}

TEST_CASE("pentagon min feature distance matches an exact pair scan") {
  // Squared point-segment distance in rationals, over every vertex and every
  // edge not incident to it. Segment-segment minima of disjoint segments are
  // attained at an endpoint, so this covers non-adjacent edge pairs too.
  const Track t = fixture("pentagon");
  const int n = t.size();
  Rational best = -1;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (j == i || t.wrap(j + 1) == i) continue;
      const RPoint a = t.exact_vertex(j), e = t.exact_edge(j), v = t.exact_vertex(i);
      Rational u = dot(v - a, e) / dot(e, e);
      if (u < 0) u = 0;
      if (u > 1) u = 1;
      const RPoint d = v - (a + u * e);
      const Rational d2 = dot(d, d);
      if (best < 0 || d2 < best) best = d2;
    }
  }
  CHECK(min_feature_distance(t) == doctest::Approx(std::sqrt(to_double(best))).epsilon(1e-12));
}

TEST_CASE("tangent signed distance") {
  const Track t = fixture("rectangle");
  CHECK(tangent_signed_distance(t, {{13.0}, {Feature::Edge, 0, 0.5}}) == doctest::Approx(4.0));
  CHECK(tangent_signed_distance(t, {{3.0}, {Feature::Edge, 0, 0.5}}) == doctest::Approx(0.0));
}
