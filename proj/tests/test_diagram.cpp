#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <map>
#include <json.hpp>
#include <sstream>
#include <tuple>

#include "fixture_path.hpp"
#include "puppy/corpus.hpp"
#include "puppy/diagram.hpp"
#include "puppy/error.hpp"
#include "puppy/oracles.hpp"
#include "puppy/render.hpp"

using namespace puppy;

namespace {

bool touches_main_diagonal(const Track& t, Feature row, int i, int col) {
  auto same = [&](int a, int b) { return t.wrap(a) == t.wrap(b); };
  if (row == Feature::Edge) return same(col, i) || same(col, i - 1) || same(col, i + 1);
  return same(col, i) || same(col, i - 1);
}

// Exact pairwise disjointness of arcs belonging to different cycles. Arcs
// live in single cells, so only arcs sharing a cell (or a junction boundary
// of one) can meet.
void check_disjoint(const AttractionDiagram& d) {
  const Track& t = d.track;
  std::map<std::tuple<int, int, int>, std::vector<int>> by_cell;
  for (const auto& a : d.arcs) {
    if (a.shape == ArcShape::Junction || a.shape == ArcShape::DiagonalVertical) continue;
    by_cell[{a.row == Feature::Edge ? 1 : 0, a.row_index, a.col}].push_back(a.id);
  }
  for (const auto& [cell, ids] : by_cell) {
    for (std::size_t p = 0; p < ids.size(); ++p) {
      for (std::size_t q = p + 1; q < ids.size(); ++q) {
        const Arc& a = d.arcs[ids[p]];
        const Arc& b = d.arcs[ids[q]];
        if (a.cycle == b.cycle) continue;
        const Rational lo = a.r0 > b.r0 ? a.r0 : b.r0;
        const Rational hi = a.r1 < b.r1 ? a.r1 : b.r1;
        if (!(lo < hi)) continue;
        if (a.row == Feature::Vertex) {
          // Both are graphs of the direction perpendicular to the human
          // offset; stable and unstable branches point opposite ways.
          CHECK(a.kind != b.kind);
          continue;
        }
        // Edge row: each arc is t = alpha + beta r; compare exactly.
        auto line = [&](const Arc& arc) {
          if (arc.shape == ArcShape::DiagonalEdge) return std::pair<Rational, Rational>{0, 1};
          const EdgeEdgeCoeffs c = edge_edge_coeffs(t, arc.row_index, arc.col);
          return std::pair<Rational, Rational>{c.A / c.C, c.B / c.C};
        };
        const auto [a0, a1] = line(a);
        const auto [b0, b1] = line(b);
        if (a1 == b1) {
          CHECK(a0 != b0);
        } else {
          const Rational r = (b0 - a0) / (a1 - b1);
          CHECK_FALSE((lo < r && r < hi));
        }
      }
    }
  }
  // Junction and vertical arcs: no node of another cycle in their interior.
  for (const auto& a : d.arcs) {
    if (a.shape != ArcShape::Junction && a.shape != ArcShape::DiagonalVertical) continue;
    for (const auto& arc : d.arcs) {
      if (arc.cycle == a.cycle) continue;
      for (int id : {arc.node0, arc.node1}) {
        const Node& nd = d.nodes[id];
        if (a.shape == ArcShape::Junction) {
          const int k = a.row == Feature::Vertex ? 2 * a.row_index : 2 * a.row_index + 1;
          CHECK_FALSE((nd.ykind == YKind::Junction && nd.yindex == k && nd.col == a.col && nd.r > 0));
        } else {
          CHECK_FALSE((nd.ykind == YKind::VertexInterior && nd.yindex == a.row_index && nd.col == a.col &&
                       nd.r == 0));
        }
      }
    }
  }
}

// Everything the structure lemmas promise, checked on one diagram.
void check_structure(const AttractionDiagram& d) {
  REQUIRE(d.classified);
  for (const auto& nd : d.nodes) CHECK(nd.arcs.size() == 2);
  for (const auto& p : d.pivots) {
    CHECK(d.arcs[p.stable_arc].kind == ArcKind::Stable);
    CHECK(d.arcs[p.unstable_arc].kind == ArcKind::Unstable);
  }
  int alpha_total = 0;
  for (std::size_t c = 0; c < d.cycles.size(); ++c) {
    const CriticalCycle& cyc = d.cycles[c];
    CHECK(cyc.crossings_alpha % 2 == cyc.crossings_beta % 2);
    alpha_total += cyc.crossings_alpha;
    // Independent essentiality: the homology class on the universal cover.
    const Winding w = cycle_winding(d, static_cast<int>(c));
    CHECK(cyc.essential == (w.human != 0 || w.puppy != 0));
  }
  CHECK(alpha_total % 2 == 0);
  CHECK(d.essential_count() == 2);
  REQUIRE(d.main_diagonal >= 0);
  CHECK(d.cycles[d.main_diagonal].crossings_alpha == 1);
  CHECK(d.cycles[d.main_diagonal].crossings_beta == 1);
  CHECK(d.river >= 0);

  const DualDiagram dual = build_dual_diagram(d.track, d);
  REQUIRE(dual.curves.size() == d.cycles.size());
  for (std::size_t c = 0; c < d.cycles.size(); ++c) CHECK(dual.curves[c].essential == d.cycles[c].essential);

  for (const auto& a : d.arcs) {
    if (a.cycle == d.main_diagonal) continue;
    if (a.shape == ArcShape::Junction) continue;
    CHECK_FALSE(touches_main_diagonal(d.track, a.row, a.row_index, a.col));
  }
  check_disjoint(d);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void check_golden(const std::string& name, const std::string& actual) {
  const std::string path = std::string(PUPPY_SOURCE_DIR) + "/tests/golden/" + name;
  if (std::getenv("PUPPY_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  const std::string expected = slurp(path);
  REQUIRE_FALSE(expected.empty());
  CHECK(actual == expected);
}

}  // namespace

TEST_CASE("degeneracy scan on the fixtures") {
  CHECK(detect_degeneracies(fixture("pentagon")).empty());
  CHECK(detect_degeneracies(fixture("quad")).empty());

  const auto tri = detect_degeneracies(fixture("triangle"));
  REQUIRE(tri.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(tri[i].type == DegeneracyType::Type1);
    CHECK(tri[i].puppy_vertex == i);
  }

  // Each corner of the rectangle has both adjacent edges on the
  // perpendiculars through it.
  const auto rect = detect_degeneracies(fixture("rectangle"));
  CHECK(rect.size() == 8);
  std::map<int, int> per_vertex;
  for (const auto& g : rect) {
    CHECK(g.type == DegeneracyType::Type3a);
    ++per_vertex[g.puppy_vertex];
  }
  for (int i = 0; i < 4; ++i) CHECK(per_vertex[i] == 2);
}

TEST_CASE("forbidden degeneracies make build_diagram fail with witnesses") {
  try {
    build_diagram(fixture("rectangle"));
    FAIL("expected DegenerateInput");
  } catch (const DegenerateInput& e) {
    CHECK(std::string(e.what()).find("type3a") != std::string::npos);
  }
  CHECK_THROWS_AS(build_diagram(fixture("triangle")), DegenerateInput);
  CHECK_THROWS_AS(build_diagram(fixture("notched")), DegenerateInput);
}

TEST_CASE("pentagon census") {
  const AttractionDiagram d = build_diagram(fixture("pentagon"));
  check_structure(d);
  CHECK(d.cycles.size() == 2);
  CHECK(d.arcs.size() == 35);
  CHECK(d.pivots.size() == 10);
  int forward = 0;
  for (const auto& p : d.pivots) forward += p.direction == PivotDirection::Forward;
  CHECK(forward == 5);
  CHECK(d.degeneracies.empty());
}

TEST_CASE("quadrilateral-derived fixture has a diagonal, a river and nothing else") {
  const AttractionDiagram d = build_diagram(fixture("quad"));
  check_structure(d);
  CHECK(d.cycles.size() == 2);
  CHECK(d.pivots.size() == 10);
}

TEST_CASE("pocket fixture has one contractible cycle") {
  const AttractionDiagram d = build_diagram(fixture("pocket"));
  check_structure(d);
  REQUIRE(d.cycles.size() == 3);
  int contractible = -1;
  for (std::size_t c = 0; c < 3; ++c) {
    if (!d.cycles[c].essential) contractible = static_cast<int>(c);
  }
  REQUIRE(contractible >= 0);
  CHECK(d.cycles[contractible].crossings_alpha % 2 == 0);
  CHECK(d.cycles[contractible].crossings_beta % 2 == 0);
  const Winding w = cycle_winding(d, contractible);
  CHECK(w.human == 0);
  CHECK(w.puppy == 0);
  const DualDiagram dual = build_dual_diagram(d.track, d);
  CHECK(dual.curves[contractible].crossings % 2 == 0);
  CHECK(dual.essential_count() == 2);
}

TEST_CASE("grid oracle reproduces the sign pattern at 2048 squared") {
  for (const std::string name : {"pentagon", "quad", "pocket"}) {
    CAPTURE(name);
    const AttractionDiagram d = build_diagram(fixture(name));
    const GridOracleReport rep = grid_oracle(d, 2048);
    CHECK(rep.samples == 2048L * 2048L);
    CHECK(rep.mismatches == 0);
    CHECK(rep.ties <= 2);  // the pocket's lens is thinner than a grid cell
  }
}

TEST_CASE("arc interiors classify as their kind and map to the full distance in the dual") {
  for (const std::string name : {"pentagon", "quad", "pocket"}) {
    CAPTURE(name);
    const AttractionDiagram d = build_diagram(fixture(name));
    const Track& t = d.track;
    int samples = 0;
    for (const auto& a : d.arcs) {
      if (a.shape == ArcShape::DiagonalVertical) continue;
      if (a.shape == ArcShape::EdgeEdge) CHECK(a.kind == ArcKind::Stable);
      for (int k = 1; k < 8; ++k) {
        const double X = a.X0 + k * (a.X1 - a.X0) / 8;
        const double Y = arc_y_at(d, a, X);
        const Configuration c{{t.wrap_s(X)}, t.puppy_param_at(t.wrap_y(Y))};
        const ConfigClass cls = classify(t, c);
        if (a.kind == ArcKind::Diagonal) {
          CHECK(cls == ConfigClass::Final);
        } else {
          CHECK(cls == (a.kind == ArcKind::Stable ? ConfigClass::Stable : ConfigClass::Unstable));
        }
        // Critical means h - p is perpendicular to theta, so the distance to
        // the tangent line is the whole puppy-human distance.
        const double gap = norm(t.human_position(X) - puppy_position(t, c.y));
        CHECK(std::abs(tangent_signed_distance(t, c)) == doctest::Approx(gap).epsilon(1e-9));
        ++samples;
      }
    }
    CHECK(samples >= 100);
  }
}

TEST_CASE("edge-edge arc points are exactly critical") {
  // For rational r on an edge-edge arc, t follows from A + B r = C t and the
  // dot product (P(x) - pi(y)) . E_i vanishes in exact arithmetic.
  const AttractionDiagram d = build_diagram(fixture("pentagon"));
  const Track& t = d.track;
  int checked = 0;
  for (const auto& a : d.arcs) {
    if (a.shape != ArcShape::EdgeEdge) continue;
    const EdgeEdgeCoeffs c = edge_edge_coeffs(t, a.row_index, a.col);
    for (int k = 0; k <= 10; ++k) {
      const Rational r = a.r0 + (a.r1 - a.r0) * Rational(k, 10);
      const Rational tt = (c.A + c.B * r) / c.C;
      CHECK(tt >= 0);
      CHECK(tt <= 1);
      const RPoint h = t.exact_vertex(a.col) + r * t.exact_edge(a.col);
      const RPoint p = t.exact_vertex(a.row_index) + tt * t.exact_edge(a.row_index);
      CHECK(sign(dot(h - p, t.exact_edge(a.row_index))) == 0);
      ++checked;
    }
  }
  CHECK(checked > 0);
}

TEST_CASE("random corpus structure") {
  const auto corpus = generic_corpus(corpus_seed(), 100);
  int contractible = 0;
  for (std::size_t k = 0; k < corpus.size(); ++k) {
    CAPTURE(k);
    const AttractionDiagram d = build_diagram(corpus[k]);
    check_structure(d);
    contractible += static_cast<int>(d.cycles.size()) - 2;
  }
  MESSAGE("contractible cycles in corpus: " << contractible);
}

TEST_CASE("diagram JSON export") {
  const AttractionDiagram d = build_diagram(fixture("pentagon"));
  const auto j = nlohmann::json::parse(diagram_json(d));
  CHECK(j["format"] == "puppydiagram v1");
  CHECK(j["arcs"].size() == d.arcs.size());
  CHECK(j["pivots"].size() == d.pivots.size());
  REQUIRE(j["cycles"].size() == 2);
  CHECK(j["cycles"][d.main_diagonal]["role"] == "main_diagonal");
  CHECK(j["cycles"][d.river]["role"] == "river");
  CHECK(diagram_json(d) == diagram_json(build_diagram(fixture("pentagon"))));
}

TEST_CASE("svg rendering is deterministic and matches golden files") {
  const Track t = fixture("pentagon");
  const AttractionDiagram d = build_diagram(t);
  const DualDiagram dual = build_dual_diagram(t, d);

  const std::string track_svg = render_svg(t);
  CHECK(track_svg.find(">v4</text>") != std::string::npos);
  CHECK(track_svg == render_svg(t));

  const std::string diag_svg = render_svg(d);
  CHECK(diag_svg == render_svg(build_diagram(t)));
  CHECK(diag_svg.find("#2a9d3a") != std::string::npos);  // stable
  CHECK(diag_svg.find("#d62828") != std::string::npos);  // unstable

  const std::string dual_svg = render_svg(dual, t);
  check_golden("pentagon_track.svg", track_svg);
  check_golden("pentagon_diagram.svg", diag_svg);
  check_golden("pentagon_dual.svg", dual_svg);
}
