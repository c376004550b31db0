#pragma once

#include <optional>
#include <string>
#include <vector>

#include "puppy/rational.hpp"
#include "puppy/track.hpp"

namespace puppy {

enum class ArcKind { Stable, Unstable, Diagonal };
std::string_view to_string(ArcKind k);

// Where an arc lives and how its geometry is defined.
enum class ArcShape {
  EdgeEdge,          // segment of (v_j + r E_j - pi(t)) . E_i = 0
  VertexEdge,        // puppy at v_i, theta perpendicular to the human offset
  Junction,          // horizontal run along a junction row boundary
  DiagonalEdge,      // human and puppy on the same edge, r = t
  DiagonalVertical,  // human at v_i, puppy turning at v_i
};

enum class YKind { EdgeInterior, Junction, VertexInterior };

// Exact address of an arc endpoint. x is (edge col, r) with r in [0,1);
// y is either an edge-interior parameter, a junction (row boundary), or a
// vertex-interior direction determined by the human vertex wvertex.
struct Node {
  std::string key;
  int col = 0;
  Rational r;
  YKind ykind = YKind::Junction;
  int yindex = 0;  // edge index, junction index, or vertex index
  Rational t;      // EdgeInterior only
  int wvertex = -1;
  ArcKind vkind = ArcKind::Stable;  // VertexInterior only
  double X = 0.0;
  double Y = 0.0;
  std::vector<int> arcs;
};

struct Arc {
  int id = 0;
  ArcKind kind = ArcKind::Stable;
  ArcShape shape = ArcShape::EdgeEdge;
  Feature row = Feature::Edge;
  int row_index = 0;
  int col = 0;
  Rational r0, r1;  // r0 <= r1; equal for DiagonalVertical
  int node0 = -1;   // endpoint at r0 (at t = 0 for DiagonalVertical)
  int node1 = -1;
  // Cell-local unwrapped coordinates of the endpoints.
  double X0 = 0, Y0 = 0, X1 = 0, Y1 = 0;
  // EdgeEdge only: t(r) = ta + tb * r in doubles, for fast evaluation.
  double ta = 0, tb = 0;
  int cycle = -1;
};

// Exact line coefficients of an edge-edge arc: A + B r - C t = 0.
struct EdgeEdgeCoeffs {
  Rational A, B, C;
};

enum class PivotDirection { Forward, Backward };

struct Pivot {
  int node = -1;
  PivotDirection direction = PivotDirection::Forward;
  int stable_arc = -1;
  int unstable_arc = -1;
};

enum class DegeneracyType { Type1, Type2a, Type2b, Type3a, Type3b };
std::string_view to_string(DegeneracyType t);

inline bool is_forbidden(DegeneracyType t) {
  return t == DegeneracyType::Type1 || t == DegeneracyType::Type2a || t == DegeneracyType::Type3a;
}

struct Degeneracy {
  DegeneracyType type = DegeneracyType::Type1;
  int puppy_vertex = 0;  // v_i
  int edge = -1;         // e_i whose perpendicular is involved (types 2, 3)
  int human_vertex = -1; // v_j (type 2)
  int human_edge = -1;   // e_j (type 3)
  int junction = -1;     // junction row boundary of the witness configuration
  std::string describe() const;
};

struct CriticalCycle {
  std::vector<int> arcs;   // in traversal order
  std::vector<int> nodes;  // nodes[k] joins arcs[k] and arcs[k+1]
  bool diagonal = false;
  bool essential = false;
  int crossings_alpha = 0;
  int crossings_beta = 0;
};

struct AttractionDiagram {
  Track track;
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
  std::vector<Pivot> pivots;
  std::vector<Degeneracy> degeneracies;  // tolerated ones (2b, 3b)
  std::vector<CriticalCycle> cycles;
  int main_diagonal = -1;
  int river = -1;  // set when exactly two essential cycles exist
  bool classified = false;
  double alpha_y = 0.0;  // test lines used by classify_cycles
  double beta_x = 0.0;

  int essential_count() const;
  const Pivot* pivot_at_node(int node) const;
};

EdgeEdgeCoeffs edge_edge_coeffs(const Track& track, int i, int j);

// Every arc of every cell (no assembly); also used by the degeneracy scan.
struct RawArcs {
  std::vector<Node> nodes;
  std::vector<Arc> arcs;
  // Junction row boundaries that are critical along a whole column and are
  // pivots there: (junction, col).
  std::vector<std::pair<int, int>> pivot_segments;
};
RawArcs extract_arcs(const Track& track);

std::vector<Degeneracy> detect_degeneracies(const Track& track);

// Throws DegenerateInput when a type 1, 2a or 3a degeneracy is present or
// the arcs do not assemble into disjoint simple cycles.
AttractionDiagram build_diagram(const Track& track);

// Picks generic test lines, counts crossings, sets essential flags.
// Throws NonGenericTestLine after 32 failed draws.
void classify_cycles(AttractionDiagram& diagram);

// Y value of a non-vertical arc at human coordinate X (cell-local, X0 <= X <= X1).
double arc_y_at(const AttractionDiagram& d, const Arc& arc, double X);
// Points along an arc in cell-local coordinates.
std::vector<Point2> sample_arc(const AttractionDiagram& d, const Arc& arc, int samples = 64);

struct Crossing {
  double Y = 0.0;  // in [0, puppy_length)
  int arc = -1;
};
// All arcs crossed by the vertical line at human coordinate X, sorted by Y.
// Vertical (DiagonalVertical) arcs are never included.
std::vector<Crossing> column_crossings(const AttractionDiagram& d, double X);

// Forward/Backward implied by the arc set at a non-critical point.
ConfigClass implied_class(const AttractionDiagram& d, const std::vector<Crossing>& column, double Y);

struct DualDiagram {
  struct Curve {
    int cycle = -1;
    std::vector<Point2> points;  // (Y unwrapped, signed tangent distance)
    bool essential = false;
    int crossings = 0;
  };
  std::vector<Curve> curves;
  double line_y = 0.0;
  int essential_count() const;
};

DualDiagram build_dual_diagram(const Track& track, const AttractionDiagram& diagram);

std::string diagram_json(const AttractionDiagram& d);

}  // namespace puppy
