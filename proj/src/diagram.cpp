#include "puppy/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "puppy/error.hpp"

namespace puppy {

std::string_view to_string(ArcKind k) {
  switch (k) {
    case ArcKind::Stable: return "stable";
    case ArcKind::Unstable: return "unstable";
    case ArcKind::Diagonal: return "diagonal";
  }
  return "?";
}

std::string_view to_string(DegeneracyType t) {
  switch (t) {
    case DegeneracyType::Type1: return "type1";
    case DegeneracyType::Type2a: return "type2a";
    case DegeneracyType::Type2b: return "type2b";
    case DegeneracyType::Type3a: return "type3a";
    case DegeneracyType::Type3b: return "type3b";
  }
  return "?";
}

std::string Degeneracy::describe() const {
  std::ostringstream out;
  out << to_string(type) << ": puppy at v" << puppy_vertex;
  switch (type) {
    case DegeneracyType::Type1: out << ", acute angle"; break;
    case DegeneracyType::Type2a:
    case DegeneracyType::Type2b:
      out << ", human at v" << human_vertex << " on the perpendicular of e" << edge;
      break;
    case DegeneracyType::Type3a:
    case DegeneracyType::Type3b:
      out << ", e" << human_edge << " lies on the perpendicular of e" << edge;
      break;
  }
  return out.str();
}

int AttractionDiagram::essential_count() const {
  int k = 0;
  for (const auto& c : cycles) k += c.essential ? 1 : 0;
  return k;
}

const Pivot* AttractionDiagram::pivot_at_node(int node) const {
  for (const auto& p : pivots) {
    if (p.node == node) return &p;
  }
  return nullptr;
}

int DualDiagram::essential_count() const {
  int k = 0;
  for (const auto& c : curves) k += c.essential ? 1 : 0;
  return k;
}

EdgeEdgeCoeffs edge_edge_coeffs(const Track& track, int i, int j) {
  const RPoint Ei = track.exact_edge(i);
  return {dot(track.exact_vertex(j) - track.exact_vertex(i), Ei), dot(track.exact_edge(j), Ei), dot(Ei, Ei)};
}

namespace {

// Junction k is the lower boundary of row k (row 2i = Vertex i, 2i+1 = Edge i).
int junction_start_of_vertex(const Track& t, int i) { return 2 * t.wrap(i); }
int junction_start_of_edge(const Track& t, int i) { return 2 * t.wrap(i) + 1; }

double junction_y(const Track& t, int k) {
  return (k % 2 == 0) ? t.row_start(Feature::Vertex, k / 2) : t.row_start(Feature::Edge, k / 2);
}

// Position of the stable (or unstable) direction for human offset w within
// the turn at v_i, as a fraction of the turn.
double vertex_tau(const Track& t, int i, Point2 w, ArcKind kind) {
  const int sigma = t.turn_sign(i);
  const double len = norm(w);
  Point2 th = sigma > 0 ? Point2{-w.y / len, w.x / len} : Point2{w.y / len, -w.x / len};
  if (kind == ArcKind::Unstable) th = -1.0 * th;
  const Point2 d0 = t.direction(i - 1);
  const double angle = std::atan2(cross(d0, th), dot(d0, th));
  return std::clamp(sigma * angle / std::abs(t.turn(i)), 0.0, 1.0);
}

class NodeTable {
 public:
  explicit NodeTable(const Track& t) : t_(t) {}

  int junction(int col, Rational r, int k) {
    Node n = base(col, std::move(r));
    n.ykind = YKind::Junction;
    n.yindex = ((k % (2 * t_.size())) + 2 * t_.size()) % (2 * t_.size());
    n.Y = junction_y(t_, n.yindex);
    n.key += "|J:" + std::to_string(n.yindex);
    return insert(std::move(n));
  }

  int edge_interior(int col, Rational r, int i, Rational tt) {
    if (tt == 0) return junction(col, std::move(r), junction_start_of_edge(t_, i));
    if (tt == 1) return junction(col, std::move(r), junction_start_of_vertex(t_, i + 1));
    Node n = base(col, std::move(r));
    n.ykind = YKind::EdgeInterior;
    n.yindex = t_.wrap(i);
    n.Y = t_.row_start(Feature::Edge, i) + tt.get_d() * t_.edge_length(i);
    n.key += "|E:" + std::to_string(n.yindex) + ":" + to_string(tt);
    n.t = std::move(tt);
    return insert(std::move(n));
  }

  // Vertex-interior endpoint at a column boundary: the human stands at
  // vertex wv. A zero offset marks an arc that runs into a final
  // configuration; approach gives the limiting offset direction then.
  int vertex_interior(int col, Rational r, int i, int wv, ArcKind kind, Point2 approach) {
    Node n = base(col, std::move(r));
    n.ykind = YKind::VertexInterior;
    n.yindex = t_.wrap(i);
    n.wvertex = t_.wrap(wv);
    n.vkind = kind;
    Point2 w = t_.vertex(wv) - t_.vertex(i);
    const bool final_touch = (n.wvertex == n.yindex);
    if (final_touch) w = approach;
    n.Y = t_.row_start(Feature::Vertex, i) + vertex_tau(t_, i, w, kind) * std::abs(t_.turn(i));
    n.key += std::string(final_touch ? "|F:" : "|V:") + std::to_string(n.yindex) + ":" +
             std::to_string(n.wvertex) + ":" + std::string(to_string(kind));
    return insert(std::move(n));
  }

  std::vector<Node> take() { return std::move(nodes_); }
  std::vector<Node>& nodes() { return nodes_; }

 private:
  Node base(int col, Rational r) {
    Node n;
    col = t_.wrap(col);
    if (r == 1) {
      col = t_.wrap(col + 1);
      r = 0;
    }
    n.col = col;
    n.r = std::move(r);
    n.X = t_.edge_start(col) + n.r.get_d() * t_.edge_length(col);
    n.key = "x:" + std::to_string(col) + ":" + to_string(n.r);
    return n;
  }

  int insert(Node n) {
    auto it = index_.find(n.key);
    if (it != index_.end()) return it->second;
    const int id = static_cast<int>(nodes_.size());
    index_.emplace(n.key, id);
    nodes_.push_back(std::move(n));
    return id;
  }

  const Track& t_;
  std::vector<Node> nodes_;
  std::map<std::string, int> index_;
};

// Feasible r-interval of {c0 + c1 r >= 0 for each constraint} within [0, 1].
bool feasible_interval(const std::vector<std::pair<Rational, Rational>>& constraints, Rational& lo,
                       Rational& hi) {
  lo = 0;
  hi = 1;
  for (const auto& [c0, c1] : constraints) {
    const int s = sign(c1);
    if (s == 0) {
      if (sign(c0) < 0) return false;
    } else if (s > 0) {
      lo = std::max(lo, Rational(-c0 / c1));
    } else {
      hi = std::min(hi, Rational(-c0 / c1));
    }
  }
  return lo < hi;
}

void set_cell_x(const Track& t, Arc& a) {
  a.X0 = t.edge_start(a.col) + a.r0.get_d() * t.edge_length(a.col);
  a.X1 = t.edge_start(a.col) + a.r1.get_d() * t.edge_length(a.col);
}

}  // namespace

RawArcs extract_arcs(const Track& t) {
  const int n = t.size();
  NodeTable table(t);
  std::vector<Arc> arcs;
  std::vector<std::pair<int, int>> pivot_segments;

  auto push = [&](Arc a) {
    a.id = static_cast<int>(arcs.size());
    arcs.push_back(std::move(a));
  };

  // Main diagonal.
  for (int j = 0; j < n; ++j) {
    Arc a;
    a.kind = ArcKind::Diagonal;
    a.shape = ArcShape::DiagonalEdge;
    a.row = Feature::Edge;
    a.row_index = j;
    a.col = j;
    a.r0 = 0;
    a.r1 = 1;
    a.node0 = table.junction(j, 0, junction_start_of_edge(t, j));
    a.node1 = table.junction(j, 1, junction_start_of_vertex(t, j + 1));
    set_cell_x(t, a);
    a.Y0 = t.row_start(Feature::Edge, j);
    a.Y1 = a.Y0 + t.edge_length(j);
    a.ta = 0;
    a.tb = 1;
    push(std::move(a));
  }
  for (int i = 0; i < n; ++i) {
    Arc a;
    a.kind = ArcKind::Diagonal;
    a.shape = ArcShape::DiagonalVertical;
    a.row = Feature::Vertex;
    a.row_index = i;
    a.col = i;
    a.r0 = 0;
    a.r1 = 0;
    a.node0 = table.junction(i, 0, junction_start_of_vertex(t, i));
    a.node1 = table.junction(i, 0, junction_start_of_edge(t, i));
    set_cell_x(t, a);
    a.Y0 = t.row_start(Feature::Vertex, i);
    a.Y1 = a.Y0 + std::abs(t.turn(i));
    push(std::move(a));
  }

  // Edge-edge cells: puppy on e_i, human on e_j.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      const EdgeEdgeCoeffs c = edge_edge_coeffs(t, i, j);
      if (sign(c.B) == 0 && (sign(c.A) == 0 || c.A == c.C)) continue;  // junction row, handled below
      Rational lo, hi;
      if (!feasible_interval({{c.A, c.B}, {c.C - c.A, -c.B}}, lo, hi)) continue;
      Arc a;
      a.kind = ArcKind::Stable;
      a.shape = ArcShape::EdgeEdge;
      a.row = Feature::Edge;
      a.row_index = i;
      a.col = j;
      a.r0 = lo;
      a.r1 = hi;
      const Rational t0 = (c.A + c.B * lo) / c.C;
      const Rational t1 = (c.A + c.B * hi) / c.C;
      a.node0 = table.edge_interior(j, lo, i, t0);
      a.node1 = table.edge_interior(j, hi, i, t1);
      set_cell_x(t, a);
      a.ta = Rational(c.A / c.C).get_d();
      a.tb = Rational(c.B / c.C).get_d();
      a.Y0 = t.row_start(Feature::Edge, i) + t0.get_d() * t.edge_length(i);
      a.Y1 = t.row_start(Feature::Edge, i) + t1.get_d() * t.edge_length(i);
      push(std::move(a));
    }
  }

  // Vertex-edge cells: puppy turning at v_i, human on e_j.
  for (int i = 0; i < n; ++i) {
    const RPoint Ein = t.exact_edge(i - 1);
    const RPoint Eout = t.exact_edge(i);
    for (int j = 0; j < n; ++j) {
      const RPoint w0 = t.exact_vertex(j) - t.exact_vertex(i);
      const RPoint Ej = t.exact_edge(j);
      const Rational a0 = dot(w0, Ein), a1 = dot(Ej, Ein);
      const Rational b0 = dot(w0, Eout), b1 = dot(Ej, Eout);
      if ((sign(a0) == 0 && sign(a1) == 0) || (sign(b0) == 0 && sign(b1) == 0)) continue;
      for (ArcKind kind : {ArcKind::Stable, ArcKind::Unstable}) {
        const int s = kind == ArcKind::Stable ? 1 : -1;
        Rational lo, hi;
        if (!feasible_interval({{s * a0, s * a1}, {-s * b0, -s * b1}}, lo, hi)) continue;
        auto endpoint = [&](const Rational& r) {
          const Rational av = a0 + a1 * r;
          const Rational bv = b0 + b1 * r;
          if (sign(av) == 0 && sign(bv) == 0) {
            // Human at v_i itself: the arc runs into the main diagonal.
            const Point2 dir = to_point(Ej);
            return table.vertex_interior(j, r, i, i, kind, r == 0 ? dir : -1.0 * dir);
          }
          if (sign(av) == 0) return table.junction(j, r, junction_start_of_vertex(t, i));
          if (sign(bv) == 0) return table.junction(j, r, junction_start_of_edge(t, i));
          return table.vertex_interior(j, r, i, r == 0 ? j : j + 1, kind, {});
        };
        Arc a;
        a.kind = kind;
        a.shape = ArcShape::VertexEdge;
        a.row = Feature::Vertex;
        a.row_index = i;
        a.col = j;
        a.r0 = lo;
        a.r1 = hi;
        a.node0 = endpoint(lo);
        a.node1 = endpoint(hi);
        set_cell_x(t, a);
        auto local_y = [&](const Rational& r, int node) {
          const Rational av = a0 + a1 * r;
          const Rational bv = b0 + b1 * r;
          const double base = t.row_start(Feature::Vertex, i);
          if (sign(av) == 0 && sign(bv) != 0) return base;
          if (sign(bv) == 0 && sign(av) != 0) return base + std::abs(t.turn(i));
          return table.nodes()[node].Y;
        };
        a.Y0 = local_y(lo, a.node0);
        a.Y1 = local_y(hi, a.node1);
        push(std::move(a));
      }
    }
  }

  // Junction rows that are critical along an entire column (a perpendicular
  // edge): stable ones are arcs, pivot ones are type-3 segments.
  for (int k = 0; k < 2 * n; ++k) {
    const int i = k / 2;
    const int m = (k % 2 == 0) ? i - 1 : i;
    const RPoint Em = t.exact_edge(m);
    for (int j = 0; j < n; ++j) {
      const RPoint w0 = t.exact_vertex(j) - t.exact_vertex(i);
      const RPoint Ej = t.exact_edge(j);
      if (sign(dot(w0, Em)) != 0 || sign(dot(Ej, Em)) != 0) continue;
      const RPoint mid = w0 + Rational(1, 2) * Ej;
      const int rate = t.turn_sign(i) * sign(cross(Em, mid));
      if (rate > 0) {
        pivot_segments.emplace_back(k, j);
        continue;
      }
      Arc a;
      a.kind = ArcKind::Stable;
      a.shape = ArcShape::Junction;
      a.row = (k % 2 == 0) ? Feature::Vertex : Feature::Edge;
      a.row_index = i;
      a.col = j;
      a.r0 = 0;
      a.r1 = 1;
      a.node0 = table.junction(j, 0, k);
      a.node1 = table.junction(j, 1, k);
      set_cell_x(t, a);
      a.Y0 = a.Y1 = junction_y(t, k);
      push(std::move(a));
    }
  }

  RawArcs raw;
  raw.nodes = table.take();
  for (auto& a : arcs) {
    raw.nodes[a.node0].arcs.push_back(a.id);
    raw.nodes[a.node1].arcs.push_back(a.id);
  }
  raw.arcs = std::move(arcs);
  raw.pivot_segments = std::move(pivot_segments);
  return raw;
}

std::vector<Degeneracy> detect_degeneracies(const Track& t) {
  const int n = t.size();
  const RawArcs raw = extract_arcs(t);
  std::map<std::string, int> degree;
  for (const auto& node : raw.nodes) degree[node.key] = static_cast<int>(node.arcs.size());
  auto degree_at = [&](int col, int k) {
    col = t.wrap(col);
    auto it = degree.find("x:" + std::to_string(col) + ":0|J:" + std::to_string(k));
    return it == degree.end() ? 0 : it->second;
  };

  std::vector<Degeneracy> out;
  for (int i = 0; i < n; ++i) {
    if (t.corner_dot_sign(i) < 0) {
      Degeneracy d;
      d.type = DegeneracyType::Type1;
      d.puppy_vertex = i;
      out.push_back(d);
    }
  }

  auto side = [](const RPoint& dir, const RPoint& v) { return sign(cross(dir, v)); };
  for (int i = 0; i < n; ++i) {
    const RPoint Ei = t.exact_edge(i);
    // The perpendicular through v_i (junction at the start of e_i) and through
    // v_{i+1} (junction at the start of v_{i+1}).
    for (int end = 0; end < 2; ++end) {
      const int b = t.wrap(i + end);
      const RPoint& base = t.exact_vertex(b);
      const int ref = end == 0 ? t.wrap(i - 1) : t.wrap(i + 2);
      const int k = end == 0 ? 2 * i + 1 : 2 * t.wrap(i + 1);
      const int ref_side = side(Ei, t.exact_vertex(ref) - t.exact_vertex(i));
      auto on_line = [&](int v) { return sign(dot(t.exact_vertex(v) - base, Ei)) == 0; };

      for (int j = 0; j < n; ++j) {
        if (j == b || !on_line(j)) continue;
        if (side(Ei, t.exact_vertex(j) - t.exact_vertex(i)) != ref_side) continue;
        const int sp = sign(dot(t.exact_vertex(j - 1) - base, Ei));
        const int sn = sign(dot(t.exact_vertex(j + 1) - base, Ei));
        if (sp == 0 || sp != sn) continue;
        Degeneracy d;
        d.type = degree_at(j, k) == 0 ? DegeneracyType::Type2b : DegeneracyType::Type2a;
        d.puppy_vertex = b;
        d.edge = i;
        d.human_vertex = j;
        d.junction = k;
        out.push_back(d);
      }

      for (int j = 0; j < n; ++j) {
        if (j == i || !on_line(j) || !on_line(t.wrap(j + 1))) continue;
        const int far = (j == b) ? t.wrap(j + 1) : j;
        if (side(Ei, t.exact_vertex(far) - t.exact_vertex(i)) != ref_side) continue;
        Degeneracy d;
        const bool connected = degree_at(j, k) > 0 || degree_at(j + 1, k) > 0;
        d.type = connected ? DegeneracyType::Type3a : DegeneracyType::Type3b;
        d.puppy_vertex = b;
        d.edge = i;
        d.human_edge = j;
        d.junction = k;
        out.push_back(d);
      }
    }
  }
  return out;
}

AttractionDiagram build_diagram(const Track& track) {
  const std::vector<Degeneracy> degs = detect_degeneracies(track);
  std::string forbidden;
  for (const auto& d : degs) {
    if (is_forbidden(d.type)) forbidden += "\n  " + d.describe();
  }
  if (!forbidden.empty()) throw DegenerateInput("forbidden degenerate pivot configurations:" + forbidden);

  RawArcs raw = extract_arcs(track);
  AttractionDiagram d;
  d.track = track;
  d.nodes = std::move(raw.nodes);
  d.arcs = std::move(raw.arcs);
  for (const auto& g : degs) d.degeneracies.push_back(g);

  for (const auto& node : d.nodes) {
    if (node.arcs.size() != 2) {
      throw DegenerateInput("critical set is not a union of simple cycles: node " + node.key + " has degree " +
                            std::to_string(node.arcs.size()));
    }
  }

  std::vector<char> used(d.arcs.size(), 0);
  for (std::size_t start = 0; start < d.arcs.size(); ++start) {
    if (used[start]) continue;
    CriticalCycle cycle;
    const int cid = static_cast<int>(d.cycles.size());
    int arc = static_cast<int>(start);
    int node = d.arcs[arc].node0;  // traverse away from node0
    while (true) {
      used[arc] = 1;
      d.arcs[arc].cycle = cid;
      cycle.arcs.push_back(arc);
      const Arc& a = d.arcs[arc];
      const int next_node = (a.node0 == node) ? a.node1 : a.node0;
      cycle.nodes.push_back(next_node);
      const Node& nn = d.nodes[next_node];
      const int next_arc = (nn.arcs[0] == arc) ? nn.arcs[1] : nn.arcs[0];
      node = next_node;
      if (next_arc == static_cast<int>(start)) break;
      if (used[next_arc]) throw DegenerateInput("critical set does not close into simple cycles");
      arc = next_arc;
    }
    int diag = 0;
    for (int id : cycle.arcs) diag += d.arcs[id].kind == ArcKind::Diagonal ? 1 : 0;
    if (diag != 0 && diag != static_cast<int>(cycle.arcs.size())) {
      throw DegenerateInput("a critical arc touches the main diagonal");
    }
    cycle.diagonal = diag != 0;
    if (cycle.diagonal) d.main_diagonal = cid;
    d.cycles.push_back(std::move(cycle));
  }

  for (std::size_t id = 0; id < d.nodes.size(); ++id) {
    const Node& node = d.nodes[id];
    const Arc& a = d.arcs[node.arcs[0]];
    const Arc& b = d.arcs[node.arcs[1]];
    const bool mixed = (a.kind == ArcKind::Stable && b.kind == ArcKind::Unstable) ||
                       (a.kind == ArcKind::Unstable && b.kind == ArcKind::Stable);
    if (!mixed) continue;
    if (node.ykind != YKind::Junction) {
      throw DegenerateInput("stable and unstable arcs meet away from a junction at " + node.key);
    }
    Pivot p;
    p.node = static_cast<int>(id);
    p.direction = (node.yindex % 2 == 0) ? PivotDirection::Forward : PivotDirection::Backward;
    p.stable_arc = a.kind == ArcKind::Stable ? a.id : b.id;
    p.unstable_arc = a.kind == ArcKind::Stable ? b.id : a.id;
    d.pivots.push_back(p);
  }

  classify_cycles(d);
  return d;
}

double arc_y_at(const AttractionDiagram& d, const Arc& arc, double X) {
  const Track& t = d.track;
  const double r = (X - t.edge_start(arc.col)) / t.edge_length(arc.col);
  switch (arc.shape) {
    case ArcShape::EdgeEdge:
      return t.row_start(Feature::Edge, arc.row_index) + (arc.ta + arc.tb * r) * t.edge_length(arc.row_index);
    case ArcShape::DiagonalEdge:
      return t.row_start(Feature::Edge, arc.row_index) + r * t.edge_length(arc.row_index);
    case ArcShape::Junction:
    case ArcShape::DiagonalVertical:
      return arc.Y0;
    case ArcShape::VertexEdge: {
      const int i = arc.row_index;
      const Point2 w = t.vertex(arc.col) + (r * t.edge_length(arc.col)) * t.direction(arc.col) - t.vertex(i);
      if (norm(w) == 0.0) return arc.Y0;
      return t.row_start(Feature::Vertex, i) + vertex_tau(t, i, w, arc.kind) * std::abs(t.turn(i));
    }
  }
  return 0.0;
}

std::vector<Point2> sample_arc(const AttractionDiagram& d, const Arc& arc, int samples) {
  std::vector<Point2> pts;
  pts.reserve(samples + 1);
  for (int k = 0; k <= samples; ++k) {
    const double u = static_cast<double>(k) / samples;
    if (arc.shape == ArcShape::DiagonalVertical) {
      pts.push_back({arc.X0, arc.Y0 + u * (arc.Y1 - arc.Y0)});
    } else if (k == 0) {
      pts.push_back({arc.X0, arc.Y0});
    } else if (k == samples) {
      pts.push_back({arc.X1, arc.Y1});
    } else {
      const double X = arc.X0 + u * (arc.X1 - arc.X0);
      pts.push_back({X, arc_y_at(d, arc, X)});
    }
  }
  return pts;
}

std::vector<Crossing> column_crossings(const AttractionDiagram& d, double X) {
  const double L = d.track.puppy_length();
  std::vector<Crossing> out;
  for (const auto& a : d.arcs) {
    if (a.shape == ArcShape::DiagonalVertical) continue;
    if (!(a.X0 < X && X < a.X1)) continue;
    double Y = arc_y_at(d, a, X);
    if (Y >= L) Y -= L;
    out.push_back({Y, a.id});
  }
  std::sort(out.begin(), out.end(), [](const Crossing& p, const Crossing& q) { return p.Y < q.Y; });
  return out;
}

ConfigClass implied_class(const AttractionDiagram& d, const std::vector<Crossing>& column, double Y) {
  auto it = std::upper_bound(column.begin(), column.end(), Y,
                             [](double y, const Crossing& c) { return y < c.Y; });
  if (it == column.end()) it = column.begin();
  return d.arcs[it->arc].kind == ArcKind::Unstable ? ConfigClass::Backward : ConfigClass::Forward;
}

void classify_cycles(AttractionDiagram& d) {
  const Track& t = d.track;
  const double L = t.puppy_length();
  const double P = t.perimeter();
  std::vector<double> ys, xs;
  for (const auto& node : d.nodes) {
    ys.push_back(node.Y);
    xs.push_back(node.X);
  }
  for (int k = 0; k < 2 * t.size(); ++k) ys.push_back(junction_y(t, k));
  for (int j = 0; j < t.size(); ++j) xs.push_back(t.edge_start(j));
  auto far_from = [](const std::vector<double>& vals, double v, double period) {
    for (double u : vals) {
      double gap = std::fmod(std::abs(u - v), period);
      gap = std::min(gap, period - gap);
      if (gap < 1e-7 * period) return false;
    }
    return true;
  };

  for (int attempt = 1; attempt <= 32; ++attempt) {
    const double fy = std::fmod(0.5 + attempt * 0.6180339887498949, 1.0);
    const double fx = std::fmod(0.5 + attempt * 0.7548776662466927, 1.0);
    const double ystar = fy * L;
    const double xstar = fx * P;
    if (!far_from(ys, ystar, L) || !far_from(xs, xstar, P)) continue;

    for (auto& c : d.cycles) {
      c.crossings_alpha = 0;
      c.crossings_beta = 0;
      for (int id : c.arcs) {
        const Arc& a = d.arcs[id];
        const double ylo = std::min(a.Y0, a.Y1), yhi = std::max(a.Y0, a.Y1);
        if (ylo < ystar && ystar < yhi) ++c.crossings_alpha;
        if (a.shape != ArcShape::DiagonalVertical && a.X0 < xstar && xstar < a.X1) ++c.crossings_beta;
      }
      if ((c.crossings_alpha - c.crossings_beta) % 2 != 0) {
        throw Error("crossing parities disagree for a critical cycle");
      }
      c.essential = c.crossings_alpha % 2 != 0;
    }
    d.alpha_y = ystar;
    d.beta_x = xstar;
    d.classified = true;
    if (d.essential_count() % 2 != 0) throw Error("odd number of essential critical cycles");
    d.river = -1;
    if (d.essential_count() == 2) {
      for (std::size_t c = 0; c < d.cycles.size(); ++c) {
        if (d.cycles[c].essential && static_cast<int>(c) != d.main_diagonal) d.river = static_cast<int>(c);
      }
    }
    return;
  }
  throw NonGenericTestLine("no generic test lines found after 32 draws");
}

DualDiagram build_dual_diagram(const Track& track, const AttractionDiagram& d) {
  const double L = track.puppy_length();
  DualDiagram dual;
  dual.line_y = std::fmod(d.alpha_y + 0.5 * L / (2 * track.size()), L);
  for (std::size_t c = 0; c < d.cycles.size(); ++c) {
    const CriticalCycle& cycle = d.cycles[c];
    DualDiagram::Curve curve;
    curve.cycle = static_cast<int>(c);
    int prev_node = cycle.nodes.back();
    double last_y = 0.0;
    bool first = true;
    for (std::size_t k = 0; k < cycle.arcs.size(); ++k) {
      const Arc& a = d.arcs[cycle.arcs[k]];
      std::vector<Point2> pts = sample_arc(d, a, 64);
      if (a.node0 != prev_node) std::reverse(pts.begin(), pts.end());
      prev_node = cycle.nodes[k];
      for (const Point2& p : pts) {
        const Configuration cfg{{track.wrap_s(p.x)}, track.puppy_param_at(p.y)};
        double y = p.y;
        if (!first) {
          while (y - last_y > L / 2) y -= L;
          while (last_y - y > L / 2) y += L;
        }
        first = false;
        last_y = y;
        curve.points.push_back({y, tangent_signed_distance(track, cfg)});
      }
    }
    // Crossings with the vertical line Y = line_y (mod L).
    for (std::size_t k = 1; k < curve.points.size(); ++k) {
      const double y0 = curve.points[k - 1].x, y1 = curve.points[k].x;
      const double lo = std::min(y0, y1), hi = std::max(y0, y1);
      const double first_line = std::ceil((lo - dual.line_y) / L) * L + dual.line_y;
      for (double line = first_line; line < hi; line += L) {
        if (line > lo) ++curve.crossings;
      }
    }
    curve.essential = curve.crossings % 2 != 0;
    dual.curves.push_back(std::move(curve));
  }
  return dual;
}

std::string diagram_json(const AttractionDiagram& d) {
  using nlohmann::json;
  json doc;
  doc["format"] = "puppydiagram v1";
  doc["track"] = d.track.name();
  doc["perimeter"] = to_decimal(from_double(d.track.perimeter()));
  doc["puppy_length"] = to_decimal(from_double(d.track.puppy_length()));
  json nodes = json::array();
  for (const auto& n : d.nodes) {
    json y;
    switch (n.ykind) {
      case YKind::Junction: y = {{"kind", "junction"}, {"index", n.yindex}}; break;
      case YKind::EdgeInterior: y = {{"kind", "edge"}, {"index", n.yindex}, {"t", to_string(n.t)}}; break;
      case YKind::VertexInterior:
        y = {{"kind", "vertex"}, {"index", n.yindex}, {"human_vertex", n.wvertex},
             {"branch", std::string(to_string(n.vkind))}};
        break;
    }
    nodes.push_back({{"key", n.key}, {"x", {{"edge", n.col}, {"r", to_string(n.r)}}}, {"y", y},
                     {"X", to_decimal(from_double(n.X))}, {"Y", to_decimal(from_double(n.Y))}});
  }
  doc["nodes"] = nodes;
  static const char* shapes[] = {"edge_edge", "vertex_edge", "junction", "diagonal_edge", "diagonal_vertical"};
  json arcs = json::array();
  for (const auto& a : d.arcs) {
    arcs.push_back({{"id", a.id},
                    {"kind", std::string(to_string(a.kind))},
                    {"shape", shapes[static_cast<int>(a.shape)]},
                    {"cell", {{"row", a.row == Feature::Edge ? "edge" : "vertex"}, {"index", a.row_index}, {"col", a.col}}},
                    {"r0", to_string(a.r0)},
                    {"r1", to_string(a.r1)},
                    {"nodes", {a.node0, a.node1}},
                    {"cycle", a.cycle}});
  }
  doc["arcs"] = arcs;
  json pivots = json::array();
  for (const auto& p : d.pivots) {
    pivots.push_back({{"node", p.node},
                      {"direction", p.direction == PivotDirection::Forward ? "forward" : "backward"},
                      {"stable_arc", p.stable_arc},
                      {"unstable_arc", p.unstable_arc}});
  }
  doc["pivots"] = pivots;
  json cycles = json::array();
  for (std::size_t c = 0; c < d.cycles.size(); ++c) {
    const auto& cy = d.cycles[c];
    std::string role = static_cast<int>(c) == d.main_diagonal ? "main_diagonal"
                       : static_cast<int>(c) == d.river       ? "river"
                                                              : "other";
    cycles.push_back({{"arcs", cy.arcs},
                      {"essential", cy.essential},
                      {"crossings_alpha", cy.crossings_alpha},
                      {"crossings_beta", cy.crossings_beta},
                      {"role", role}});
  }
  doc["cycles"] = cycles;
  json degs = json::array();
  for (const auto& g : d.degeneracies) degs.push_back({{"type", std::string(to_string(g.type))}, {"witness", g.describe()}});
  doc["degeneracies"] = degs;
  return doc.dump(1) + "\n";
}

}  // namespace puppy
