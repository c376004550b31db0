#include "puppy/strategy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>

#include "puppy/error.hpp"

namespace puppy {

std::string_view to_string(Handedness h) { return h == Handedness::Dexter ? "dexter" : "sinister"; }

std::string_view to_string(Want w) {
  switch (w) {
    case Want::Any: return "any";
    case Want::Dexter: return "dexter";
    case Want::Sinister: return "sinister";
  }
  return "any";
}

Want parse_want(std::string_view text) {
  if (text == "any") return Want::Any;
  if (text == "dexter") return Want::Dexter;
  if (text == "sinister") return Want::Sinister;
  throw ParseError("handedness must be any, dexter or sinister");
}

namespace {

double cyc_dist(double a, double b, double period) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

bool at_cell_boundary(const Track& t, double X) {
  for (int j = 0; j < t.size(); ++j) {
    if (std::abs(X - t.edge_start(j)) < 1e-12 * t.perimeter()) return true;
  }
  return std::abs(X - t.perimeter()) < 1e-12 * t.perimeter();
}

// Splits every cycle at its pivot nodes and orders each piece left to right.
void build_chains(const AttractionDiagram& d, StrategyGraph& g) {
  g.chain_of_arc.assign(d.arcs.size(), -1);
  std::vector<int> pivot_of_node(d.nodes.size(), -1);
  for (std::size_t p = 0; p < d.pivots.size(); ++p) pivot_of_node[d.pivots[p].node] = static_cast<int>(p);

  for (std::size_t ci = 0; ci < d.cycles.size(); ++ci) {
    const CriticalCycle& cyc = d.cycles[ci];
    const int m = static_cast<int>(cyc.arcs.size());
    // nodes[k] is the exit node of arcs[k]; the entry node is nodes[k-1].
    std::vector<int> cut;
    for (int k = 0; k < m; ++k) {
      if (pivot_of_node[cyc.nodes[k]] >= 0) cut.push_back(k);
    }
    struct Piece {
      std::vector<int> arcs;
      std::vector<char> along;  // traversed from node0 to node1
      int entry_pivot = -1, exit_pivot = -1;
    };
    std::vector<Piece> pieces;
    auto entry_node = [&](int k) { return cyc.nodes[(k + m - 1) % m]; };
    auto push_arc = [&](Piece& pc, int k) {
      const Arc& a = d.arcs[cyc.arcs[k]];
      pc.arcs.push_back(a.id);
      pc.along.push_back(a.node0 == entry_node(k) ? 1 : 0);
    };
    if (cut.empty()) {
      Piece pc;
      for (int k = 0; k < m; ++k) push_arc(pc, k);
      pieces.push_back(pc);
    } else {
      for (std::size_t c = 0; c < cut.size(); ++c) {
        Piece pc;
        const int from = cut[c];
        const int to = cut[(c + 1) % cut.size()];
        pc.entry_pivot = pivot_of_node[cyc.nodes[from]];
        pc.exit_pivot = pivot_of_node[cyc.nodes[to]];
        int k = (from + 1) % m;
        while (true) {
          push_arc(pc, k);
          if (k == to) break;
          k = (k + 1) % m;
        }
        pieces.push_back(pc);
      }
    }

    for (Piece& pc : pieces) {
      double signed_width = 0.0;
      for (std::size_t k = 0; k < pc.arcs.size(); ++k) {
        const Arc& a = d.arcs[pc.arcs[k]];
        signed_width += (pc.along[k] ? 1.0 : -1.0) * (a.X1 - a.X0);
      }
      if (signed_width < 0.0) {
        std::reverse(pc.arcs.begin(), pc.arcs.end());
        std::reverse(pc.along.begin(), pc.along.end());
        for (auto& f : pc.along) f = !f;
        std::swap(pc.entry_pivot, pc.exit_pivot);
      }
      Chain ch;
      ch.cycle = static_cast<int>(ci);
      ch.kind = d.arcs[pc.arcs.front()].kind;
      ch.closed = cut.empty();
      ch.left_pivot = pc.entry_pivot;
      ch.right_pivot = pc.exit_pivot;
      const int id = static_cast<int>(g.chains.size());
      double u = d.arcs[pc.arcs.front()].X0;
      ch.u_left = u;
      for (std::size_t k = 0; k < pc.arcs.size(); ++k) {
        const Arc& a = d.arcs[pc.arcs[k]];
        if (a.kind != ch.kind) throw DegenerateInput("critical kind changes away from a pivot");
        if (!pc.along[k] && a.X1 > a.X0) throw DegenerateInput("critical chain is not x-monotone");
        ch.arcs.push_back(a.id);
        ch.arc_u.push_back(u);
        u += a.X1 - a.X0;
        g.chain_of_arc[a.id] = id;
      }
      ch.u_right = u;
      if (ch.kind == ArcKind::Diagonal) g.diagonal_chain = id;
      g.chains.push_back(std::move(ch));
    }
  }
}

Configuration pivot_configuration(const AttractionDiagram& d, const Pivot& p) {
  const Node& n = d.nodes[p.node];
  const Track& t = d.track;
  return {{t.wrap_s(n.X)}, t.puppy_param_at(t.wrap_y(n.Y))};
}

RunTrace run_from_pivot(const AttractionDiagram& d, const Pivot& p) {
  const Track& t = d.track;
  Configuration c = pivot_configuration(d, p);
  const ConfigClass cls = classify(t, c);
  if (cls == ConfigClass::Stable || cls == ConfigClass::Final) {
    // Rounding put the pivot on its stable side; step into the run.
    const double sgn = p.direction == PivotDirection::Forward ? 1.0 : -1.0;
    c.y = t.puppy_param_at(t.wrap_y(d.nodes[p.node].Y + sgn * 1e-9 * t.puppy_length()));
  }
  RunOptions ro;
  ro.unstable_backward = p.direction == PivotDirection::Backward;
  return puppy_run(t, c, ro);
}

}  // namespace

std::optional<ChainPoint> locate_on_chain(const AttractionDiagram& d, const StrategyGraph& g,
                                          const Configuration& c) {
  const Track& t = d.track;
  const double P = t.perimeter();
  const double L = t.puppy_length();
  const double X = t.wrap_s(c.x.s);
  const double Y = t.puppy_coordinate(canonical(t, c.y));
  const double tol = 1e-7 * L;
  for (double shift : {0.0, 1e-9 * P, -1e-9 * P, 1e-7 * P, -1e-7 * P}) {
    const double Xs = X + shift;
    if (Xs <= 0.0 || Xs >= P) continue;
    if (shift == 0.0 && at_cell_boundary(t, Xs)) continue;
    int best = -1;
    double best_d = tol;
    for (const Crossing& cr : column_crossings(d, Xs)) {
      if (d.arcs[cr.arc].kind == ArcKind::Unstable) continue;
      const double dist = cyc_dist(cr.Y, Y, L);
      if (dist < best_d) {
        best_d = dist;
        best = cr.arc;
      }
    }
    if (best < 0) continue;
    const int ch = g.chain_of_arc[best];
    const Chain& chain = g.chains[ch];
    const auto k = std::find(chain.arcs.begin(), chain.arcs.end(), best) - chain.arcs.begin();
    return ChainPoint{ch, chain.arc_u[k] + (X - d.arcs[best].X0)};
  }
  return std::nullopt;
}

StrategyGraph build_strategy_graph(const AttractionDiagram& d) {
  StrategyGraph g;
  build_chains(d, g);
  const int nc = static_cast<int>(g.chains.size());
  g.ccw_edge.assign(nc, -1);
  g.cw_edge.assign(nc, -1);

  for (int c = 0; c < nc; ++c) {
    const Chain& ch = g.chains[c];
    if (ch.kind != ArcKind::Stable || ch.closed) continue;
    for (int side = 0; side < 2; ++side) {
      const int p = side == 0 ? ch.right_pivot : ch.left_pivot;
      PivotEdge e;
      e.pivot = p;
      e.from_chain = c;
      e.dir = side == 0 ? WalkDir::CCW : WalkDir::CW;
      e.run = run_from_pivot(d, d.pivots[p]);
      const RunDirection expect =
          d.pivots[p].direction == PivotDirection::Forward ? RunDirection::Forward : RunDirection::Backward;
      if (e.run.direction != expect) throw Error("pivot run direction disagrees with the diagram");
      if (e.run.captured) {
        e.to_chain = g.diagonal_chain;
      } else {
        const auto at = locate_on_chain(d, g, e.run.end);
        if (!at) throw Error("pivot run landed off the stable critical set");
        e.to_chain = at->chain;
        e.landing_u = at->u;
      }
      (side == 0 ? g.ccw_edge : g.cw_edge)[c] = static_cast<int>(g.edges.size());
      g.edges.push_back(std::move(e));
    }
  }

  // Backward closure from the capturing edges, per handedness.
  g.dexter.assign(nc, 0);
  g.sinister.assign(nc, 0);
  if (g.diagonal_chain >= 0) {
    g.dexter[g.diagonal_chain] = 1;
    g.sinister[g.diagonal_chain] = 1;
  }
  for (int h = 0; h < 2; ++h) {
    std::vector<char>& mark = h == 0 ? g.dexter : g.sinister;
    const RunDirection final_dir = h == 0 ? RunDirection::Backward : RunDirection::Forward;
    bool changed = true;
    for (const auto& e : g.edges) {
      if (e.to_chain == g.diagonal_chain && e.run.direction == final_dir) mark[e.from_chain] = 1;
    }
    while (changed) {
      changed = false;
      for (const auto& e : g.edges) {
        if (e.to_chain != g.diagonal_chain && mark[e.to_chain] && !mark[e.from_chain]) {
          mark[e.from_chain] = 1;
          changed = true;
        }
      }
    }
  }
  return g;
}

Strategy find_strategy(const AttractionDiagram& d, const StrategyGraph& g, const Configuration& start,
                       Want want, const RunOptions& options) {
  const Track& t = d.track;
  Strategy s;
  s.start = {{t.wrap_s(start.x.s)}, canonical(t, start.y)};
  s.unstable_backward = options.unstable_backward;
  s.precondition_met = d.essential_count() <= 2;
  s.handedness = want == Want::Sinister ? Handedness::Sinister : Handedness::Dexter;

  Configuration cur = s.start;
  const ConfigClass cls = classify(t, cur);
  if (cls == ConfigClass::Final) return s;
  if (cls != ConfigClass::Stable) {
    s.initial_run = puppy_run(t, cur, options);
    cur = s.initial_run->end;
    if (s.initial_run->captured) {
      // A direct run to the human serves either handedness.
      if (want == Want::Any) {
        s.handedness = s.initial_run->direction == RunDirection::Backward ? Handedness::Dexter : Handedness::Sinister;
      }
      return s;
    }
  }
  const auto at = locate_on_chain(d, g, cur);
  if (!at) throw Error("start does not settle on the stable critical set");

  auto accepts = [&](const PivotEdge& e) {
    if (e.to_chain != g.diagonal_chain) return false;
    if (want == Want::Any) return true;
    return (e.run.direction == RunDirection::Backward) == (want == Want::Dexter);
  };

  // Hop-count BFS over chains; parent holds the edge used to enter a chain.
  const int nc = static_cast<int>(g.chains.size());
  std::vector<int> parent(nc, -2);
  std::deque<int> queue{at->chain};
  parent[at->chain] = -1;
  int goal_edge = -1;
  while (!queue.empty() && goal_edge < 0) {
    const int c = queue.front();
    queue.pop_front();
    for (int eid : {g.ccw_edge[c], g.cw_edge[c]}) {
      if (eid < 0) continue;
      const PivotEdge& e = g.edges[eid];
      if (accepts(e)) {
        goal_edge = eid;
        break;
      }
      if (e.to_chain == g.diagonal_chain || parent[e.to_chain] != -2) continue;
      parent[e.to_chain] = eid;
      queue.push_back(e.to_chain);
    }
  }
  if (goal_edge < 0) {
    std::string what = "no " + std::string(want == Want::Any ? "catching" : to_string(want)) +
                       " strategy from " + format_configuration(cur);
    if (!s.precondition_met) throw DiagramPrecondition(what + " (diagram has more than two essential cycles)");
    throw NoSuchHandedStrategy(what);
  }

  std::vector<int> path{goal_edge};
  for (int c = g.edges[goal_edge].from_chain; parent[c] >= 0; c = g.edges[parent[c]].from_chain) {
    path.push_back(parent[c]);
  }
  std::reverse(path.begin(), path.end());

  double u = at->u;
  for (int eid : path) {
    const PivotEdge& e = g.edges[eid];
    const Chain& ch = g.chains[e.from_chain];
    StrategyStep w;
    w.kind = StrategyStep::Kind::Walk;
    w.chain = e.from_chain;
    w.from_u = u;
    w.dir = e.dir;
    w.to_u = e.dir == WalkDir::CCW ? ch.u_right : ch.u_left;
    w.distance = std::abs(w.to_u - w.from_u);
    s.predicted_walk += w.distance;
    s.steps.push_back(w);
    StrategyStep drop;
    drop.kind = StrategyStep::Kind::Drop;
    drop.pivot = e.pivot;
    drop.run = e.run;
    s.steps.push_back(drop);
    u = e.landing_u;
  }
  s.handedness = g.edges[goal_edge].run.direction == RunDirection::Backward ? Handedness::Dexter : Handedness::Sinister;
  return s;
}

HumanScript compile_strategy(const Track& track, const Strategy& s) {
  HumanScript script;
  script.start = s.start;
  script.unstable_backward = s.unstable_backward;
  const double overshoot = 1e-7 * track.perimeter();
  double carried = 0.0;  // overshoot already walked along the landing chain
  WalkDir carried_dir = WalkDir::CCW;
  for (const StrategyStep& st : s.steps) {
    if (st.kind != StrategyStep::Kind::Walk) continue;
    double dist = st.distance + overshoot;
    if (carried > 0.0) dist += st.dir == carried_dir ? -carried : carried;
    script.legs.push_back({st.dir, std::max(dist, 0.0)});
    carried = overshoot;
    carried_dir = st.dir;
  }
  return script;
}

VerifyReport verify_strategy(const AttractionDiagram& d, const Strategy& s) {
  const Track& t = d.track;
  VerifyReport r;
  r.pivots = static_cast<int>(d.pivots.size());
  r.bound = t.perimeter() * r.pivots / 2.0;
  r.predicted = s.predicted_walk;
  r.trace = simulate(t, compile_strategy(t, s));
  r.captured = r.trace.captured;
  r.walk = r.trace.total_human_walk;
  r.within_bound = r.walk <= r.bound + 1e-6 * t.perimeter();
  if (!r.captured) {
    throw VerificationFailed("strategy replay from " + format_configuration(s.start) + " ended at " +
                             format_configuration(r.trace.final) + " without capture");
  }
  return r;
}

namespace {

struct ColumnPiece {
  double lo, hi;  // Y interval, hi may exceed L for the wrapping gap
};

// Crossings at X (inside slab k) rotated so entry i is the lower curve of
// the slab's i-th trapezoid; the column order is constant across a slab.
std::vector<Crossing> slab_column(const AttractionDiagram& d, const StrategyGraph& g, const RegionMap& m, int slab,
                                  double X) {
  const auto& ids = m.slabs[slab];
  const int nk = static_cast<int>(ids.size());
  std::vector<Crossing> col = column_crossings(d, X);
  if (static_cast<int>(col.size()) != nk || nk == 0) return {};
  for (int r = 0; r < nk; ++r) {
    bool ok = true;
    for (int i = 0; i < nk && ok; ++i) {
      ok = g.chain_of_arc[col[(i + r) % nk].arc] == m.trapezoids[ids[i]].lower_chain;
    }
    if (ok) {
      std::rotate(col.begin(), col.begin() + r, col.end());
      return col;
    }
  }
  return {};
}

std::vector<ColumnPiece> trapezoid_intervals(const AttractionDiagram& d, const StrategyGraph& g, const RegionMap& m,
                                             int slab, double X) {
  const double L = d.track.puppy_length();
  const auto col = slab_column(d, g, m, slab, X);
  if (col.empty()) throw Error("slab column order changed inside a slab");
  const int nk = static_cast<int>(col.size());
  std::vector<ColumnPiece> out;
  for (int i = 0; i < nk; ++i) {
    double lo = col[i].Y, hi = col[(i + 1) % nk].Y;
    if (hi <= lo) hi += L;
    out.push_back({lo, hi});
  }
  return out;
}

}  // namespace

RegionMap compute_regions(const AttractionDiagram& d, const StrategyGraph& g) {
  const Track& t = d.track;
  const double P = t.perimeter();
  const double L = t.puppy_length();
  RegionMap m;

  for (const Pivot& p : d.pivots) m.slab_x.push_back(t.wrap_s(d.nodes[p.node].X));
  std::sort(m.slab_x.begin(), m.slab_x.end());
  m.slab_x.erase(std::unique(m.slab_x.begin(), m.slab_x.end(),
                             [&](double a, double b) { return std::abs(a - b) < 1e-12 * P; }),
                 m.slab_x.end());
  if (m.slab_x.empty()) m.slab_x.push_back(0.0);
  const int ns = static_cast<int>(m.slab_x.size());
  auto slab_right = [&](int k) { return k + 1 < ns ? m.slab_x[k + 1] : m.slab_x[0] + P; };

  auto target_of = [&](const Trapezoid& tr) { return tr.cls == ConfigClass::Forward ? tr.upper_chain : tr.lower_chain; };

  m.slabs.resize(ns);
  for (int k = 0; k < ns; ++k) {
    double X = 0.5 * (m.slab_x[k] + slab_right(k));
    if (X >= P) X -= P;
    if (at_cell_boundary(t, X)) X += 1e-6 * (slab_right(k) - m.slab_x[k]);
    const auto col = column_crossings(d, X);
    const int nk = static_cast<int>(col.size());
    for (int i = 0; i < nk; ++i) {
      Trapezoid tr;
      tr.slab = k;
      tr.lower_arc = col[i].arc;
      tr.upper_arc = col[(i + 1) % nk].arc;
      tr.lower_chain = g.chain_of_arc[tr.lower_arc];
      tr.upper_chain = g.chain_of_arc[tr.upper_arc];
      double ylo = col[i].Y;
      double yhi = col[(i + 1) % nk].Y;
      if (i + 1 == nk) yhi += L;
      double ymid = 0.5 * (ylo + yhi);
      if (ymid >= L) ymid -= L;
      tr.cls = implied_class(d, col, ymid);
      tr.target_chain = target_of(tr);
      const Chain& tc = g.chains[tr.target_chain];
      if (tc.kind == ArcKind::Unstable) throw Error("a trapezoid runs onto an unstable arc");
      tr.dexter = g.dexter[tr.target_chain] != 0;
      tr.sinister = g.sinister[tr.target_chain] != 0;
      m.slabs[k].push_back(static_cast<int>(m.trapezoids.size()));
      m.trapezoids.push_back(tr);
    }
  }

  for (std::size_t i = 0; i < m.trapezoids.size(); ++i) {
    const Trapezoid& tr = m.trapezoids[i];
    if (!tr.dexter && !tr.sinister) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "trapezoid %zu in slab %d (x from %.9g) between arcs %d and %d is neither dexter nor sinister",
                    i, tr.slab, m.slab_x[tr.slab], tr.lower_arc, tr.upper_arc);
      throw CoverageGap(buf);
    }
  }

  // Adjacency: neighbours inside a slab share a bounding curve; across a
  // slab boundary the Y intervals just left and right of it overlap.
  const int nt = static_cast<int>(m.trapezoids.size());
  std::vector<std::vector<int>> adj(nt);
  for (int k = 0; k < ns; ++k) {
    const auto& ids = m.slabs[k];
    const int nk = static_cast<int>(ids.size());
    for (int i = 0; i < nk && nk > 1; ++i) {
      adj[ids[i]].push_back(ids[(i + 1) % nk]);
      adj[ids[(i + 1) % nk]].push_back(ids[i]);
    }
  }
  for (int k = 0; k < ns && ns > 1; ++k) {
    const int kn = (k + 1) % ns;
    const double xb = slab_right(k);
    const double eps = 1e-7 * std::min(slab_right(k) - m.slab_x[k], slab_right(kn) - m.slab_x[kn]);
    double xl = xb - eps, xr = xb + eps;
    if (xl >= P) xl -= P;
    if (xr >= P) xr -= P;
    const auto left = trapezoid_intervals(d, g, m, k, xl);
    const auto right = trapezoid_intervals(d, g, m, kn, xr);
    for (std::size_t a = 0; a < left.size(); ++a) {
      for (std::size_t b = 0; b < right.size(); ++b) {
        const ColumnPiece& p = left[a];
        const ColumnPiece& q = right[b];
        bool overlap = false;
        for (double sh : {-L, 0.0, L}) {
          if (p.lo < q.hi + sh && q.lo + sh < p.hi) overlap = true;
        }
        if (overlap) {
          adj[m.slabs[k][a]].push_back(m.slabs[kn][b]);
          adj[m.slabs[kn][b]].push_back(m.slabs[k][a]);
        }
      }
    }
  }

  auto connected = [&](bool Trapezoid::*flag) {
    std::vector<int> members;
    for (int i = 0; i < nt; ++i) {
      if (m.trapezoids[i].*flag) members.push_back(i);
    }
    if (members.empty()) return true;
    std::vector<char> seen(nt, 0);
    std::vector<int> stack{members.front()};
    seen[members.front()] = 1;
    int count = 0;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      ++count;
      for (int w : adj[v]) {
        if (!seen[w] && m.trapezoids[w].*flag) {
          seen[w] = 1;
          stack.push_back(w);
        }
      }
    }
    return count == static_cast<int>(members.size());
  };
  m.d_connected = connected(&Trapezoid::dexter);
  m.s_connected = connected(&Trapezoid::sinister);

  auto monotone = [&](bool Trapezoid::*flag) {
    for (const auto& ids : m.slabs) {
      int runs = 0;
      const int nk = static_cast<int>(ids.size());
      for (int i = 0; i < nk; ++i) {
        const bool in = m.trapezoids[ids[i]].*flag;
        const bool prev = m.trapezoids[ids[(i + nk - 1) % nk]].*flag;
        if (in && !prev) ++runs;
      }
      if (runs > 1) return false;
    }
    return true;
  };
  m.d_monotone = monotone(&Trapezoid::dexter);
  m.s_monotone = monotone(&Trapezoid::sinister);

  // The river lies in the closure of D and of S: in every slab it crosses,
  // one of its two neighbouring trapezoids belongs to each region.
  m.river_in_d = m.river_in_s = true;
  if (d.river >= 0) {
    for (const auto& ids : m.slabs) {
      const int nk = static_cast<int>(ids.size());
      for (int i = 0; i < nk; ++i) {
        const Trapezoid& above = m.trapezoids[ids[i]];
        if (d.arcs[above.lower_arc].cycle != d.river) continue;
        const Trapezoid& below = m.trapezoids[ids[(i + nk - 1) % nk]];
        m.river_in_d = m.river_in_d && (above.dexter || below.dexter);
        m.river_in_s = m.river_in_s && (above.sinister || below.sinister);
      }
    }
  }
  return m;
}

int trapezoid_at(const AttractionDiagram& d, const StrategyGraph& g, const RegionMap& m, double X, double Y) {
  const Track& t = d.track;
  X = t.wrap_s(X);
  Y = t.wrap_y(Y);
  if (at_cell_boundary(t, X)) X += 1e-9 * t.perimeter();
  const int ns = static_cast<int>(m.slab_x.size());
  int slab = ns - 1;
  for (int k = 0; k < ns; ++k) {
    if (m.slab_x[k] <= X) slab = k;
  }
  const auto col = slab_column(d, g, m, slab, X);
  if (col.empty()) return -1;
  const int nk = static_cast<int>(col.size());
  const double L = t.puppy_length();
  for (int i = 0; i < nk; ++i) {
    double lo = col[i].Y, hi = col[(i + 1) % nk].Y;
    if (hi <= lo) hi += L;
    for (double y : {Y, Y + L}) {
      if (lo < y && y < hi) return m.slabs[slab][i];
    }
  }
  return -1;
}

OrthogonalPlan orthogonal_strategy(const Track& track, const Configuration& start) {
  if (!track.is_orthogonal()) throw NotOrthogonal("track has an edge that is not axis-parallel");
  OrthogonalPlan plan;
  const int n = track.size();
  int u1 = 0;
  for (int i = 1; i < n; ++i) {
    const RPoint& a = track.exact_vertex(i);
    const RPoint& b = track.exact_vertex(u1);
    if (a.y > b.y || (a.y == b.y && a.x < b.x)) u1 = i;
  }
  plan.u1 = u1;
  plan.u2 = track.wrap(u1 - 1);
  const double P = track.perimeter();
  const double x0 = track.wrap_s(start.x.s);
  double phase1 = track.edge_start(u1) - x0;
  if (phase1 < 0.0) phase1 += P;
  const double phase2 = P - track.edge_length(plan.u2);
  plan.script.start = start;
  plan.script.legs = {{WalkDir::CCW, phase1}, {WalkDir::CCW, phase2}};
  return plan;
}

namespace {

std::string row_name(const Track& t, const PuppyParam& y) {
  const PuppyParam c = canonical(t, y);
  return (c.feature == Feature::Vertex ? "V" : "E") + std::to_string(c.index);
}

}  // namespace

DirectionalOutcome evaluate_directional(const Track& track, const Configuration& start, WalkDir dir,
                                        int max_laps) {
  DirectionalOutcome out;
  HumanScript script;
  script.start = start;
  const double P = track.perimeter();
  const double L = track.puppy_length();
  for (int lap = 0; lap < max_laps; ++lap) {
    script.legs = {{dir, P}};
    const SimTrace tr = simulate(track, script);
    out.walk += tr.total_human_walk;
    ++out.laps;
    if (tr.captured) {
      out.captured = true;
      return out;
    }
    std::string sig;
    for (const SimEvent& e : tr.events) {
      if (e.kind != SimEvent::Kind::Run) continue;
      const RunTrace& r = *e.run;
      sig += "h" + std::to_string(track.human_local(r.start.x.s).first) + ":" + row_name(track, r.start.y) + ">" +
             row_name(track, r.end.y) + (r.direction == RunDirection::Forward ? "f" : "b") + ";";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "end %lld %lld",
                  static_cast<long long>(std::llround(track.wrap_s(tr.final.x.s) / P * 1e6)),
                  static_cast<long long>(std::llround(track.puppy_coordinate(canonical(track, tr.final.y)) / L * 1e6)));
    sig += buf;
    out.signatures.push_back(sig);
    if (out.period_laps == 0) {
      for (int k = static_cast<int>(out.signatures.size()) - 2; k >= 0; --k) {
        if (out.signatures[k] == sig) {
          out.period_laps = static_cast<int>(out.signatures.size()) - 1 - k;
          break;
        }
      }
    }
    script.start = tr.final;
  }
  return out;
}

ObliviousOutcome evaluate_oblivious(const Track& track, const Configuration& start) {
  HumanScript script;
  script.start = start;
  const double P = track.perimeter();
  script.legs = {{WalkDir::CCW, 2.0 * P}, {WalkDir::CW, 2.0 * P}};
  const SimTrace tr = simulate(track, script);
  return {tr.captured, tr.total_human_walk};
}

nlohmann::json strategy_to_json(const AttractionDiagram& d, const StrategyGraph& g, const Strategy& s) {
  const Track& t = d.track;
  nlohmann::json j;
  j["format"] = "puppystrategy v1";
  j["start"] = configuration_to_json(t, s.start);
  j["handedness"] = std::string(to_string(s.handedness));
  j["predicted_walk"] = wire_number(s.predicted_walk);
  j["precondition_met"] = s.precondition_met;
  j["initial_run"] = s.initial_run ? run_to_json(t, *s.initial_run) : nlohmann::json(nullptr);
  nlohmann::json steps = nlohmann::json::array();
  for (const StrategyStep& st : s.steps) {
    nlohmann::json e;
    if (st.kind == StrategyStep::Kind::Walk) {
      e["type"] = "walk";
      e["chain"] = st.chain;
      e["arc"] = g.chains[st.chain].arcs.front();
      e["dir"] = std::string(to_string(st.dir));
      e["from"] = wire_number(t.wrap_s(st.from_u));
      e["to"] = wire_number(t.wrap_s(st.to_u));
      e["distance"] = wire_number(st.distance);
    } else {
      e["type"] = "pivot";
      e["pivot"] = st.pivot;
      e["run"] = run_to_json(t, *st.run);
    }
    steps.push_back(e);
  }
  j["steps"] = steps;
  nlohmann::json legs = nlohmann::json::array();
  for (const Leg& leg : compile_strategy(t, s).legs) {
    legs.push_back({{"dir", std::string(to_string(leg.dir))}, {"dist", wire_number(leg.dist)}});
  }
  j["script"] = legs;
  return j;
}

nlohmann::json verify_report_to_json(const VerifyReport& r) {
  return {{"captured", r.captured},     {"walk", wire_number(r.walk)},
          {"predicted", wire_number(r.predicted)}, {"bound", wire_number(r.bound)},
          {"within_bound", r.within_bound}, {"pivots", r.pivots}};
}

}  // namespace puppy
