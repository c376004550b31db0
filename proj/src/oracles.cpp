#include "puppy/oracles.hpp"

#include <cmath>

namespace puppy {

int exact_dot_sign(const Track& t, double X, double Y) {
  const auto [j, u] = t.human_local(X);
  const double rd = u / t.edge_length(j);
  const PuppyParam y = t.puppy_param_at(Y);
  const Point2 th = y.feature == Feature::Edge ? t.direction(y.index) : puppy_direction(t, y);
  // Floating-point filter: the double evaluation is within a few ulps of the
  // exact value, so a result far from zero already has the exact sign.
  const Point2 h = t.vertex(j) + rd * (t.vertex(j + 1) - t.vertex(j));
  const Point2 p = y.feature == Feature::Edge
                       ? t.vertex(y.index) + y.t * (t.vertex(y.index + 1) - t.vertex(y.index))
                       : t.vertex(y.index);
  const double f = dot(h - p, th);
  const double scale = std::abs(h.x) + std::abs(h.y) + std::abs(p.x) + std::abs(p.y) + 1.0;
  if (std::abs(f) > 1e-12 * scale) return f > 0 ? 1 : -1;

  const RPoint hq = t.exact_vertex(j) + from_double(rd) * t.exact_edge(j);
  if (y.feature == Feature::Edge) {
    const RPoint pq = t.exact_vertex(y.index) + from_double(y.t) * t.exact_edge(y.index);
    return sign(dot(hq - pq, t.exact_edge(y.index)));
  }
  const RPoint dir{from_double(th.x), from_double(th.y)};
  return sign(dot(hq - t.exact_vertex(y.index), dir));
}

GridOracleReport grid_oracle(const AttractionDiagram& d, int N) {
  const Track& t = d.track;
  const double P = t.perimeter(), L = t.puppy_length();
  GridOracleReport rep;
  for (int a = 0; a < N; ++a) {
    const double X = (a + 0.5) * P / N;
    const std::vector<Crossing> column = column_crossings(d, X);
    for (int b = 0; b < N; ++b) {
      const double Y = (b + 0.5) * L / N;
      ++rep.samples;
      const int s = exact_dot_sign(t, X, Y);
      if (s == 0) {
        ++rep.critical;
        continue;
      }
      bool tie = false;
      for (const auto& c : column) tie |= std::abs(c.Y - Y) < 1e-9 * L;
      if (tie) {
        ++rep.ties;
        continue;
      }
      const ConfigClass implied = implied_class(d, column, Y);
      if ((implied == ConfigClass::Forward) != (s > 0)) ++rep.mismatches;
    }
  }
  return rep;
}

Winding cycle_winding(const AttractionDiagram& d, int cycle) {
  const CriticalCycle& c = d.cycles[cycle];
  double dx = 0.0, dy = 0.0;
  int prev = c.nodes.back();
  for (std::size_t k = 0; k < c.arcs.size(); ++k) {
    const Arc& a = d.arcs[c.arcs[k]];
    const double sgn = a.node0 == prev ? 1.0 : -1.0;
    dx += sgn * (a.X1 - a.X0);
    dy += sgn * (a.Y1 - a.Y0);
    prev = c.nodes[k];
  }
  return {std::lround(dx / d.track.perimeter()), std::lround(dy / d.track.puppy_length())};
}

}  // namespace puppy
