#include "puppy/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace puppy {

namespace {

// Fixed two-decimal output keeps documents byte-identical across runs.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  std::string s = buf;
  if (s == "-0.00") s = "0.00";
  return s;
}

struct Frame {
  double x0, x1, y0, y1;  // data box
  double left, top, width, height;  // pixel box
  double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
  double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

void open_svg(std::ostringstream& out, double w, double h) {
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" viewBox=\"0 0 " << num(w) << " " << num(h) << "\">\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(w) << "\" height=\"" << num(h) << "\" fill=\"white\"/>\n";
}

void polyline(std::ostringstream& out, const Frame& f, const std::vector<Point2>& pts, const char* color,
              double width) {
  out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << num(width) << "\" points=\"";
  for (std::size_t k = 0; k < pts.size(); ++k) {
    if (k) out << ' ';
    out << num(f.px(pts[k].x)) << ',' << num(f.py(pts[k].y));
  }
  out << "\"/>\n";
}

const char* arc_color(ArcKind k) {
  switch (k) {
    case ArcKind::Stable: return "#2a9d3a";
    case ArcKind::Unstable: return "#d62828";
    case ArcKind::Diagonal: return "#1d3557";
  }
  return "black";
}

}  // namespace

std::string render_svg(const Track& track, const RenderOptions& options) {
  double minx = std::numeric_limits<double>::infinity(), maxx = -minx, miny = minx, maxy = -minx;
  for (int i = 0; i < track.size(); ++i) {
    const Point2 v = track.vertex(i);
    minx = std::min(minx, v.x);
    maxx = std::max(maxx, v.x);
    miny = std::min(miny, v.y);
    maxy = std::max(maxy, v.y);
  }
  const double span = std::max(maxx - minx, maxy - miny);
  const double pad = 0.08 * span;
  const double S = options.size;
  const double scale = (S - 40) / (span + 2 * pad);
  const double w = (maxx - minx + 2 * pad) * scale + 40;
  const double h = (maxy - miny + 2 * pad) * scale + 40;
  Frame f{minx - pad, maxx + pad, miny - pad, maxy + pad, 20, 20, w - 40, h - 40};

  std::ostringstream out;
  open_svg(out, w, h);
  out << "<polygon fill=\"#f1f4f8\" stroke=\"#1d3557\" stroke-width=\"2.00\" points=\"";
  for (int i = 0; i < track.size(); ++i) {
    if (i) out << ' ';
    out << num(f.px(track.vertex(i).x)) << ',' << num(f.py(track.vertex(i).y));
  }
  out << "\"/>\n";
  if (options.labels) {
    for (int i = 0; i < track.size(); ++i) {
      const Point2 v = track.vertex(i);
      // Push the label outward along the bisector of the two edge normals.
      const Point2 a = track.direction(i - 1), b = track.direction(i);
      Point2 out_dir{a.y + b.y, -(a.x + b.x)};
      const double len = norm(out_dir);
      if (len > 0) out_dir = (1.0 / len) * out_dir;
      out << "<circle cx=\"" << num(f.px(v.x)) << "\" cy=\"" << num(f.py(v.y)) << "\" r=\"3.00\" fill=\"#1d3557\"/>\n";
      out << "<text x=\"" << num(f.px(v.x) + 14 * out_dir.x) << "\" y=\"" << num(f.py(v.y) - 14 * out_dir.y + 4)
          << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">v" << i << "</text>\n";
    }
  }
  if (options.marker) {
    const Point2 hpos = track.human_position(options.marker->x.s);
    const Point2 ppos = puppy_position(track, options.marker->y);
    out << "<circle cx=\"" << num(f.px(hpos.x)) << "\" cy=\"" << num(f.py(hpos.y))
        << "\" r=\"6.00\" fill=\"#e76f51\"/>\n";
    out << "<circle cx=\"" << num(f.px(ppos.x)) << "\" cy=\"" << num(f.py(ppos.y))
        << "\" r=\"5.00\" fill=\"#8d5524\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_svg(const AttractionDiagram& d, const RenderOptions& options) {
  const Track& t = d.track;
  const double P = t.perimeter(), L = t.puppy_length();
  const double S = options.size;
  const double w = S, h = S;
  Frame f{0, P, 0, L, 40, 20, w - 60, h - 60};

  std::ostringstream out;
  open_svg(out, w, h);

  if (options.shade_backward) {
    out << "<g fill=\"#dde3ea\" stroke=\"none\" shape-rendering=\"crispEdges\">\n";
    const int K = options.shade_columns;
    for (int a = 0; a < K; ++a) {
      const double x0 = a * P / K, x1 = (a + 1) * P / K;
      const std::vector<Crossing> col = column_crossings(d, 0.5 * (x0 + x1));
      if (col.empty()) continue;
      for (std::size_t k = 0; k < col.size(); ++k) {
        const Crossing& upper = col[(k + 1) % col.size()];
        if (d.arcs[upper.arc].kind != ArcKind::Unstable) continue;
        const double ylo = col[k].Y;
        double yhi = upper.Y;
        auto rect = [&](double lo, double hi) {
          out << "<rect x=\"" << num(f.px(x0)) << "\" y=\"" << num(f.py(hi)) << "\" width=\""
              << num(f.px(x1) - f.px(x0)) << "\" height=\"" << num(f.py(lo) - f.py(hi)) << "\"/>\n";
        };
        if (k + 1 == col.size()) {
          rect(ylo, L);
          rect(0, yhi);
        } else {
          rect(ylo, yhi);
        }
      }
    }
    out << "</g>\n";
  }

  if (options.grid) {
    out << "<g stroke=\"#b0b8c4\" stroke-width=\"0.50\">\n";
    for (int j = 0; j <= t.size(); ++j) {
      const double x = j == t.size() ? P : t.edge_start(j);
      out << "<line x1=\"" << num(f.px(x)) << "\" y1=\"" << num(f.py(0)) << "\" x2=\"" << num(f.px(x))
          << "\" y2=\"" << num(f.py(L)) << "\"/>\n";
    }
    for (int k = 0; k <= 2 * t.size(); ++k) {
      const double y = k == 2 * t.size() ? L
                       : (k % 2 == 0) ? t.row_start(Feature::Vertex, k / 2)
                                      : t.row_start(Feature::Edge, k / 2);
      out << "<line x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(y)) << "\" x2=\"" << num(f.px(P))
          << "\" y2=\"" << num(f.py(y)) << "\"/>\n";
    }
    out << "</g>\n";
  }
  out << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width) << "\" height=\""
      << num(f.height) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.00\"/>\n";
  if (options.labels) {
    for (int j = 0; j < t.size(); ++j) {
      out << "<text x=\"" << num(f.px(t.edge_start(j) + 0.5 * t.edge_length(j))) << "\" y=\"" << num(h - 22)
          << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"middle\">e" << j << "</text>\n";
    }
    for (int i = 0; i < t.size(); ++i) {
      out << "<text x=\"34\" y=\"" << num(f.py(t.row_start(Feature::Edge, i) + 0.5 * t.edge_length(i)) + 3)
          << "\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">e" << i << "</text>\n";
    }
    out << "<text x=\"" << num(f.px(P / 2)) << "\" y=\"" << num(h - 6)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">human x</text>\n";
  }

  for (const auto& a : d.arcs) {
    polyline(out, f, sample_arc(d, a, a.shape == ArcShape::VertexEdge ? 64 : 1), arc_color(a.kind),
             a.kind == ArcKind::Diagonal ? 2.0 : 1.5);
  }
  for (const auto& p : d.pivots) {
    const Node& n = d.nodes[p.node];
    const bool fwd = p.direction == PivotDirection::Forward;
    out << "<circle cx=\"" << num(f.px(n.X)) << "\" cy=\"" << num(f.py(n.Y)) << "\" r=\"3.00\" fill=\""
        << (fwd ? "black" : "white") << "\" stroke=\"black\" stroke-width=\"1.00\"/>\n";
  }
  if (options.marker) {
    const double X = t.wrap_s(options.marker->x.s);
    const double Y = t.puppy_coordinate(canonical(t, options.marker->y));
    out << "<circle cx=\"" << num(f.px(X)) << "\" cy=\"" << num(f.py(Y))
        << "\" r=\"5.00\" fill=\"#e76f51\" stroke=\"black\" stroke-width=\"1.00\"/>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string render_svg(const DualDiagram& dual, const Track& t, const RenderOptions& options) {
  const double L = t.puppy_length();
  double lo = 0, hi = 0;
  for (const auto& c : dual.curves) {
    for (const auto& p : c.points) {
      lo = std::min(lo, p.y);
      hi = std::max(hi, p.y);
    }
  }
  const double pad = 0.05 * std::max(hi - lo, 1.0);
  const double S = options.size;
  const double w = S, h = 0.6 * S;
  Frame f{0, L, lo - pad, hi + pad, 40, 20, w - 60, h - 50};

  std::ostringstream out;
  open_svg(out, w, h);
  out << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width) << "\" height=\""
      << num(f.height) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1.00\"/>\n";
  out << "<line x1=\"" << num(f.px(0)) << "\" y1=\"" << num(f.py(0)) << "\" x2=\"" << num(f.px(L)) << "\" y2=\""
      << num(f.py(0)) << "\" stroke=\"#f4a261\" stroke-width=\"4.00\"/>\n";
  if (options.grid) {
    out << "<g stroke=\"#b0b8c4\" stroke-width=\"0.50\">\n";
    for (int i = 0; i < t.size(); ++i) {
      const double y = t.row_start(Feature::Vertex, i);
      out << "<line x1=\"" << num(f.px(y)) << "\" y1=\"" << num(f.py(lo - pad)) << "\" x2=\"" << num(f.px(y))
          << "\" y2=\"" << num(f.py(hi + pad)) << "\"/>\n";
    }
    out << "</g>\n";
  }
  static const char* palette[] = {"#1d3557", "#2a9d3a", "#7b2cbf", "#e76f51", "#0096c7", "#6c757d"};
  for (std::size_t c = 0; c < dual.curves.size(); ++c) {
    // Split the unwrapped curve wherever it leaves the fundamental domain.
    std::vector<Point2> piece;
    auto flush = [&]() {
      if (piece.size() > 1) polyline(out, f, piece, palette[c % 6], dual.curves[c].essential ? 1.8 : 1.2);
      piece.clear();
    };
    int last_band = 0;
    bool first = true;
    for (const auto& p : dual.curves[c].points) {
      const int band = static_cast<int>(std::floor(p.x / L));
      if (!first && band != last_band) flush();
      first = false;
      last_band = band;
      piece.push_back({p.x - band * L, p.y});
    }
    flush();
  }
  if (options.labels) {
    out << "<text x=\"" << num(f.px(L / 2)) << "\" y=\"" << num(h - 8)
        << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">puppy y</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace puppy
