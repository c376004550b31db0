#include "puppy/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>
#include <set>

#include "puppy/diagram.hpp"
#include "puppy/error.hpp"

namespace puppy {

std::uint64_t corpus_seed(std::uint64_t fallback) {
  if (const char* env = std::getenv("PUPPY_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end != env && *end == '\0') return v;
  }
  return fallback;
}

namespace {

// Exact decimal with four fractional digits.
Rational quantize(double v) {
  const long long q = std::llround(v * 10000.0);
  return Rational(mpz_class(std::to_string(q), 10), 10000);
}

bool all_obtuse(const Track& t) {
  for (int i = 0; i < t.size(); ++i) {
    if (t.corner_dot_sign(i) <= 0) return false;
  }
  return true;
}

}  // namespace

Track random_generic_polygon(std::mt19937_64& rng, int min_n, int max_n) {
  std::uniform_int_distribution<int> count(min_n, max_n);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const int n = count(rng);
    std::vector<double> gaps(n);
    double total = 0;
    for (auto& g : gaps) {
      g = 0.5 + unit(rng);
      total += g;
    }
    const double noise = 0.15 + 0.25 * unit(rng);
    const double stretch = 0.6 + 0.4 * unit(rng);
    std::vector<RPoint> pts;
    double angle = 2 * std::numbers::pi * unit(rng);
    for (int k = 0; k < n; ++k) {
      angle += 2 * std::numbers::pi * gaps[k] / total;
      const double radius = 5.0 * (1.0 - noise * unit(rng));
      pts.push_back({quantize(radius * std::cos(angle)), quantize(stretch * radius * std::sin(angle))});
    }
    try {
      Track t = Track::from_exact(std::move(pts));
      if (!all_obtuse(t)) continue;
      if (!detect_degeneracies(t).empty()) continue;
      return t;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error("random polygon generator gave up");
}

Track random_orthogonal_polygon(std::mt19937_64& rng, int cells) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 10000; ++attempt) {
    // Grow a polyomino without holes by adding 4-neighbours of the shape.
    std::set<std::pair<int, int>> shape{{0, 0}};
    while (static_cast<int>(shape.size()) < cells) {
      std::vector<std::pair<int, int>> frontier;
      for (auto [x, y] : shape) {
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          if (!shape.count({x + dx, y + dy})) frontier.push_back({x + dx, y + dy});
        }
      }
      std::uniform_int_distribution<std::size_t> pick(0, frontier.size() - 1);
      shape.insert(frontier[pick(rng)]);
    }
    int minx = 0, maxx = 0, miny = 0, maxy = 0;
    for (auto [x, y] : shape) {
      minx = std::min(minx, x);
      maxx = std::max(maxx, x);
      miny = std::min(miny, y);
      maxy = std::max(maxy, y);
    }
    // Directed boundary edges with the shape on the left (counterclockwise).
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> next;
    int edges = 0;
    for (auto [x, y] : shape) {
      if (!shape.count({x, y - 1})) next[{x, y}].push_back({x + 1, y}), ++edges;
      if (!shape.count({x + 1, y})) next[{x + 1, y}].push_back({x + 1, y + 1}), ++edges;
      if (!shape.count({x, y + 1})) next[{x + 1, y + 1}].push_back({x, y + 1}), ++edges;
      if (!shape.count({x - 1, y})) next[{x, y + 1}].push_back({x, y}), ++edges;
    }
    bool pinched = false;
    for (const auto& [p, outs] : next) pinched |= outs.size() != 1;
    if (pinched) continue;  // touching corners: boundary is not a simple curve
    std::vector<std::pair<int, int>> loop;
    auto start = next.begin()->first;
    auto cur = start;
    do {
      loop.push_back(cur);
      cur = next[cur][0];
    } while (cur != start);
    if (static_cast<int>(loop.size()) != edges) continue;  // hole or second component
    // Keep only corners.
    std::vector<std::pair<int, int>> corners;
    const int m = static_cast<int>(loop.size());
    for (int k = 0; k < m; ++k) {
      auto a = loop[(k + m - 1) % m], b = loop[k], c = loop[(k + 1) % m];
      const int cx = (b.first - a.first) * (c.second - b.second) - (b.second - a.second) * (c.first - b.first);
      if (cx != 0) corners.push_back(b);
    }
    // Random grid spacing.
    std::vector<Rational> xs(maxx - minx + 2), ys(maxy - miny + 2);
    xs[0] = 0;
    ys[0] = 0;
    for (std::size_t k = 1; k < xs.size(); ++k) xs[k] = xs[k - 1] + quantize(0.5 + 1.5 * unit(rng));
    for (std::size_t k = 1; k < ys.size(); ++k) ys[k] = ys[k - 1] + quantize(0.5 + 1.5 * unit(rng));
    std::vector<RPoint> pts;
    for (auto [x, y] : corners) pts.push_back({xs[x - minx], ys[y - miny]});
    try {
      return Track::from_exact(std::move(pts));
    } catch (const Error&) {
      continue;
    }
  }
  throw Error("orthogonal polygon generator gave up");
}

Track random_degenerate_polygon(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Track base = random_generic_polygon(rng, 5, 12);
    std::vector<RPoint> pts = base.exact_vertices();
    const int n = static_cast<int>(pts.size());
    std::uniform_int_distribution<int> pick(0, n - 1);
    const int k = pick(rng);
    const RPoint prev = pts[(k + n - 1) % n];
    const RPoint next = pts[(k + 1) % n];
    if (unit(rng) < 0.5) {
      // Acute spike: push v_k outward well past its neighbours.
      const RPoint mid = Rational(1, 2) * (prev + next);
      const RPoint out = pts[k] - mid;
      pts[k] = mid + Rational(3) * out;
    } else {
      // Exact right angle at v_k: a point of the Thales circle over
      // prev-next, on the perpendicular bisector.
      const RPoint mid = Rational(1, 2) * (prev + next);
      const RPoint half = next - mid;
      const RPoint normal{-half.y, half.x};
      pts[k] = mid - normal;
      if (unit(rng) < 0.5) pts[k] = mid + normal;
    }
    try {
      Track t = Track::from_exact(std::move(pts));
      bool degenerate = false;
      for (const auto& d : detect_degeneracies(t)) degenerate |= is_forbidden(d.type);
      if (degenerate) return t;
    } catch (const Error&) {
      continue;
    }
  }
  throw Error("degenerate polygon generator gave up");
}

std::vector<Track> generic_corpus(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  std::vector<Track> out;
  out.reserve(count);
  for (int k = 0; k < count; ++k) out.push_back(random_generic_polygon(rng));
  return out;
}

}  // namespace puppy
