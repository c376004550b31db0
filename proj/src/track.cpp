#include "puppy/track.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "puppy/error.hpp"

namespace puppy {

namespace {

int orient(const RPoint& a, const RPoint& b, const RPoint& c) { return sign(cross(b - a, c - a)); }

bool on_segment(const RPoint& a, const RPoint& b, const RPoint& p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_touch(const RPoint& a, const RPoint& b, const RPoint& c, const RPoint& d) {
  const int o1 = orient(a, b, c);
  const int o2 = orient(a, b, d);
  const int o3 = orient(c, d, a);
  const int o4 = orient(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

double point_segment_distance(Point2 p, Point2 a, Point2 b) {
  const Point2 ab = b - a;
  const double len2 = dot(ab, ab);
  double t = len2 > 0 ? dot(p - a, ab) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return norm(p - (a + t * ab));
}

}  // namespace

std::string_view to_string(ConfigClass c) {
  switch (c) {
    case ConfigClass::Forward: return "forward";
    case ConfigClass::Backward: return "backward";
    case ConfigClass::Final: return "final";
    case ConfigClass::Stable: return "stable";
    case ConfigClass::Unstable: return "unstable";
    case ConfigClass::PivotForward: return "pivot_forward";
    case ConfigClass::PivotBackward: return "pivot_backward";
  }
  return "?";
}

Track Track::from_exact(std::vector<RPoint> vertices, std::string name) {
  const int n = static_cast<int>(vertices.size());
  if (n < 3) throw DegenerateGeometry("track needs at least 3 vertices, got " + std::to_string(n));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (vertices[i] == vertices[j]) {
        throw DegenerateGeometry("repeated vertex " + std::to_string(i) + " = " + std::to_string(j));
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    const RPoint& prev = vertices[(i + n - 1) % n];
    const RPoint& cur = vertices[i];
    const RPoint& next = vertices[(i + 1) % n];
    const RPoint a = cur - prev;
    const RPoint b = next - cur;
    if (sign(cross(a, b)) == 0) {
      throw DegenerateGeometry(sign(dot(a, b)) < 0
                                   ? "zero interior angle (spike) at vertex " + std::to_string(i)
                                   : "collinear vertex " + std::to_string(i));
    }
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_touch(vertices[i], vertices[(i + 1) % n], vertices[j], vertices[(j + 1) % n])) {
        throw NotSimple("edges " + std::to_string(i) + " and " + std::to_string(j) + " intersect");
      }
    }
  }

  Track t;
  t.name_ = std::move(name);
  t.exact_ = std::move(vertices);
  if (sign(t.exact_signed_area2()) < 0) {
    std::reverse(t.exact_.begin(), t.exact_.end());
    t.reversed_ = true;
  }

  t.vertex_.resize(n);
  t.direction_.resize(n);
  t.length_.resize(n);
  t.start_.resize(n);
  t.turn_.resize(n);
  t.turn_sign_.resize(n);
  t.corner_dot_sign_.resize(n);
  for (int i = 0; i < n; ++i) t.vertex_[i] = to_point(t.exact_[i]);
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    const RPoint e = t.exact_edge(i);
    const double len = std::sqrt(dot(e, e).get_d());
    t.length_[i] = len;
    t.direction_[i] = {e.x.get_d() / len, e.y.get_d() / len};
    t.start_[i] = s;
    s += len;
  }
  t.perimeter_ = s;
  for (int i = 0; i < n; ++i) {
    const RPoint a = t.exact_edge(i - 1);
    const RPoint b = t.exact_edge(i);
    t.turn_sign_[i] = sign(cross(a, b));
    t.corner_dot_sign_[i] = sign(dot(a, b));
    const Point2 da = t.direction_[t.wrap(i - 1)];
    const Point2 db = t.direction_[i];
    t.turn_[i] = std::atan2(cross(da, db), dot(da, db));
  }
  t.row_start_.resize(2 * n);
  double y = 0.0;
  for (int i = 0; i < n; ++i) {
    t.row_start_[2 * i] = y;
    y += std::abs(t.turn_[i]);
    t.row_start_[2 * i + 1] = y;
    y += t.length_[i];
  }
  t.puppy_length_ = y;
  return t;
}

Track Track::from_decimals(const std::vector<std::pair<std::string, std::string>>& vertices,
                           std::string name) {
  std::vector<RPoint> pts;
  pts.reserve(vertices.size());
  for (const auto& [x, y] : vertices) pts.push_back({parse_decimal(x), parse_decimal(y)});
  return from_exact(std::move(pts), std::move(name));
}

Rational Track::exact_signed_area2() const {
  Rational a2 = 0;
  const int n = size();
  for (int i = 0; i < n; ++i) a2 += cross(exact_[i], exact_[(i + 1) % n]);
  return a2;
}

bool Track::is_orthogonal() const {
  for (int i = 0; i < size(); ++i) {
    const RPoint e = exact_edge(i);
    if (sign(e.x) != 0 && sign(e.y) != 0) return false;
  }
  return true;
}

double Track::row_start(Feature f, int i) const {
  return row_start_[2 * wrap(i) + (f == Feature::Edge ? 1 : 0)];
}

double Track::row_width(Feature f, int i) const {
  return f == Feature::Edge ? edge_length(i) : std::abs(turn(i));
}

double Track::puppy_coordinate(const PuppyParam& y) const {
  return row_start(y.feature, y.index) + y.t * row_width(y.feature, y.index);
}

PuppyParam Track::puppy_param_at(double coordinate) const {
  const double c = wrap_y(coordinate);
  auto it = std::upper_bound(row_start_.begin(), row_start_.end(), c);
  int row = static_cast<int>(it - row_start_.begin()) - 1;
  if (row < 0) row = 0;
  const Feature f = (row % 2 == 0) ? Feature::Vertex : Feature::Edge;
  const int i = row / 2;
  const double width = row_width(f, i);
  double t = width > 0 ? (c - row_start_[row]) / width : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return {f, i, t};
}

double Track::wrap_s(double s) const {
  double r = std::fmod(s, perimeter_);
  if (r < 0) r += perimeter_;
  if (r >= perimeter_) r = 0.0;
  return r;
}

double Track::wrap_y(double coordinate) const {
  double r = std::fmod(coordinate, puppy_length_);
  if (r < 0) r += puppy_length_;
  if (r >= puppy_length_) r = 0.0;
  return r;
}

std::pair<int, double> Track::human_local(double s) const {
  const double w = wrap_s(s);
  auto it = std::upper_bound(start_.begin(), start_.end(), w);
  int j = static_cast<int>(it - start_.begin()) - 1;
  if (j < 0) j = 0;
  return {j, std::clamp(w - start_[j], 0.0, length_[j])};
}

Point2 Track::human_position(double s) const {
  const auto [j, u] = human_local(s);
  return vertex_[j] + u * direction_[j];
}

PuppyParam canonical(const Track& track, PuppyParam y) {
  if (y.feature == Feature::Edge) {
    if (y.t <= 0.0) return {Feature::Vertex, track.wrap(y.index), 1.0};
    if (y.t >= 1.0) return {Feature::Vertex, track.wrap(y.index + 1), 0.0};
  }
  y.index = track.wrap(y.index);
  y.t = std::clamp(y.t, 0.0, 1.0);
  return y;
}

Point2 puppy_position(const Track& track, const PuppyParam& y) {
  if (y.feature == Feature::Vertex) return track.vertex(y.index);
  return track.vertex(y.index) + (y.t * track.edge_length(y.index)) * track.direction(y.index);
}

Point2 puppy_direction(const Track& track, const PuppyParam& y) {
  if (y.feature == Feature::Edge) return track.direction(y.index);
  if (y.t <= 0.0) return track.direction(y.index - 1);
  if (y.t >= 1.0) return track.direction(y.index);
  const Point2 d = track.direction(y.index - 1);
  const double a = y.t * track.turn(y.index);
  const double c = std::cos(a);
  const double s = std::sin(a);
  return {c * d.x - s * d.y, s * d.x + c * d.y};
}

ConfigClass classify_at(const Track& track, Point2 human, const PuppyParam& raw) {
  const PuppyParam y = canonical(track, raw);
  const Point2 p = puppy_position(track, y);
  const Point2 th = puppy_direction(track, y);
  const Point2 w = human - p;
  const double tol = track.tolerance();
  if (norm(w) <= tol) return ConfigClass::Final;
  const double f = dot(w, th);
  if (f > tol) return ConfigClass::Forward;
  if (f < -tol) return ConfigClass::Backward;
  if (y.feature == Feature::Edge) return ConfigClass::Stable;
  // Rate of the dot product as theta turns: sigma * cross(theta, w).
  const double rate = track.turn_sign(y.index) * cross(th, w);
  if (rate < 0) return ConfigClass::Stable;
  if (y.t <= 0.0) return ConfigClass::PivotForward;
  if (y.t >= 1.0) return ConfigClass::PivotBackward;
  return ConfigClass::Unstable;
}

ConfigClass classify(const Track& track, const Configuration& c) {
  return classify_at(track, track.human_position(c.x.s), c.y);
}

double tangent_signed_distance(const Track& track, const Configuration& c) {
  const Point2 h = track.human_position(c.x.s);
  return cross(puppy_direction(track, c.y), h - puppy_position(track, c.y));
}

double min_feature_distance(const Track& track) {
  const int n = track.size();
  double best = std::numeric_limits<double>::infinity();
  for (int v = 0; v < n; ++v) {
    for (int e = 0; e < n; ++e) {
      if (e == v || track.wrap(e + 1) == v) continue;
      best = std::min(best, point_segment_distance(track.vertex(v), track.vertex(e), track.vertex(e + 1)));
    }
  }
  return best;
}

double min_edge_length(const Track& track) {
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < track.size(); ++i) best = std::min(best, track.edge_length(i));
  return best;
}

Track load_track(std::string_view document) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("track file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("track file must be a JSON object");
  if (!doc.contains("format") || doc["format"] != "puppytrack v1") {
    throw ParseError("track file must declare \"format\": \"puppytrack v1\"");
  }
  if (!doc.contains("vertices") || !doc["vertices"].is_array()) {
    throw ParseError("track file needs a \"vertices\" array");
  }
  auto coordinate = [](const nlohmann::json& v) -> Rational {
    if (v.is_string()) return parse_decimal(v.get<std::string>());
    if (v.is_number_integer()) return Rational(mpz_class(v.dump(), 10));
    if (v.is_number_float()) return parse_decimal(v.dump());
    throw ParseError("vertex coordinate must be a decimal string or number");
  };
  std::vector<RPoint> pts;
  for (const auto& v : doc["vertices"]) {
    if (!v.is_array() || v.size() != 2) throw ParseError("each vertex must be an [x, y] pair");
    pts.push_back({coordinate(v[0]), coordinate(v[1])});
  }
  std::string name;
  if (doc.contains("name")) {
    if (!doc["name"].is_string()) throw ParseError("\"name\" must be a string");
    name = doc["name"].get<std::string>();
  }
  return Track::from_exact(std::move(pts), std::move(name));
}

Track load_track_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read track file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return load_track(ss.str());
}

std::string dump_track(const Track& track) {
  nlohmann::json doc;
  doc["format"] = "puppytrack v1";
  if (!track.name().empty()) doc["name"] = track.name();
  nlohmann::json verts = nlohmann::json::array();
  for (const auto& p : track.exact_vertices()) {
    // Exact decimal when the denominator allows it, otherwise p/q is not a
    // decimal literal, so fall back to a long expansion.
    auto text = [](const Rational& q) {
      mpz_class den = q.get_den();
      int twos = 0, fives = 0;
      while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) { den /= 2; ++twos; }
      while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) { den /= 5; ++fives; }
      if (den != 1) {
        mpf_class f(q, 512);
        mp_exp_t exp;
        std::string digits = f.get_str(exp, 10, 120);
        bool neg = !digits.empty() && digits[0] == '-';
        if (neg) digits.erase(0, 1);
        return std::string(neg ? "-" : "") + "0." + digits + "e" + std::to_string(exp);
      }
      const int k = std::max(twos, fives);
      mpz_class scale;
      mpz_ui_pow_ui(scale.get_mpz_t(), 10, k);
      mpz_class scaled = q.get_num() * (scale / q.get_den());
      std::string s = scaled.get_str();
      bool neg = !s.empty() && s[0] == '-';
      if (neg) s.erase(0, 1);
      if (k > 0) {
        if (static_cast<int>(s.size()) <= k) s.insert(0, k - s.size() + 1, '0');
        s.insert(s.size() - k, ".");
      }
      return (neg ? "-" : "") + s;
    };
    verts.push_back({text(p.x), text(p.y)});
  }
  doc["vertices"] = verts;
  return doc.dump(2) + "\n";
}

}  // namespace puppy
