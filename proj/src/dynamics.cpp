#include "puppy/dynamics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

namespace puppy {

std::string_view to_string(RunDirection d) { return d == RunDirection::Forward ? "forward" : "backward"; }
std::string_view to_string(WalkDir d) { return d == WalkDir::CCW ? "ccw" : "cw"; }

namespace {

constexpr double kParamEps = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Canonical form with a little slack, so that values a rounding error away
// from a junction are treated as the junction.
PuppyParam snap(const Track& t, PuppyParam y) {
  if (y.feature == Feature::Edge) {
    if (y.t < kParamEps) y.t = 0.0;
    if (y.t > 1.0 - kParamEps) y.t = 1.0;
  } else {
    if (y.t < kParamEps) y.t = 0.0;
    if (y.t > 1.0 - kParamEps) y.t = 1.0;
  }
  return canonical(t, y);
}

// Local parameter of the stable direction at vertex i for the human offset
// w, when it lies in the vertex's turn interval.
std::optional<double> stable_tau(const Track& t, int i, Point2 w) {
  const int sigma = t.turn_sign(i);
  const double len = norm(w);
  const Point2 th = sigma > 0 ? Point2{-w.y / len, w.x / len} : Point2{w.y / len, -w.x / len};
  const Point2 d0 = t.direction(i - 1);
  const double tau = sigma * std::atan2(cross(d0, th), dot(d0, th)) / std::abs(t.turn(i));
  if (tau < -kParamEps || tau > 1.0 + kParamEps) return std::nullopt;
  return std::clamp(tau, 0.0, 1.0);
}

bool is_rest(ConfigClass c) { return c == ConfigClass::Stable || c == ConfigClass::Final; }

Configuration make_config(double s, PuppyParam y) { return {{s}, y}; }

}  // namespace

double puppy_arclength(const Track& t, const PuppyParam& y) {
  const PuppyParam c = canonical(t, y);
  if (c.feature == Feature::Vertex) return t.edge_start(c.index);
  return t.edge_start(c.index) + c.t * t.edge_length(c.index);
}

double boundary_gap(const Track& t, double a, double b) {
  const double d = std::abs(t.wrap_s(a) - t.wrap_s(b));
  return std::min(d, t.perimeter() - d);
}

RunTrace puppy_run(const Track& t, const Configuration& c, const RunOptions& options) {
  const Point2 h = t.human_position(c.x.s);
  PuppyParam y = snap(t, c.y);
  RunTrace trace;
  trace.start = c;
  trace.path.push_back(y);
  const ConfigClass cls = classify_at(t, h, y);
  if (cls == ConfigClass::Final) {
    trace.end = make_config(c.x.s, y);
    trace.captured = true;
    return trace;
  }
  if (cls == ConfigClass::Stable) throw Error("puppy_run needs a configuration that is not stable");
  const bool forward = cls == ConfigClass::Forward || cls == ConfigClass::PivotForward ||
                       (cls == ConfigClass::Unstable && !options.unstable_backward);
  trace.direction = forward ? RunDirection::Forward : RunDirection::Backward;

  auto finish = [&](PuppyParam end) {
    end = snap(t, end);
    if (trace.path.empty() || trace.path.back().feature != end.feature || trace.path.back().index != end.index ||
        trace.path.back().t != end.t) {
      trace.path.push_back(end);
    }
    trace.end = make_config(c.x.s, end);
    trace.captured = classify_at(t, h, end) == ConfigClass::Final;
    return trace;
  };

  const int limit = 4 * t.size() + 4;
  for (int step = 0; step < limit; ++step) {
    if (y.feature == Feature::Edge) {
      const int i = y.index;
      const double root = dot(h - t.vertex(i), t.direction(i)) / t.edge_length(i);
      if (forward) {
        if (root > y.t + kParamEps && root < 1.0 - kParamEps) return finish({Feature::Edge, i, root});
        y = {Feature::Vertex, t.wrap(i + 1), 0.0};
        trace.path.push_back(y);
        if (std::abs(root - 1.0) <= kParamEps && is_rest(classify_at(t, h, y))) return finish(y);
      } else {
        if (root < y.t - kParamEps && root > kParamEps) return finish({Feature::Edge, i, root});
        y = {Feature::Vertex, i, 1.0};
        trace.path.push_back(y);
        if (std::abs(root) <= kParamEps && is_rest(classify_at(t, h, y))) return finish(y);
      }
    } else {
      const int i = y.index;
      const Point2 w = h - t.vertex(i);
      if (norm(w) <= t.tolerance()) return finish(y);
      const std::optional<double> tau = stable_tau(t, i, w);
      if (forward) {
        if (tau && *tau > y.t + kParamEps && *tau < 1.0 - kParamEps) return finish({Feature::Vertex, i, *tau});
        if (y.t < 1.0) trace.path.push_back({Feature::Vertex, i, 1.0});
        y = {Feature::Edge, i, 0.0};
        if (tau && std::abs(*tau - 1.0) <= kParamEps && is_rest(classify_at(t, h, y))) return finish(y);
      } else {
        if (tau && *tau < y.t - kParamEps && *tau > kParamEps) return finish({Feature::Vertex, i, *tau});
        if (y.t > 0.0) trace.path.push_back({Feature::Vertex, i, 0.0});
        y = {Feature::Edge, t.wrap(i - 1), 1.0};
        if (tau && std::abs(*tau) <= kParamEps && is_rest(classify_at(t, h, y))) return finish(y);
      }
    }
  }
  throw NoStablePoint("puppy run found no stable configuration within one loop");
}

namespace {

struct Piece {
  Configuration c;
  double used = 0.0;
};

// Advances the human by at most budget along one piece of the current
// stable arc: the piece ends where the human reaches a vertex, where the
// puppy reaches a junction, or when the budget is spent.
Piece slide_piece(const Track& t, const Configuration& c, WalkDir dir, double budget) {
  const double g = dir == WalkDir::CCW ? 1.0 : -1.0;
  const double tiny = 1e-12 * t.perimeter();
  auto [j, u] = t.human_local(c.x.s);
  if (g < 0 && u <= tiny) {
    j = t.wrap(j - 1);
    u = t.edge_length(j);
  } else if (g > 0 && t.edge_length(j) - u <= tiny) {
    j = t.wrap(j + 1);
    u = 0.0;
  }
  const double bound = g > 0 ? t.edge_length(j) - u : u;
  const double smax = std::min(budget, bound);
  const Point2 h0 = t.vertex(j) + u * t.direction(j);
  const Point2 hv = g * t.direction(j);
  const PuppyParam y = snap(t, c.y);

  enum class Mode { Edge, Vertex, Stay };
  Mode mode = Mode::Stay;
  int feature = y.index;
  const double kRate = 1e-12;
  if (y.feature == Feature::Edge) {
    mode = Mode::Edge;
  } else if (y.t > 0.0 && y.t < 1.0) {
    mode = Mode::Vertex;
  } else if (y.t == 0.0) {
    const double rate = dot(hv, t.direction(y.index - 1));
    if (rate > kRate) {
      mode = Mode::Vertex;
    } else if (rate < -kRate) {
      mode = Mode::Edge;
      feature = t.wrap(y.index - 1);
    }
  } else {
    const double rate = dot(hv, t.direction(y.index));
    if (rate < -kRate) {
      mode = Mode::Vertex;
    } else if (rate > kRate) {
      mode = Mode::Edge;
    }
  }

  double sigma = smax;
  PuppyParam next = y;
  if (mode == Mode::Edge) {
    const int i = feature;
    const double len = t.edge_length(i);
    const double t0 = dot(h0 - t.vertex(i), t.direction(i)) / len;
    const double rate = dot(hv, t.direction(i)) / len;
    double event = kInf;
    double target = 0.0;
    if (rate > 0) {
      event = (1.0 - t0) / rate;
      target = 1.0;
    } else if (rate < 0) {
      event = -t0 / rate;
    }
    if (event <= smax) {
      sigma = std::max(event, 0.0);
      next = {Feature::Edge, i, target};
    } else {
      next = {Feature::Edge, i, t0 + rate * sigma};
    }
  } else if (mode == Mode::Vertex) {
    const int i = feature;
    const Point2 w0 = h0 - t.vertex(i);
    const double a0 = dot(w0, t.direction(i - 1)), da = dot(hv, t.direction(i - 1));
    const double b0 = dot(w0, t.direction(i)), db = dot(hv, t.direction(i));
    double ea = kInf, eb = kInf;
    if (da < 0 && y.t > 0.0) ea = std::max(a0 / -da, 0.0);
    if (db > 0 && y.t < 1.0) eb = std::max(-b0 / db, 0.0);
    if (ea <= smax && ea <= eb) {
      sigma = ea;
      next = {Feature::Vertex, i, 0.0};
    } else if (eb <= smax) {
      sigma = eb;
      next = {Feature::Vertex, i, 1.0};
    } else {
      const Point2 w = w0 + sigma * hv;
      const std::optional<double> tau = stable_tau(t, i, w);
      next = {Feature::Vertex, i, tau ? *tau : y.t};
    }
  }

  double s = c.x.s + g * sigma;
  if (sigma == bound) s = g > 0 ? t.edge_start(j) + t.edge_length(j) : t.edge_start(j);
  return {make_config(t.wrap_s(s), snap(t, next)), sigma};
}

}  // namespace

Configuration slide_step(const Track& t, const Configuration& c, WalkDir dir, double ds) {
  if (classify(t, c) != ConfigClass::Stable) throw Error("slide_step needs a stable configuration");
  Configuration cur = c;
  double left = ds;
  int idle = 0;
  while (left > 0.0) {
    const Piece p = slide_piece(t, cur, dir, left);
    cur = p.c;
    left -= p.used;
    idle = p.used > 0.0 ? 0 : idle + 1;
    if (idle > 8) throw Error("slide made no progress");
    const ConfigClass cls = classify(t, cur);
    if (cls != ConfigClass::Stable) throw ArcEndedAt("stable arc ended", cur, ds - left);
  }
  return cur;
}

SimTrace simulate(const Track& t, const HumanScript& script) {
  SimTrace trace;
  RunOptions ro;
  ro.unstable_backward = script.unstable_backward;
  Configuration cur{{t.wrap_s(script.start.x.s)}, snap(t, script.start.y)};

  auto resolve = [&]() {
    const ConfigClass cls = classify(t, cur);
    if (cls == ConfigClass::Final) {
      trace.captured = true;
      return;
    }
    if (cls == ConfigClass::Stable) return;
    SimEvent ev;
    ev.kind = SimEvent::Kind::Run;
    ev.run = puppy_run(t, cur, ro);
    cur = ev.run->end;
    trace.captured = ev.run->captured;
    trace.events.push_back(std::move(ev));
  };

  resolve();
  for (const Leg& leg : script.legs) {
    if (trace.captured) break;
    double left = leg.dist;
    SimEvent walk;
    walk.kind = SimEvent::Kind::Walk;
    walk.dir = leg.dir;
    auto flush = [&]() {
      if (walk.distance > 0.0) trace.events.push_back(walk);
      walk.distance = 0.0;
      walk.waypoints.clear();
    };
    int idle = 0;
    while (left > 0.0 && !trace.captured) {
      if (walk.waypoints.empty()) walk.waypoints.push_back(cur);
      const Piece p = slide_piece(t, cur, leg.dir, left);
      cur = p.c;
      left -= p.used;
      walk.distance += p.used;
      trace.total_human_walk += p.used;
      walk.waypoints.push_back(cur);
      idle = p.used > 0.0 ? 0 : idle + 1;
      if (idle > 8) throw Error("simulation made no progress");
      if (classify(t, cur) != ConfigClass::Stable) {
        flush();
        resolve();
      }
    }
    flush();
  }
  trace.final = cur;
  return trace;
}

namespace {

// Boundary grid for the oracle: every edge split into equal steps of about
// 1/resolution so that vertices are grid points.
struct Grid {
  std::vector<Point2> pos;
  std::vector<double> arc;  // arc-length of each node
  std::vector<int> edge;    // edge containing the node (node is its start or interior)
  std::vector<double> frac;
};

Grid make_grid(const Track& t, double resolution) {
  Grid g;
  for (int j = 0; j < t.size(); ++j) {
    const int m = std::max(1, static_cast<int>(std::ceil(t.edge_length(j) * resolution)));
    for (int k = 0; k < m; ++k) {
      const double f = static_cast<double>(k) / m;
      g.pos.push_back(t.vertex(j) + (f * t.edge_length(j)) * t.direction(j));
      g.arc.push_back(t.edge_start(j) + f * t.edge_length(j));
      g.edge.push_back(j);
      g.frac.push_back(f);
    }
  }
  return g;
}

int nearest_node(const Grid& g, const Track& t, double s) {
  s = t.wrap_s(s);
  const auto it = std::lower_bound(g.arc.begin(), g.arc.end(), s);
  const int n = static_cast<int>(g.arc.size());
  int hi = static_cast<int>(it - g.arc.begin()) % n;
  int lo = (hi + n - 1) % n;
  return boundary_gap(t, g.arc[lo], s) <= boundary_gap(t, g.arc[hi], s) ? lo : hi;
}

}  // namespace

SimTrace dense_oracle(const Track& t, const HumanScript& script, double resolution) {
  const Grid g = make_grid(t, resolution);
  const int n = static_cast<int>(g.pos.size());
  int hum = nearest_node(g, t, script.start.x.s);
  int pup = nearest_node(g, t, puppy_arclength(t, script.start.y));
  SimTrace trace;

  auto dist = [&](int k) { return norm(g.pos[hum] - g.pos[k]); };
  // The grid knows positions only. At a vertex the start's heading decides
  // which way the puppy leaves, so the first move follows its tag.
  int first_step = 0;
  {
    const ConfigClass cls = classify(t, script.start);
    if (cls == ConfigClass::Forward || cls == ConfigClass::PivotForward ||
        (cls == ConfigClass::Unstable && !script.unstable_backward)) {
      first_step = 1;
    } else if (cls == ConfigClass::Backward || cls == ConfigClass::PivotBackward || cls == ConfigClass::Unstable) {
      first_step = -1;
    }
  }
  auto descend = [&]() {
    const int from = pup;
    int moved = 0;
    if (first_step != 0) {
      const int k = (pup + n + first_step) % n;
      if (dist(k) < dist(pup)) {
        pup = k;
        ++moved;
      }
      first_step = 0;
    }
    while (pup != hum) {
      const int nx = (pup + 1) % n, pv = (pup + n - 1) % n;
      const double dc = dist(pup), dn = dist(nx), dp = dist(pv);
      const bool prefer_back = script.unstable_backward && dn == dp;
      if (dn < dc && (dn < dp || (dn == dp && !prefer_back))) {
        pup = nx;
      } else if (dp < dc) {
        pup = pv;
      } else {
        break;
      }
      ++moved;
    }
    if (moved > 2) {
      SimEvent ev;
      ev.kind = SimEvent::Kind::Run;
      RunTrace r;
      r.start = {{g.arc[hum]}, {Feature::Edge, g.edge[from], g.frac[from]}};
      r.end = {{g.arc[hum]}, {Feature::Edge, g.edge[pup], g.frac[pup]}};
      r.captured = pup == hum;
      ev.run = r;
      trace.events.push_back(std::move(ev));
    }
    trace.captured = pup == hum;
  };

  descend();
  for (const Leg& leg : script.legs) {
    if (trace.captured) break;
    const int step = leg.dir == WalkDir::CCW ? 1 : n - 1;
    double walked = 0.0;
    while (!trace.captured) {
      const int next = (hum + step) % n;
      const double len = boundary_gap(t, g.arc[hum], g.arc[next]);
      if (walked + 0.5 * len > leg.dist) break;
      hum = next;
      walked += len;
      descend();
    }
    trace.total_human_walk += walked;
  }
  trace.final = {{g.arc[hum]}, snap(t, {Feature::Edge, g.edge[pup], g.frac[pup]})};
  return trace;
}

std::string wire_number(double v) {
  if (v == 0.0 || std::abs(v) < 1e-300) return "0";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  std::string s = buf;
  if (s == "-0") s = "0";
  return s;
}

namespace {

double read_number(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    const std::string s = v.get<std::string>();
    double out = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError("not a number: " + s);
    return out;
  }
  throw ParseError("expected a number");
}

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t k = text.find(sep, start);
    out.emplace_back(text.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

double parse_double(const std::string& s) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) throw ParseError("not a number: " + s);
  return out;
}

WalkDir parse_dir(const std::string& s) {
  if (s == "ccw") return WalkDir::CCW;
  if (s == "cw") return WalkDir::CW;
  throw ParseError("direction must be ccw or cw, got " + s);
}

}  // namespace

Configuration parse_configuration(const Track& t, std::string_view text) {
  Configuration c;
  bool have_x = false, have_y = false;
  for (const std::string& part : split(text, ',')) {
    if (part.rfind("x=", 0) == 0) {
      c.x.s = t.wrap_s(parse_double(part.substr(2)));
      have_x = true;
    } else if (part.rfind("y=", 0) == 0) {
      const auto f = split(std::string_view(part).substr(2), ':');
      if (f.size() != 3) throw ParseError("puppy parameter must be edge:i:t or vertex:i:t");
      if (f[0] == "edge") {
        c.y.feature = Feature::Edge;
      } else if (f[0] == "vertex") {
        c.y.feature = Feature::Vertex;
      } else {
        throw ParseError("unknown puppy feature " + f[0]);
      }
      const double idx = parse_double(f[1]);
      if (idx != std::floor(idx) || idx < 0 || idx >= t.size()) throw ParseError("feature index out of range");
      c.y.index = static_cast<int>(idx);
      c.y.t = parse_double(f[2]);
      if (c.y.t < 0.0 || c.y.t > 1.0) throw ParseError("local parameter must lie in [0, 1]");
      have_y = true;
    } else {
      throw ParseError("unexpected configuration field " + part);
    }
  }
  if (!have_x || !have_y) throw ParseError("configuration needs x= and y=");
  return c;
}

std::string format_configuration(const Configuration& c) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "x=%.17g,y=%s:%d:%.17g", c.x.s, c.y.feature == Feature::Edge ? "edge" : "vertex",
                c.y.index, c.y.t);
  return buf;
}

HumanScript load_script(std::string_view document, const Configuration& default_start) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(document);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("script is not valid JSON: ") + e.what());
  }
  HumanScript script;
  script.start = default_start;
  const nlohmann::json* legs = &j;
  if (j.is_object()) {
    if (!j.contains("legs")) throw ParseError("script object needs legs");
    legs = &j["legs"];
    if (j.contains("start")) {
      const auto& st = j["start"];
      if (!st.is_object() || !st.contains("x") || !st.contains("y")) throw ParseError("start needs x and y");
      script.start.x.s = read_number(st["x"]);
      const auto f = split(st["y"].get<std::string>(), ':');
      if (f.size() != 3 || (f[0] != "edge" && f[0] != "vertex")) throw ParseError("bad start y");
      script.start.y = {f[0] == "edge" ? Feature::Edge : Feature::Vertex, static_cast<int>(parse_double(f[1])),
                        parse_double(f[2])};
    }
    if (j.contains("unstable")) script.unstable_backward = j["unstable"] == "backward";
  }
  if (!legs->is_array()) throw ParseError("legs must be an array");
  for (const auto& l : *legs) {
    if (!l.is_object() || !l.contains("dir") || !l.contains("dist")) throw ParseError("leg needs dir and dist");
    Leg leg;
    leg.dir = parse_dir(l["dir"].get<std::string>());
    leg.dist = read_number(l["dist"]);
    if (!(leg.dist >= 0.0) || !std::isfinite(leg.dist)) throw ParseError("leg distance must be finite and >= 0");
    script.legs.push_back(leg);
  }
  return script;
}

std::string script_json(const HumanScript& script) {
  nlohmann::json legs = nlohmann::json::array();
  for (const Leg& l : script.legs) legs.push_back({{"dir", to_string(l.dir)}, {"dist", wire_number(l.dist)}});
  nlohmann::json j;
  j["start"] = {{"x", wire_number(script.start.x.s)},
                {"y", std::string(script.start.y.feature == Feature::Edge ? "edge" : "vertex") + ":" +
                          std::to_string(script.start.y.index) + ":" + wire_number(script.start.y.t)}};
  j["legs"] = legs;
  if (script.unstable_backward) j["unstable"] = "backward";
  return j.dump(2) + "\n";
}

namespace {

nlohmann::json point_json(Point2 p) { return nlohmann::json::array({wire_number(p.x), wire_number(p.y)}); }

nlohmann::json param_json(const Track& t, const PuppyParam& y) {
  return {{"feature", y.feature == Feature::Edge ? "edge" : "vertex"},
          {"index", y.index},
          {"t", wire_number(y.t)},
          {"point", point_json(puppy_position(t, y))}};
}

}  // namespace

nlohmann::json configuration_to_json(const Track& t, const Configuration& c) {
  return {{"x", wire_number(c.x.s)},
          {"y", param_json(t, c.y)},
          {"human", point_json(t.human_position(c.x.s))},
          {"class", to_string(classify(t, c))}};
}

nlohmann::json run_to_json(const Track& t, const RunTrace& run) {
  nlohmann::json path = nlohmann::json::array();
  for (const PuppyParam& p : run.path) path.push_back(param_json(t, p));
  return {{"type", "run"},
          {"direction", to_string(run.direction)},
          {"start", configuration_to_json(t, run.start)},
          {"end", configuration_to_json(t, run.end)},
          {"path", path},
          {"captured", run.captured}};
}

nlohmann::json events_to_json(const Track& t, const std::vector<SimEvent>& events) {
  nlohmann::json out = nlohmann::json::array();
  for (const SimEvent& e : events) {
    if (e.kind == SimEvent::Kind::Run) {
      out.push_back(run_to_json(t, *e.run));
      continue;
    }
    nlohmann::json w = nlohmann::json::array();
    for (const Configuration& c : e.waypoints) w.push_back(configuration_to_json(t, c));
    out.push_back({{"type", "walk"}, {"dir", to_string(e.dir)}, {"distance", wire_number(e.distance)}, {"waypoints", w}});
  }
  return out;
}

std::string simtrace_json(const Track& t, const SimTrace& trace) {
  nlohmann::json j;
  j["format"] = "puppysimtrace v1";
  j["captured"] = trace.captured;
  j["total_human_walk"] = wire_number(trace.total_human_walk);
  j["final"] = configuration_to_json(t, trace.final);
  j["events"] = events_to_json(t, trace.events);
  return j.dump(2) + "\n";
}

}  // namespace puppy
