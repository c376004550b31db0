#include "puppy/chamfer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace puppy {

namespace {

// epsilon / |e|: exact when |e| is rational, otherwise a 128-bit dyadic
// approximation (so decimal inputs keep finite decimal expansions).
Rational cut_fraction(const Rational& epsilon, const RPoint& e) {
  const Rational len2 = dot(e, e);
  const Rational len = sqrt_rational(len2, 64);
  if (len * len == len2) return epsilon / len;
  mpf_class num(epsilon, 192), den(len2, 192), root(0, 192);
  mpf_sqrt(root.get_mpf_t(), den.get_mpf_t());
  mpf_class q = num / root;
  Rational r;
  mpq_set_f(r.get_mpq_t(), q.get_mpf_t());
  r.canonicalize();
  return r;
}

// Unwrapped piecewise-linear interpolation through (a, b) breakpoints with
// periods pa, pb; from_first selects the direction.
double interpolate(const std::vector<std::pair<double, double>>& bp, double pa, double pb, double v,
                   bool from_first) {
  auto key = [&](std::size_t k) { return from_first ? bp[k].first : bp[k].second; };
  auto val = [&](std::size_t k) { return from_first ? bp[k].second : bp[k].first; };
  const double period_in = from_first ? pa : pb;
  const double period_out = from_first ? pb : pa;
  const double k0 = std::floor((v - key(0)) / period_in);
  const double local = v - k0 * period_in;
  const std::size_t m = bp.size();
  std::size_t k = 0;
  while (k + 1 < m && key(k + 1) <= local) ++k;
  const double x0 = key(k);
  const double y0 = val(k);
  const double x1 = k + 1 < m ? key(k + 1) : key(0) + period_in;
  const double y1 = k + 1 < m ? val(k + 1) : val(0) + period_out;
  const double frac = x1 > x0 ? (local - x0) / (x1 - x0) : 0.0;
  return y0 + frac * (y1 - y0) + k0 * period_out;
}

double unwrapped_to_chamfered(const ChamferMap& m, double s) {
  return interpolate(m.breakpoints, m.original.perimeter(), m.chamfered.perimeter(), s, true);
}

double unwrapped_to_original(const ChamferMap& m, double s_hat) {
  return interpolate(m.breakpoints, m.original.perimeter(), m.chamfered.perimeter(), s_hat, false);
}

nlohmann::json exact_point(const RPoint& p) { return nlohmann::json::array({to_string(p.x), to_string(p.y)}); }

double gap(const Track& a, const Configuration& ca, const Track& b, const Configuration& cb) {
  return norm(puppy_position(a, ca.y) - puppy_position(b, cb.y));
}

}  // namespace

Rational ChamferMap::chamfered_fraction(int i, const Rational& f) const {
  const int n = original.size();
  const Rational& a = cut_after[original.wrap(i)];
  const Rational& b = cut_before[(original.wrap(i) + 1) % n];
  return (f - a) / (1 - a - b);
}

Rational ChamferMap::isosceles_defect(int i) const {
  const RPoint& v = original.exact_vertex(i);
  const RPoint a = chamfered.exact_vertex(2 * original.wrap(i)) - v;
  const RPoint b = chamfered.exact_vertex(2 * original.wrap(i) + 1) - v;
  return (dot(a, a) - dot(b, b)) / dot(a, a);
}

double ChamferMap::to_chamfered(double s) const { return chamfered.wrap_s(unwrapped_to_chamfered(*this, s)); }

double ChamferMap::to_original(double s_hat) const {
  return original.wrap_s(unwrapped_to_original(*this, s_hat));
}

PuppyParam ChamferMap::puppy_to_chamfered(const PuppyParam& raw) const {
  const int n = original.size();
  const PuppyParam y = canonical(original, raw);
  const int i = original.wrap(y.index);
  if (y.feature == Feature::Vertex) {
    // s_i points halfway between e_{i-1} and e_i, so each new corner takes
    // half the turn.
    if (y.t < 0.5) return {Feature::Vertex, 2 * i, 2.0 * y.t};
    return {Feature::Vertex, 2 * i + 1, 2.0 * y.t - 1.0};
  }
  const double len = original.edge_length(i);
  const double o = y.t * len;
  const double head = cut_after[i].get_d() * len;
  const double tail = cut_before[(i + 1) % n].get_d() * len;
  if (o <= head) return {Feature::Vertex, 2 * i + 1, 1.0};
  if (o >= len - tail) return {Feature::Vertex, 2 * ((i + 1) % n), 0.0};
  return {Feature::Edge, 2 * i + 1, (o - head) / chamfered.edge_length(2 * i + 1)};
}

Configuration ChamferMap::to_chamfered(const Configuration& c) const {
  return {{to_chamfered(c.x.s)}, puppy_to_chamfered(c.y)};
}

ChamferMap chamfer(const Track& track, const Rational& epsilon) {
  const int n = track.size();
  if (sgn(epsilon) <= 0) throw EpsilonTooLarge("epsilon must be positive, got " + to_decimal(epsilon));
  const double mfd = min_feature_distance(track);
  if (!(epsilon.get_d() < 0.5 * mfd)) {
    throw EpsilonTooLarge("epsilon " + to_decimal(epsilon) + " is not below half the minimum feature distance " +
                          to_decimal(from_double(0.5 * mfd)));
  }
  for (int i = 0; i < n; ++i) {
    const RPoint e = track.exact_edge(i);
    if (4 * epsilon * epsilon >= dot(e, e)) {
      throw EpsilonTooLarge("epsilon " + to_decimal(epsilon) + " is not below half the length of edge " +
                            std::to_string(i) + " (" + to_decimal(from_double(0.5 * track.edge_length(i))) + ")");
    }
  }

  ChamferMap m;
  m.original = track;
  m.epsilon = epsilon;
  m.cut_before.resize(n);
  m.cut_after.resize(n);
  for (int i = 0; i < n; ++i) {
    const Rational lambda = cut_fraction(epsilon, track.exact_edge(i));
    m.cut_after[i] = lambda;
    m.cut_before[(i + 1) % n] = lambda;
  }
  std::vector<RPoint> verts;
  verts.reserve(2 * n);
  for (int i = 0; i < n; ++i) {
    const RPoint& v = track.exact_vertex(i);
    verts.push_back(v - m.cut_before[i] * track.exact_edge(i - 1));
    verts.push_back(v + m.cut_after[i] * track.exact_edge(i));
  }
  std::string name = track.name().empty() ? "chamfered" : track.name() + "-chamfered";
  m.chamfered = Track::from_exact(std::move(verts), std::move(name));
  if (m.chamfered.reversed_on_load()) throw DegenerateGeometry("chamfering flipped the orientation");

  for (int i = 0; i < n; ++i) {
    const double s = track.edge_start(i);
    m.breakpoints.push_back({s - m.cut_before[i].get_d() * track.edge_length(i - 1), m.chamfered.edge_start(2 * i)});
    m.breakpoints.push_back({s + m.cut_after[i].get_d() * track.edge_length(i), m.chamfered.edge_start(2 * i + 1)});
  }
  return m;
}

EpsilonSelection select_epsilon(const Track& track) {
  const double e0 = 0.25 * std::min(0.5 * min_feature_distance(track), 0.5 * min_edge_length(track));
  // Twelve significant decimal digits, rounded down so the bounds still hold.
  const int digits = 12 - static_cast<int>(std::ceil(std::log10(e0)));
  mpz_class scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::max(digits, 0)));
  Rational epsilon(mpz_class(static_cast<long>(std::floor(e0 * scale.get_d()))), scale);
  if (digits > 18) epsilon = from_double(e0);
  epsilon.canonicalize();

  EpsilonSelection out;
  for (int attempt = 1; attempt <= 64; ++attempt) {
    ChamferMap m = chamfer(track, epsilon);
    std::string witness;
    for (const Degeneracy& d : detect_degeneracies(m.chamfered)) {
      if (!is_forbidden(d.type)) continue;
      if (!witness.empty()) witness += "; ";
      witness += d.describe();
    }
    out.attempts = attempt;
    if (witness.empty()) {
      out.map = std::move(m);
      return out;
    }
    out.rejected.push_back("epsilon " + to_decimal(epsilon) + ": " + witness);
    epsilon *= Rational(181, 256);
  }
  std::string msg = "no admissible epsilon after 64 attempts";
  for (const auto& r : out.rejected) msg += "\n  " + r;
  throw SelectionFailed(msg);
}

std::string_view to_string(ParamKind k) { return k == ParamKind::Edgy ? "edgy" : "verty"; }

ParamKind classify_param(const ChamferMap& map, HumanParam x) {
  const auto [e, o] = map.original.human_local(x.s);
  const double eps = map.eps();
  return (o <= eps || map.original.edge_length(e) - o <= eps) ? ParamKind::Verty : ParamKind::Edgy;
}

EdgyStart reach_edgy(const ChamferMap& map, const Configuration& start) {
  const Track& t = map.original;
  EdgyStart out;
  SimTrace tr = simulate(t, {start, {}, false});
  if (!tr.captured && classify_param(map, tr.final.x) == ParamKind::Verty) {
    // Walk to the middle of the nearest edgy stretch ahead.
    const auto [e, o] = t.human_local(tr.final.x.s);
    const double len = t.edge_length(e);
    const double walk = o <= map.eps() ? 0.5 * len - o : (len - o) + 0.5 * t.edge_length(e + 1);
    out.prefix.push_back({WalkDir::CCW, walk});
    tr = simulate(t, {start, out.prefix, false});
  }
  out.captured = tr.captured;
  out.original = tr.final;
  out.chamfered = map.to_chamfered(tr.final);
  return out;
}

PullbackReport pull_back(const ChamferMap& map, const Strategy& strategy_hat, const Configuration& start) {
  const Track& t = map.original;
  PullbackReport r;
  const EdgyStart es = reach_edgy(map, start);
  r.script.start = start;
  r.script.legs = es.prefix;
  for (const Leg& l : es.prefix) r.prefix_walk += l.dist;

  if (es.captured) {
    r.trace = simulate(t, r.script);
    r.captured = r.trace.captured;
    r.original_walk = r.trace.total_human_walk;
    if (r.captured) return r;
    throw PullbackFailed("edgy prefix reported a capture the replay does not reproduce");
  }

  const HumanScript hat = compile_strategy(map.chamfered, strategy_hat);
  const double eps = map.eps();
  const double step = 0.125 * eps;
  const double near = 2.0 * eps + t.tolerance();

  // Both tracks are replayed leg by leg. A leg end is mapped through the
  // correspondence and pushed on until it is edgy (only edgy endpoints are
  // equivalent). If the original then lags behind the chamfered replay (a
  // pivot near a vertex fires later on the original), the leg is extended
  // in steps of epsilon/8 until it catches up.
  SimTrace th = simulate(map.chamfered, {hat.start, {}, hat.unstable_backward});
  Configuration cur_hat = th.final;
  bool hat_captured = th.captured;
  Configuration cur = es.original;
  bool captured = false;
  double u_hat = hat.start.x.s;
  double u = es.original.x.s;
  int diverged_leg = -1;
  double diverged_gap = 0.0;
  for (std::size_t k = 0; k < hat.legs.size() && !captured; ++k) {
    const Leg& l = hat.legs[k];
    const double sign = l.dir == WalkDir::CCW ? 1.0 : -1.0;
    th = simulate(map.chamfered, {cur_hat, {l}, false});
    cur_hat = th.final;
    hat_captured = th.captured;
    r.chamfered_walk += l.dist;

    u_hat += sign * l.dist;
    double next = unwrapped_to_original(map, u_hat);
    next += std::round((u + sign * l.dist - next) / t.perimeter()) * t.perimeter();
    const auto [e, o] = t.human_local(next);
    if (o <= eps) {
      next += sign > 0 ? eps - o + 1e-3 * eps : -(o + eps + 1e-3 * eps);
    } else if (t.edge_length(e) - o <= eps) {
      const double rest = t.edge_length(e) - o;
      next += sign > 0 ? rest + eps + 1e-3 * eps : -(eps - rest + 1e-3 * eps);
    }
    const WalkDir dir = next >= u ? WalkDir::CCW : WalkDir::CW;
    const double base = std::abs(next - u);
    auto matches = [&](const SimTrace& s) {
      if (hat_captured) return s.captured;
      return s.captured || (classify(t, s.final) == ConfigClass::Stable &&
                            gap(t, s.final, map.chamfered, cur_hat) <= near);
    };
    const double limit = hat_captured ? 0.5 * t.perimeter() : 8.0 * eps;
    double extra = 0.0;
    SimTrace s = simulate(t, {cur, {{dir, base}}, false});
    while (!matches(s) && extra + step <= limit) {
      extra += step;
      s = simulate(t, {cur, {{dir, base + extra}}, false});
    }
    if (!matches(s)) {
      extra = 0.0;
      s = simulate(t, {cur, {{dir, base}}, false});
      if (diverged_leg < 0) {
        diverged_leg = static_cast<int>(k);
        diverged_gap = gap(t, s.final, map.chamfered, cur_hat);
      }
    }
    if (base + extra > 0.0) r.script.legs.push_back({dir, base + extra});
    u = next + (dir == WalkDir::CCW ? extra : -extra);
    cur = s.final;
    captured = s.captured;
  }
  if (!captured && hat_captured) {
    // The chamfered puppy was caught by a run the original does not make;
    // finish by walking on until the original captures too.
    const WalkDir first = hat.legs.empty() || hat.legs.back().dir == WalkDir::CCW ? WalkDir::CCW : WalkDir::CW;
    for (WalkDir dir : {first, first == WalkDir::CCW ? WalkDir::CW : WalkDir::CCW}) {
      for (double walk = step; walk <= 0.5 * t.perimeter(); walk += step) {
        if (simulate(t, {cur, {{dir, walk}}, false}).captured) {
          r.script.legs.push_back({dir, walk});
          captured = true;
          break;
        }
      }
      if (captured) break;
    }
  }

  r.trace = simulate(t, r.script);
  r.captured = r.trace.captured;
  r.original_walk = r.trace.total_human_walk;
  if (r.captured) return r;

  std::ostringstream why;
  why << "pulled-back script does not capture on the original track (epsilon " << to_decimal(map.epsilon) << ")";
  if (diverged_leg >= 0) {
    why << "; puppies diverge after leg " << diverged_leg << " by " << diverged_gap;
  } else {
    why << "; original ends at " << format_configuration(r.trace.final);
  }
  throw PullbackFailed(why.str());
}

PullbackReport chamfered_strategy(const ChamferMap& map, const AttractionDiagram& d_hat,
                                  const StrategyGraph& g_hat, const Configuration& start, Want want) {
  const EdgyStart es = reach_edgy(map, start);
  Strategy s;
  if (!es.captured) {
    s = find_strategy(d_hat, g_hat, es.chamfered, want);
    verify_strategy(d_hat, s);
  }
  return pull_back(map, s, start);
}

nlohmann::json chamfer_map_to_json(const ChamferMap& m) {
  nlohmann::json doc;
  doc["format"] = "puppychamfer v1";
  doc["name"] = m.original.name();
  doc["epsilon"] = to_string(m.epsilon);
  doc["epsilon_decimal"] = to_decimal(m.epsilon);
  nlohmann::json verts = nlohmann::json::array();
  for (int i = 0; i < m.original.size(); ++i) {
    verts.push_back({{"index", i},
                     {"original", exact_point(m.original.exact_vertex(i))},
                     {"v_prime", exact_point(m.chamfered.exact_vertex(2 * i))},
                     {"v_double_prime", exact_point(m.chamfered.exact_vertex(2 * i + 1))}});
  }
  doc["vertices"] = verts;
  nlohmann::json table = nlohmann::json::array();
  for (const auto& [s, s_hat] : m.breakpoints) table.push_back({wire_number(s), wire_number(s_hat)});
  doc["correspondence"] = table;
  doc["perimeter"] = wire_number(m.original.perimeter());
  doc["chamfered_perimeter"] = wire_number(m.chamfered.perimeter());
  return doc;
}

nlohmann::json pullback_to_json(const ChamferMap& m, const PullbackReport& r) {
  nlohmann::json doc;
  doc["format"] = "puppypullback v1";
  doc["epsilon"] = to_string(m.epsilon);
  doc["captured"] = r.captured;
  doc["prefix_walk"] = wire_number(r.prefix_walk);
  doc["chamfered_walk"] = wire_number(r.chamfered_walk);
  doc["original_walk"] = wire_number(r.original_walk);
  doc["script"] = nlohmann::json::parse(script_json(r.script));
  doc["events"] = events_to_json(m.original, r.trace.events);
  return doc;
}

}  // namespace puppy
