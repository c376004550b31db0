#include "puppy/service.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <thread>

#include <httplib.h>

namespace puppy {

namespace {

Reply error_reply(int status, const std::string& message) { return {status, {{"error", message}}}; }

double read_distance(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return parse_decimal(v.get<std::string>()).get_d();
  throw ParseError("dist must be a number or a decimal string");
}

Configuration read_start(const Track& t, const nlohmann::json& v) {
  if (v.is_string()) return parse_configuration(t, v.get<std::string>());
  if (v.is_object() && v.contains("x") && v.contains("y") && v["y"].is_string()) {
    const std::string x = v["x"].is_string() ? v["x"].get<std::string>() : wire_number(v["x"].get<double>());
    return parse_configuration(t, "x=" + x + ",y=" + v["y"].get<std::string>());
  }
  throw ParseError("start must be \"x=<s>,y=<feature>:<i>:<t>\" or {\"x\": .., \"y\": ..}");
}

nlohmann::json track_json(const Track& t) {
  nlohmann::json verts = nlohmann::json::array();
  for (int i = 0; i < t.size(); ++i) verts.push_back({wire_number(t.vertex(i).x), wire_number(t.vertex(i).y)});
  return {{"name", t.name()},
          {"vertices", verts},
          {"perimeter", wire_number(t.perimeter())},
          {"puppy_length", wire_number(t.puppy_length())}};
}

}  // namespace

Service::Service(ServiceOptions options) : options_(std::move(options)) {
  std::random_device rd;
  salt_ = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::size_t Service::size() const {
  std::lock_guard lock(mutex_);
  return sessions_.size();
}

std::string Service::fresh_id() {
  std::mt19937_64 mix(salt_ ^ (++counter_ * 0x9E3779B97F4A7C15ULL));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(mix()));
  return buf;
}

std::shared_ptr<Session> Service::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return nullptr;
  lru_.splice(lru_.begin(), lru_, it->second.second);
  return it->second.first;
}

Reply Service::create_session(const nlohmann::json& body) {
  auto s = std::make_shared<Session>();
  try {
    if (!body.is_object()) throw ParseError("request body must be a JSON object");
    if (body.contains("track")) {
      const auto& doc = body["track"];
      s->track = load_track(doc.is_string() ? doc.get<std::string>() : doc.dump());
    } else if (options_.default_track) {
      s->track = *options_.default_track;
    } else {
      throw ParseError("track is required");
    }
    s->start = body.contains("start") ? read_start(s->track, body["start"])
                                      : Configuration{{0.0}, {Feature::Edge, 0, 0.5}};
    s->unstable_backward = body.value("unstable_backward", false);
  } catch (const Error& e) {
    return error_reply(400, e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, e.what());
  }

  const SimTrace tr = simulate(s->track, {s->start, {}, s->unstable_backward});
  s->history = tr.events;
  s->current = tr.final;
  s->captured = tr.captured;

  {
    std::lock_guard lock(mutex_);
    do {
      s->id = fresh_id();
    } while (sessions_.count(s->id) != 0);
    lru_.push_front(s->id);
    sessions_[s->id] = {s, lru_.begin()};
    while (sessions_.size() > options_.capacity) {
      sessions_.erase(lru_.back());
      lru_.pop_back();
    }
  }
  return {200,
          {{"id", s->id},
           {"track", track_json(s->track)},
           {"start", configuration_to_json(s->track, s->start)},
           {"current", configuration_to_json(s->track, s->current)},
           {"events", events_to_json(s->track, s->history)},
           {"captured", s->captured}}};
}

Reply Service::step(const std::string& id, const nlohmann::json& body) {
  auto s = find(id);
  if (!s) return error_reply(404, "unknown session " + id);
  Leg leg;
  try {
    if (!body.is_object() || !body.contains("dir") || !body.contains("dist")) {
      throw ParseError("step needs dir and dist");
    }
    const std::string dir = body["dir"].get<std::string>();
    if (dir == "ccw") {
      leg.dir = WalkDir::CCW;
    } else if (dir == "cw") {
      leg.dir = WalkDir::CW;
    } else {
      throw ParseError("dir must be ccw or cw");
    }
    leg.dist = read_distance(body["dist"]);
    if (!(leg.dist >= 0.0) || !std::isfinite(leg.dist)) throw ParseError("dist must be finite and non-negative");
  } catch (const Error& e) {
    return error_reply(400, e.what());
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, e.what());
  }

  std::lock_guard lock(s->mutex);
  if (s->captured) return error_reply(410, "session " + id + " already captured");
  std::vector<SimEvent> batch;
  if (leg.dist > 0.0) {
    const SimTrace tr = simulate(s->track, {s->current, {leg}, s->unstable_backward});
    batch = tr.events;
    s->current = tr.final;
    s->captured = tr.captured;
    s->total_walk += tr.total_human_walk;
    s->legs.push_back(leg);
    s->history.insert(s->history.end(), batch.begin(), batch.end());
  }
  return {200,
          {{"events", events_to_json(s->track, batch)},
           {"current", configuration_to_json(s->track, s->current)},
           {"captured", s->captured},
           {"total_walk", wire_number(s->total_walk)}}};
}

std::optional<Reply> Service::analyse(Session& s) {
  if (s.analysed) return std::nullopt;
  try {
    AttractionDiagram d = build_diagram(s.track);
    classify_cycles(d);
    s.graph = build_strategy_graph(d);
    s.diagram = std::move(d);
  } catch (const DegenerateInput& e) {
    if (!options_.auto_chamfer) return error_reply(409, std::string("degenerate track: ") + e.what());
    try {
      s.chamfer = select_epsilon(s.track).map;
      AttractionDiagram d = build_diagram(s.chamfer->chamfered);
      classify_cycles(d);
      s.graph = build_strategy_graph(d);
      s.diagram = std::move(d);
    } catch (const Error& inner) {
      return error_reply(409, std::string("degenerate track, chamfering failed: ") + inner.what());
    }
  } catch (const Error& e) {
    return error_reply(500, e.what());
  }
  s.analysed = true;
  return std::nullopt;
}

Reply Service::hint(const std::string& id, const std::string& hand) {
  auto s = find(id);
  if (!s) return error_reply(404, "unknown session " + id);
  Want want;
  try {
    want = parse_want(hand.empty() ? "any" : hand);
  } catch (const Error& e) {
    return error_reply(400, e.what());
  }
  std::lock_guard lock(s->mutex);
  if (auto err = analyse(*s)) return *err;
  try {
    if (s->chamfer) {
      const PullbackReport r = chamfered_strategy(*s->chamfer, *s->diagram, *s->graph, s->current, want);
      nlohmann::json body = pullback_to_json(*s->chamfer, r);
      body["chamfered"] = true;
      return {200, body};
    }
    const Strategy st = find_strategy(*s->diagram, *s->graph, s->current, want);
    nlohmann::json body = strategy_to_json(*s->diagram, *s->graph, st);
    body["verify"] = verify_report_to_json(verify_strategy(*s->diagram, st));
    body["chamfered"] = false;
    return {200, body};
  } catch (const NoSuchHandedStrategy& e) {
    return error_reply(422, e.what());
  } catch (const DiagramPrecondition& e) {
    return error_reply(422, e.what());
  } catch (const Error& e) {
    return error_reply(500, e.what());
  }
}

Reply Service::diagram(const std::string& id) {
  auto s = find(id);
  if (!s) return error_reply(404, "unknown session " + id);
  std::lock_guard lock(s->mutex);
  if (auto err = analyse(*s)) return *err;
  nlohmann::json body = nlohmann::json::parse(diagram_json(*s->diagram));
  if (s->chamfer) {
    body["chamfered"] = true;
    body["chamfer"] = chamfer_map_to_json(*s->chamfer);
    body["marker"] = configuration_to_json(s->chamfer->chamfered, s->chamfer->to_chamfered(s->current));
  } else {
    body["chamfered"] = false;
    body["marker"] = configuration_to_json(s->track, s->current);
  }
  return {200, body};
}

Reply Service::summary(const std::string& id) {
  auto s = find(id);
  if (!s) return error_reply(404, "unknown session " + id);
  std::lock_guard lock(s->mutex);
  nlohmann::json legs = nlohmann::json::array();
  for (const Leg& l : s->legs) legs.push_back({{"dir", to_string(l.dir)}, {"dist", wire_number(l.dist)}});
  return {200,
          {{"id", s->id},
           {"track", track_json(s->track)},
           {"start", configuration_to_json(s->track, s->start)},
           {"current", configuration_to_json(s->track, s->current)},
           {"captured", s->captured},
           {"total_walk", wire_number(s->total_walk)},
           {"legs", legs},
           {"events", events_to_json(s->track, s->history)}}};
}

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::thread thread;
  explicit Impl(Service& s) : service(s) {}
};

namespace {

void send(httplib::Response& res, const Reply& r) {
  res.status = r.status;
  res.set_content(r.body.dump(2), "application/json");
}

Reply parse_body(const httplib::Request& req, nlohmann::json& out) {
  if (req.body.empty()) {
    out = nlohmann::json::object();
    return {200, {}};
  }
  try {
    out = nlohmann::json::parse(req.body);
  } catch (const nlohmann::json::exception& e) {
    return error_reply(400, std::string("body is not valid JSON: ") + e.what());
  }
  return {200, {}};
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  auto& svr = impl_->server;
  Service& sv = impl_->service;
  // httplib also sets SO_REUSEPORT, which would let a second server share a
  // busy port silently.
  svr.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof yes);
  });
  svr.Post("/sessions", [&sv](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    if (Reply r = parse_body(req, body); r.status != 200) return send(res, r);
    send(res, sv.create_session(body));
  });
  svr.Post(R"(/sessions/([0-9a-f]+)/step)", [&sv](const httplib::Request& req, httplib::Response& res) {
    nlohmann::json body;
    if (Reply r = parse_body(req, body); r.status != 200) return send(res, r);
    send(res, sv.step(req.matches[1], body));
  });
  svr.Get(R"(/sessions/([0-9a-f]+)/hint)", [&sv](const httplib::Request& req, httplib::Response& res) {
    send(res, sv.hint(req.matches[1], req.has_param("hand") ? req.get_param_value("hand") : "any"));
  });
  svr.Get(R"(/sessions/([0-9a-f]+)/diagram)", [&sv](const httplib::Request& req, httplib::Response& res) {
    send(res, sv.diagram(req.matches[1]));
  });
  svr.Get(R"(/sessions/([0-9a-f]+))", [&sv](const httplib::Request& req, httplib::Response& res) {
    send(res, sv.summary(req.matches[1]));
  });
  svr.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) res.set_content(nlohmann::json{{"error", "not found"}}.dump(2), "application/json");
  });
  svr.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    send(res, error_reply(500, what));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = -1;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (impl_->server.bind_to_port(host, port)) {
    bound = port;
  }
  if (bound < 0) return -1;
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::wait() {
  if (impl_->thread.joinable()) impl_->thread.join();
}

void HttpServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace puppy
