#pragma once

#include <cstddef>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "puppy/chamfer.hpp"
#include "puppy/diagram.hpp"
#include "puppy/dynamics.hpp"
#include "puppy/strategy.hpp"

namespace puppy {

struct ServiceOptions {
  std::size_t capacity = 256;  // sessions kept; least recently used go first
  bool auto_chamfer = true;
  std::optional<Track> default_track;  // used when POST /sessions has no track
};

struct Reply {
  int status = 200;
  nlohmann::json body;
};

// One pursuit game. current is Stable or Final between requests.
struct Session {
  std::string id;
  Track track;
  Configuration start;
  bool unstable_backward = false;
  Configuration current;
  bool captured = false;
  double total_walk = 0.0;
  std::vector<Leg> legs;
  std::vector<SimEvent> history;

  // Built on first hint/diagram request.
  bool analysed = false;
  std::optional<AttractionDiagram> diagram;
  std::optional<StrategyGraph> graph;
  std::optional<ChamferMap> chamfer;  // set when the track needed chamfering

  std::mutex mutex;
};

// Transport-independent session API; the HTTP layer only routes to it.
class Service {
 public:
  explicit Service(ServiceOptions options = {});

  // Body: {"track": <track document>, "start": "x=..,y=..", "unstable_backward": bool}.
  Reply create_session(const nlohmann::json& body);
  // Body: {"dir": "ccw"|"cw", "dist": "<number>"}.
  Reply step(const std::string& id, const nlohmann::json& body);
  Reply hint(const std::string& id, const std::string& hand);
  Reply diagram(const std::string& id);
  Reply summary(const std::string& id);

  std::size_t size() const;

 private:
  std::shared_ptr<Session> find(const std::string& id);
  std::string fresh_id();
  // Returns an error reply when the session's diagram cannot be built.
  std::optional<Reply> analyse(Session& s);

  ServiceOptions options_;
  mutable std::mutex mutex_;
  std::list<std::string> lru_;  // front = most recent
  std::unordered_map<std::string, std::pair<std::shared_ptr<Session>, std::list<std::string>::iterator>> sessions_;
  std::uint64_t counter_ = 0;
  std::uint64_t salt_ = 0;
};

// HTTP front end on a background thread.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and starts serving. Returns the bound
  // port, or -1 when binding fails.
  int start(const std::string& host, int port);
  // Blocks until stop() is called from elsewhere.
  void wait();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace puppy
