#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "fixture_path.hpp"
#include "puppy/service.hpp"

using namespace puppy;

namespace {

nlohmann::json track_doc(const std::string& name) {
  std::ifstream in(fixture_path(name));
  std::stringstream ss;
  ss << in.rdbuf();
  return nlohmann::json::parse(ss.str());
}

nlohmann::json create_body(const std::string& name, const std::string& start) {
  return {{"track", track_doc(name)}, {"start", start}};
}

nlohmann::json step_body(const std::string& dir, double dist) { return {{"dir", dir}, {"dist", wire_number(dist)}}; }

bool walk_reverses(const nlohmann::json& strategy) {
  std::string last;
  for (const auto& st : strategy["steps"]) {
    if (st["type"] != "walk" || st["distance"] == "0") continue;
    const std::string dir = st["dir"];
    if (!last.empty() && dir != last) return true;
    last = dir;
  }
  return false;
}

}  // namespace

TEST_CASE("creating sessions resolves the start") {
  Service svc;
  const Reply r = svc.create_session(create_body("pentagon", "x=3.3,y=edge:2:0.4"));
  REQUIRE(r.status == 200);
  const std::string cls = r.body["current"]["class"];
  CHECK((cls == "stable" || cls == "final"));
  CHECK(r.body["id"].get<std::string>().size() == 16);
  CHECK(r.body["track"]["vertices"].size() == 5);

  const Reply fin = svc.create_session(create_body("rectangle", "x=3,y=edge:0:0.5"));
  REQUIRE(fin.status == 200);
  CHECK(fin.body["captured"] == true);
  CHECK(fin.body["events"].empty());

  CHECK(svc.create_session(create_body("bowtie", "x=0,y=edge:0:0.5")).status == 400);
  CHECK(svc.create_session({{"track", track_doc("pentagon")}, {"start", "x=1,y=edge:9:0.5"}}).status == 400);
  CHECK(svc.create_session(nlohmann::json::array()).status == 400);
  CHECK(svc.create_session({{"start", "x=1,y=edge:0:0.5"}}).status == 400);
}

TEST_CASE("stepping a rectangle session twice around captures") {
  Service svc;
  const Reply c = svc.create_session(create_body("rectangle", "x=2.5,y=edge:2:0.5"));
  REQUIRE(c.status == 200);
  REQUIRE(c.body["captured"] == false);
  const std::string id = c.body["id"];

  const Reply zero = svc.step(id, step_body("ccw", 0.0));
  CHECK(zero.status == 200);
  CHECK(zero.body["events"].empty());

  const Reply s = svc.step(id, step_body("ccw", 40.0));
  REQUIRE(s.status == 200);
  CHECK(s.body["captured"] == true);
  CHECK_FALSE(s.body["events"].empty());
  CHECK(svc.step(id, step_body("ccw", 1.0)).status == 410);
  CHECK(svc.step("0000000000000000", step_body("ccw", 1.0)).status == 404);
  CHECK(svc.step(id, {{"dir", "up"}, {"dist", "1"}}).status == 400);  // malformed before captured
  const Reply other = svc.create_session(create_body("rectangle", "x=2.5,y=edge:2:0.5"));
  CHECK(svc.step(other.body["id"], {{"dir", "up"}, {"dist", "1"}}).status == 400);
  CHECK(svc.step(other.body["id"], {{"dir", "cw"}, {"dist", "-1"}}).status == 400);
}

TEST_CASE("hints") {
  Service svc;
  SUBCASE("T4 mid-game hint verifies") {
    const Reply c = svc.create_session(create_body("quad", "x=1.7,y=edge:3:0.6"));
    const std::string id = c.body["id"];
    if (c.body["captured"] == false) svc.step(id, step_body("cw", 2.5));
    const Reply h = svc.hint(id, "any");
    REQUIRE(h.status == 200);
    CHECK(h.body["chamfered"] == false);
    CHECK(h.body["verify"]["captured"] == true);
    CHECK(h.body["verify"]["within_bound"] == true);
    CHECK(svc.hint(id, "left").status == 400);
  }
  SUBCASE("star hint reverses") {
    const Track t = fixture("star");
    const std::string start = "x=" + wire_number(t.edge_start(6)) + ",y=edge:38:0.5";
    const Reply c = svc.create_session(create_body("star", start));
    const Reply h = svc.hint(c.body["id"], "any");
    REQUIRE(h.status == 200);
    CHECK(h.body["verify"]["captured"] == true);
    CHECK(walk_reverses(h.body));
  }
  SUBCASE("final configuration gives an empty hint") {
    const Reply c = svc.create_session(create_body("pentagon", "x=0,y=vertex:0:0"));
    REQUIRE(c.body["captured"] == true);
    const Reply h = svc.hint(c.body["id"], "any");
    REQUIRE(h.status == 200);
    CHECK(h.body["steps"].empty());
    CHECK(h.body["script"].empty());
  }
  SUBCASE("degenerate tracks are chamfered for hints") {
    const Reply c = svc.create_session(create_body("triangle", "x=0.9,y=edge:2:0.3"));
    const Reply h = svc.hint(c.body["id"], "any");
    REQUIRE(h.status == 200);
    CHECK(h.body["chamfered"] == true);
    CHECK(h.body["captured"] == true);
    const Reply d = svc.diagram(c.body["id"]);
    REQUIRE(d.status == 200);
    CHECK(d.body["chamfered"] == true);
    CHECK(d.body.contains("marker"));
  }
  SUBCASE("without auto-chamfer a degenerate track is a conflict") {
    Service strict(ServiceOptions{256, false, std::nullopt});
    const Reply c = strict.create_session(create_body("rectangle", "x=2.5,y=edge:2:0.5"));
    CHECK(strict.hint(c.body["id"], "any").status == 409);
    CHECK(strict.diagram(c.body["id"]).status == 409);
    CHECK(strict.step(c.body["id"], step_body("cw", 1.0)).status == 200);
  }
}

TEST_CASE("reads do not change a session") {
  Service svc;
  const Reply c = svc.create_session(create_body("pocket", "x=5.5,y=edge:7:0.2"));
  const std::string id = c.body["id"];
  svc.step(id, step_body("ccw", 3.0));
  const std::string before = svc.summary(id).body.dump();
  const Reply d = svc.diagram(id);
  REQUIRE(d.status == 200);
  CHECK(d.body["marker"]["x"] == svc.summary(id).body["current"]["x"]);
  svc.hint(id, "dexter");
  svc.hint(id, "any");
  CHECK(svc.summary(id).body.dump() == before);
}

TEST_CASE("least recently used sessions are evicted") {
  Service svc(ServiceOptions{2, true, std::nullopt});
  const std::string a = svc.create_session(create_body("pentagon", "x=1,y=edge:3:0.5")).body["id"];
  const std::string b = svc.create_session(create_body("pentagon", "x=2,y=edge:3:0.5")).body["id"];
  CHECK(svc.summary(a).status == 200);  // a is now the most recent
  const std::string c = svc.create_session(create_body("pentagon", "x=3,y=edge:3:0.5")).body["id"];
  CHECK(svc.size() == 2);
  CHECK(svc.summary(b).status == 404);
  CHECK(svc.summary(a).status == 200);
  CHECK(svc.summary(c).status == 200);
}

TEST_CASE("live server: steps replay offline to the same event log") {
  Service svc;
  HttpServer server(svc);
  const int port = server.start("127.0.0.1", 0);
  REQUIRE(port > 0);
  httplib::Client cli("127.0.0.1", port);

  const auto created = cli.Post("/sessions", create_body("pocket", "x=14.2,y=edge:1:0.35").dump(), "application/json");
  REQUIRE(created);
  REQUIRE(created->status == 200);
  const nlohmann::json c = nlohmann::json::parse(created->body);
  const std::string id = c["id"];

  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> dist(0.0, 9.0);
  nlohmann::json batches = c["events"];
  std::vector<Leg> legs;
  for (int k = 0; k < 12; ++k) {
    const bool ccw = (rng() % 3) != 0;
    const double d = dist(rng);
    const auto res = cli.Post("/sessions/" + id + "/step", step_body(ccw ? "ccw" : "cw", d).dump(), "application/json");
    REQUIRE(res);
    if (res->status == 410) break;
    REQUIRE(res->status == 200);
    const nlohmann::json b = nlohmann::json::parse(res->body);
    for (const auto& e : b["events"]) batches.push_back(e);
    legs.push_back({ccw ? WalkDir::CCW : WalkDir::CW, std::stod(wire_number(d))});
    if (b["captured"] == true) break;
  }

  const auto got = cli.Get("/sessions/" + id);
  REQUIRE(got);
  REQUIRE(got->status == 200);
  const nlohmann::json summary = nlohmann::json::parse(got->body);
  CHECK(summary["events"].dump() == batches.dump());

  const Track t = fixture("pocket");
  const SimTrace offline = simulate(t, {parse_configuration(t, "x=14.2,y=edge:1:0.35"), legs, false});
  CHECK(events_to_json(t, offline.events).dump() == summary["events"].dump());
  CHECK(configuration_to_json(t, offline.final).dump() == summary["current"].dump());
  CHECK(offline.captured == summary["captured"].get<bool>());

  const auto missing = cli.Get("/sessions/ffffffffffffffff/hint");
  REQUIRE(missing);
  CHECK(missing->status == 404);
  const auto junk = cli.Post("/sessions/" + id + "/step", "{not json", "application/json");
  REQUIRE(junk);
  CHECK(junk->status == 400);
  const auto diag = cli.Get("/sessions/" + id + "/diagram");
  REQUIRE(diag);
  CHECK(diag->status == 200);
  const auto hint = cli.Get("/sessions/" + id + "/hint?hand=sinister");
  REQUIRE(hint);
  CHECK((hint->status == 200 || hint->status == 422));

  HttpServer clash(svc);
  CHECK(clash.start("127.0.0.1", port) == -1);
  server.stop();
}

TEST_CASE("concurrent clients") {
  Service svc;
  HttpServer server(svc);
  const int port = server.start("127.0.0.1", 0);
  REQUIRE(port > 0);

  httplib::Client setup("127.0.0.1", port);
  const auto shared_res = setup.Post("/sessions", create_body("pentagon", "x=4,y=edge:2:0.5").dump(), "application/json");
  REQUIRE(shared_res);
  const std::string shared = nlohmann::json::parse(shared_res->body)["id"];

  std::vector<std::thread> threads;
  std::vector<int> failures(6, 0);
  for (int k = 0; k < 6; ++k) {
    threads.emplace_back([&, k] {
      httplib::Client cli("127.0.0.1", port);
      const auto own = cli.Post("/sessions", create_body("quad", "x=" + std::to_string(k) + ",y=edge:1:0.5").dump(),
                                "application/json");
      if (!own || own->status != 200) {
        ++failures[k];
        return;
      }
      const std::string id = nlohmann::json::parse(own->body)["id"];
      for (int i = 0; i < 5; ++i) {
        const auto r = cli.Post("/sessions/" + id + "/step", step_body("cw", 0.7).dump(), "application/json");
        if (!r || (r->status != 200 && r->status != 410)) ++failures[k];
        const auto s = cli.Post("/sessions/" + shared + "/step", step_body("ccw", 0.01).dump(), "application/json");
        if (!s || (s->status != 200 && s->status != 410)) ++failures[k];
      }
    });
  }
  for (auto& th : threads) th.join();
  for (int f : failures) CHECK(f == 0);

  // The shared session saw 30 serialized steps; its log still replays.
  const Reply sum = svc.summary(shared);
  const Track t = fixture("pentagon");
  std::vector<Leg> legs;
  for (const auto& l : sum.body["legs"]) legs.push_back({WalkDir::CCW, std::stod(l["dist"].get<std::string>())});
  if (sum.body["captured"] == false) CHECK(legs.size() == 30);
  const SimTrace offline = simulate(t, {parse_configuration(t, "x=4,y=edge:2:0.5"), legs, false});
  CHECK(events_to_json(t, offline.events).dump() == sum.body["events"].dump());
  server.stop();
}
