#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "puppy/error.hpp"
#include "puppy/track.hpp"

namespace puppy {

enum class RunDirection { Forward, Backward };
enum class WalkDir { CCW, CW };

std::string_view to_string(RunDirection d);
std::string_view to_string(WalkDir d);

// The puppy's instantaneous run to the first stable configuration in its
// descent direction. path holds the start, every feature boundary crossed
// and the end.
struct RunTrace {
  Configuration start;
  RunDirection direction = RunDirection::Forward;
  std::vector<PuppyParam> path;
  Configuration end;
  bool captured = false;
};

struct RunOptions {
  // At an Unstable start the puppy may pick either way; forward
  // unless this is set.
  bool unstable_backward = false;
};

// Throws std::invalid_argument-like Error when c is Stable; a Final start
// returns an empty run with captured set.
RunTrace puppy_run(const Track& track, const Configuration& c, const RunOptions& options = {});

// Thrown by slide_step when the stable arc ends (pivot) before ds is used up.
class ArcEndedAt : public ArcEnded {
 public:
  ArcEndedAt(const std::string& what, Configuration at, double consumed)
      : ArcEnded(what), at(at), consumed(consumed) {}
  Configuration at;
  double consumed;
};

// Human walks ds while the puppy tracks the moving stable configuration.
Configuration slide_step(const Track& track, const Configuration& c, WalkDir dir, double ds);

struct Leg {
  WalkDir dir = WalkDir::CCW;
  double dist = 0.0;
};

struct HumanScript {
  Configuration start;
  std::vector<Leg> legs;
  bool unstable_backward = false;
};

// One entry of the event log. A walk is a stretch of human motion with the
// configuration stable throughout; waypoints are the configurations at the
// piece boundaries (arc or column changes), from first to last.
struct SimEvent {
  enum class Kind { Walk, Run };
  Kind kind = Kind::Walk;
  WalkDir dir = WalkDir::CCW;
  double distance = 0.0;
  std::vector<Configuration> waypoints;
  std::optional<RunTrace> run;
};

struct SimTrace {
  std::vector<SimEvent> events;
  double total_human_walk = 0.0;
  bool captured = false;
  Configuration final;
};

SimTrace simulate(const Track& track, const HumanScript& script);

// Independent check: human and puppy on a fine grid of boundary points,
// puppy greedily descends the distance after every human step.
SimTrace dense_oracle(const Track& track, const HumanScript& script, double resolution = 1000.0);

// Arc-length position of the puppy on the boundary (vertex rows map to the
// vertex itself).
double puppy_arclength(const Track& track, const PuppyParam& y);
// Shortest distance along the boundary between two arc-length positions.
double boundary_gap(const Track& track, double a, double b);

// Script file: {"start": {"x": s, "y": "edge:i:t" | "vertex:i:t"}, "legs":
// [{"dir": "ccw", "dist": "2.5"}, ...]} or the bare leg array.
HumanScript load_script(std::string_view document, const Configuration& default_start = {});
std::string script_json(const HumanScript& script);

// Start syntax shared with the CLI: "x=<s>,y=<edge|vertex>:<i>:<t>".
Configuration parse_configuration(const Track& track, std::string_view text);
std::string format_configuration(const Configuration& c);

// Wire numbers: decimal strings with 12 significant digits.
std::string wire_number(double v);
nlohmann::json configuration_to_json(const Track& track, const Configuration& c);
nlohmann::json run_to_json(const Track& track, const RunTrace& run);
nlohmann::json events_to_json(const Track& track, const std::vector<SimEvent>& events);
std::string simtrace_json(const Track& track, const SimTrace& trace);

}  // namespace puppy
