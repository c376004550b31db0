#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "puppy/diagram.hpp"
#include "puppy/dynamics.hpp"

namespace puppy {

enum class Handedness { Dexter, Sinister };
enum class Want { Any, Dexter, Sinister };

std::string_view to_string(Handedness h);
std::string_view to_string(Want w);
Want parse_want(std::string_view text);

// A maximal x-monotone piece of a critical cycle between two pivots (or a
// whole cycle without pivots). Arcs run left to right; u is the unwrapped
// human coordinate along the chain, u_left <= u <= u_right.
struct Chain {
  ArcKind kind = ArcKind::Stable;
  int cycle = -1;
  std::vector<int> arcs;
  std::vector<double> arc_u;  // unwrapped X of each arc's left end
  double u_left = 0.0;
  double u_right = 0.0;
  int left_pivot = -1;   // index into diagram.pivots
  int right_pivot = -1;
  bool closed = false;
};

// The run taken when the human walks off one end of a stable chain.
struct PivotEdge {
  int pivot = -1;
  int from_chain = -1;
  WalkDir dir = WalkDir::CCW;
  RunTrace run;
  int to_chain = -1;
  double landing_u = 0.0;
};

struct StrategyGraph {
  std::vector<Chain> chains;
  std::vector<int> chain_of_arc;
  std::vector<PivotEdge> edges;
  std::vector<int> ccw_edge;  // per chain, -1 when none
  std::vector<int> cw_edge;
  int diagonal_chain = -1;
  // Per chain: a strategy ending with a backward (dexter) or forward
  // (sinister) pivot exists from every point of the chain.
  std::vector<char> dexter;
  std::vector<char> sinister;
};

StrategyGraph build_strategy_graph(const AttractionDiagram& diagram);

struct ChainPoint {
  int chain = -1;
  double u = 0.0;
};

// Chain through a stable or final configuration; nullopt when c is not on
// the stable critical set.
std::optional<ChainPoint> locate_on_chain(const AttractionDiagram& d, const StrategyGraph& g,
                                          const Configuration& c);

struct StrategyStep {
  enum class Kind { Walk, Drop };
  Kind kind = Kind::Walk;
  // Walk
  int chain = -1;
  double from_u = 0.0;
  double to_u = 0.0;
  WalkDir dir = WalkDir::CCW;
  double distance = 0.0;
  // Drop
  int pivot = -1;
  std::optional<RunTrace> run;
};

struct Strategy {
  Configuration start;
  bool unstable_backward = false;
  std::optional<RunTrace> initial_run;
  std::vector<StrategyStep> steps;
  Handedness handedness = Handedness::Dexter;
  double predicted_walk = 0.0;
  // False when the diagram has more than two essential cycles.
  bool precondition_met = true;
};

Strategy find_strategy(const AttractionDiagram& d, const StrategyGraph& g, const Configuration& start,
                       Want want = Want::Any, const RunOptions& options = {});

// Legs that replay the strategy; each leg overshoots its pivot slightly so
// the simulator's run fires.
HumanScript compile_strategy(const Track& track, const Strategy& s);

struct VerifyReport {
  bool captured = false;
  double walk = 0.0;
  double predicted = 0.0;
  double bound = 0.0;  // perimeter * pivots / 2
  bool within_bound = false;
  int pivots = 0;
  SimTrace trace;
};

// Throws VerificationFailed when the replay does not capture.
VerifyReport verify_strategy(const AttractionDiagram& d, const Strategy& s);

struct Trapezoid {
  int slab = -1;
  int lower_arc = -1;
  int upper_arc = -1;
  int lower_chain = -1;
  int upper_chain = -1;
  ConfigClass cls = ConfigClass::Forward;
  int target_chain = -1;  // where the puppy runs from inside the trapezoid
  bool dexter = false;
  bool sinister = false;
};

struct RegionMap {
  std::vector<double> slab_x;             // left boundary of each slab, ascending in [0, P)
  std::vector<std::vector<int>> slabs;    // trapezoids per slab, bottom to top
  std::vector<Trapezoid> trapezoids;
  bool d_connected = false;
  bool s_connected = false;
  bool d_monotone = false;  // D(x) is a single interval in every slab
  bool s_monotone = false;
  bool river_in_d = false;
  bool river_in_s = false;
};

// Throws CoverageGap naming a trapezoid that is neither dexter nor sinister.
RegionMap compute_regions(const AttractionDiagram& d, const StrategyGraph& g);
// Trapezoid containing the non-critical point (X, Y), or -1.
int trapezoid_at(const AttractionDiagram& d, const StrategyGraph& g, const RegionMap& m, double X, double Y);

struct OrthogonalPlan {
  int u1 = -1;  // leftmost vertex of maximum y
  int u2 = -1;  // next vertex clockwise
  HumanScript script;
};

// Throws NotOrthogonal.
OrthogonalPlan orthogonal_strategy(const Track& track, const Configuration& start);

struct DirectionalOutcome {
  bool captured = false;
  double walk = 0.0;
  int laps = 0;          // laps simulated
  int period_laps = 0;   // lap period of the repeating signature, 0 if none
  std::vector<std::string> signatures;  // one per completed lap
};

DirectionalOutcome evaluate_directional(const Track& track, const Configuration& start, WalkDir dir,
                                        int max_laps);

struct ObliviousOutcome {
  bool captured = false;
  double walk = 0.0;
};

// Two laps counterclockwise, then two laps clockwise.
ObliviousOutcome evaluate_oblivious(const Track& track, const Configuration& start);

nlohmann::json strategy_to_json(const AttractionDiagram& d, const StrategyGraph& g, const Strategy& s);
nlohmann::json verify_report_to_json(const VerifyReport& r);

}  // namespace puppy
