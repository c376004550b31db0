#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "puppy/diagram.hpp"
#include "puppy/dynamics.hpp"
#include "puppy/strategy.hpp"

namespace puppy {

// Chamfered vertex 2i is v_i' (on e_{i-1}), 2i+1 is v_i'' (on e_i). Chamfered
// edge 2i is the short edge s_i, edge 2i+1 the surviving middle of e_i.
struct ChamferMap {
  Track original;
  Track chamfered;
  Rational epsilon;
  // v_i' = v_i - cut_before[i] * e_{i-1},  v_i'' = v_i + cut_after[i] * e_i.
  // Both are epsilon / |e| (exact when |e| is rational).
  std::vector<Rational> cut_before;
  std::vector<Rational> cut_after;
  // Breakpoints of the piecewise-linear human parameter correspondence,
  // ascending in the original coordinate: (s, s_hat) for v_i' and v_i''.
  std::vector<std::pair<double, double>> breakpoints;

  double eps() const { return epsilon.get_d(); }
  // Exact fraction along chamfered edge 2i+1 of the point at fraction f of
  // original edge i (f must be edgy).
  Rational chamfered_fraction(int i, const Rational& f) const;
  // (|v_i' - v_i|^2 - |v_i'' - v_i|^2) / |v_i' - v_i|^2, exactly. Zero means
  // the cut triangle is isosceles, so both new angles equal pi/2 + alpha_i/2.
  Rational isosceles_defect(int i) const;
  double to_chamfered(double s) const;
  double to_original(double s_hat) const;
  PuppyParam puppy_to_chamfered(const PuppyParam& y) const;
  Configuration to_chamfered(const Configuration& c) const;
};

// Throws EpsilonTooLarge unless 0 < epsilon < min_feature_distance / 2 and
// epsilon < min_edge_length / 2.
ChamferMap chamfer(const Track& track, const Rational& epsilon);

struct EpsilonSelection {
  ChamferMap map;
  int attempts = 0;
  std::vector<std::string> rejected;  // one line per rejected epsilon
};

// Shrinks epsilon by 181/256 until the chamfered track has no type 1, 2a or
// 3a degeneracy. Throws SelectionFailed after 64 attempts.
EpsilonSelection select_epsilon(const Track& track);

enum class ParamKind { Edgy, Verty };
std::string_view to_string(ParamKind k);

// Verty when P(x) is within epsilon (inclusive) of an original vertex.
ParamKind classify_param(const ChamferMap& map, HumanParam x);

// Where the driver hands over to the chamfered strategy: the original start
// walked counterclockwise until the human is edgy.
struct EdgyStart {
  std::vector<Leg> prefix;
  Configuration original;   // configuration after the prefix, settled
  Configuration chamfered;  // its image on the chamfered track
  bool captured = false;    // the prefix alone already captured
};

EdgyStart reach_edgy(const ChamferMap& map, const Configuration& start);

struct PullbackReport {
  HumanScript script;  // on the original track, from the original start
  bool captured = false;
  double prefix_walk = 0.0;
  double chamfered_walk = 0.0;
  double original_walk = 0.0;
  SimTrace trace;
};

// strategy_hat must start from reach_edgy(map, start).chamfered. Maps its
// legs through the parameter correspondence and certifies the result by
// simulating on the original track. Throws PullbackFailed with the first
// leg where the two puppies drift more than 2 epsilon apart.
PullbackReport pull_back(const ChamferMap& map, const Strategy& strategy_hat, const Configuration& start);

// reach_edgy, find_strategy on the chamfered diagram, pull_back.
PullbackReport chamfered_strategy(const ChamferMap& map, const AttractionDiagram& d_hat,
                                  const StrategyGraph& g_hat, const Configuration& start,
                                  Want want = Want::Any);

nlohmann::json chamfer_map_to_json(const ChamferMap& map);
nlohmann::json pullback_to_json(const ChamferMap& map, const PullbackReport& r);

}  // namespace puppy
