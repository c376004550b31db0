#pragma once

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "puppy/rational.hpp"

namespace puppy {

struct Point2 {
  double x = 0.0;
  double y = 0.0;
};

inline Point2 operator+(Point2 a, Point2 b) { return {a.x + b.x, a.y + b.y}; }
inline Point2 operator-(Point2 a, Point2 b) { return {a.x - b.x, a.y - b.y}; }
inline Point2 operator*(double k, Point2 a) { return {k * a.x, k * a.y}; }
inline double dot(Point2 a, Point2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Point2 a, Point2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Point2 a) { return std::hypot(a.x, a.y); }
inline Point2 to_point(const RPoint& p) { return {p.x.get_d(), p.y.get_d()}; }

enum class Feature { Vertex, Edge };

// Position of the puppy on the extended parameter circle. On Edge(i) the
// local parameter t is the fraction of the edge length; on Vertex(i) it is
// the fraction of the turn from direction(e_{i-1}) to direction(e_i).
struct PuppyParam {
  Feature feature = Feature::Edge;
  int index = 0;
  double t = 0.0;
};

// Human arc-length parameter in [0, perimeter).
struct HumanParam {
  double s = 0.0;
};

struct Configuration {
  HumanParam x;
  PuppyParam y;
};

enum class ConfigClass { Forward, Backward, Final, Stable, Unstable, PivotForward, PivotBackward };

std::string_view to_string(ConfigClass c);

inline bool is_critical(ConfigClass c) {
  return c != ConfigClass::Forward && c != ConfigClass::Backward;
}

// A simple polygon, counterclockwise, with exact vertices and the derived
// double-precision quantities used by the simulator.
class Track {
 public:
  // Validates simplicity and non-degeneracy and normalizes to
  // counterclockwise order. Throws DegenerateGeometry or NotSimple.
  static Track from_exact(std::vector<RPoint> vertices, std::string name = {});
  static Track from_decimals(const std::vector<std::pair<std::string, std::string>>& vertices,
                             std::string name = {});

  int size() const { return static_cast<int>(exact_.size()); }
  const std::string& name() const { return name_; }
  // True when the input listed the vertices clockwise and was reversed.
  bool reversed_on_load() const { return reversed_; }

  const RPoint& exact_vertex(int i) const { return exact_[wrap(i)]; }
  RPoint exact_edge(int i) const { return exact_vertex(i + 1) - exact_vertex(i); }
  const std::vector<RPoint>& exact_vertices() const { return exact_; }
  Rational exact_signed_area2() const;

  Point2 vertex(int i) const { return vertex_[wrap(i)]; }
  Point2 direction(int i) const { return direction_[wrap(i)]; }
  double edge_length(int i) const { return length_[wrap(i)]; }
  double edge_start(int i) const { return start_[wrap(i)]; }
  double perimeter() const { return perimeter_; }
  // Signed exterior angle at v_i (positive for a left turn), |turn| < pi.
  double turn(int i) const { return turn_[wrap(i)]; }
  int turn_sign(int i) const { return turn_sign_[wrap(i)]; }
  // Exact sign of dot(e_{i-1}, e_i); negative means the two edges meet at a
  // strictly acute angle (|turn| > pi/2).
  int corner_dot_sign(int i) const { return corner_dot_sign_[wrap(i)]; }
  bool is_orthogonal() const;

  // Extended puppy parameter: rows Vertex 0, Edge 0, Vertex 1, ... Vertex
  // rows have width |turn|, edge rows keep arc length.
  double puppy_length() const { return puppy_length_; }
  double row_start(Feature f, int i) const;
  double row_width(Feature f, int i) const;
  double puppy_coordinate(const PuppyParam& y) const;
  PuppyParam puppy_param_at(double coordinate) const;

  Point2 human_position(double s) const;
  // Edge index containing arc length s (wrapped) and the offset along it.
  std::pair<int, double> human_local(double s) const;
  double wrap_s(double s) const;
  double wrap_y(double coordinate) const;

  // Relative tolerance for double-precision decisions: 1e-9 * perimeter.
  double tolerance() const { return 1e-9 * perimeter_; }

  int wrap(int i) const {
    const int n = size();
    int r = i % n;
    return r < 0 ? r + n : r;
  }

 private:
  std::string name_;
  bool reversed_ = false;
  std::vector<RPoint> exact_;
  std::vector<Point2> vertex_;
  std::vector<Point2> direction_;
  std::vector<double> length_;
  std::vector<double> start_;
  std::vector<double> turn_;
  std::vector<int> turn_sign_;
  std::vector<int> corner_dot_sign_;
  std::vector<double> row_start_;  // 2n entries, row 2i = Vertex i, 2i+1 = Edge i
  double perimeter_ = 0.0;
  double puppy_length_ = 0.0;
};

// Canonical form: junction points are expressed as Vertex(i) with t = 0
// (end of e_{i-1}) or t = 1 (start of e_i).
PuppyParam canonical(const Track& track, PuppyParam y);

Point2 puppy_position(const Track& track, const PuppyParam& y);
Point2 puppy_direction(const Track& track, const PuppyParam& y);

ConfigClass classify(const Track& track, const Configuration& c);
// Same classification for a human standing at an explicit point.
ConfigClass classify_at(const Track& track, Point2 human, const PuppyParam& y);

// Signed distance from P(x) to the directed line through pi(y) along theta(y);
// positive when the human is on the left.
double tangent_signed_distance(const Track& track, const Configuration& c);

// Minimum distance between a vertex and an edge not incident to it (which
// also bounds every non-adjacent edge pair).
double min_feature_distance(const Track& track);
double min_edge_length(const Track& track);

// Track file: {"format": "puppytrack v1", "name": ..., "vertices": [["x","y"], ...]}.
Track load_track(std::string_view document);
Track load_track_file(const std::string& path);
std::string dump_track(const Track& track);

}  // namespace puppy
