#pragma once

#include <string>

#include "puppy/track.hpp"

inline std::string fixture_path(const std::string& name) {
  return std::string(PUPPY_SOURCE_DIR) + "/fixtures/" + name + ".json";
}

inline puppy::Track fixture(const std::string& name) { return puppy::load_track_file(fixture_path(name)); }
