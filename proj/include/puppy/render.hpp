#pragma once

#include <optional>
#include <string>

#include "puppy/diagram.hpp"

namespace puppy {

struct RenderOptions {
  int size = 720;
  bool grid = true;
  bool shade_backward = true;
  bool labels = true;
  int shade_columns = 240;
  std::optional<Configuration> marker;
};

std::string render_svg(const Track& track, const RenderOptions& options = {});
std::string render_svg(const AttractionDiagram& diagram, const RenderOptions& options = {});
std::string render_svg(const DualDiagram& dual, const Track& track, const RenderOptions& options = {});

}  // namespace puppy
