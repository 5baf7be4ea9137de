#pragma once

#include <string>
#include <vector>

#include "segrex/mesh.hpp"
#include "segrex/pde.hpp"

namespace segrex {

struct ContourSegment {
  Vec2 a;
  Vec2 b;
};

// Marching triangles on a P1 field. A vertex counts as above the level when
// its value is >= level, so a constant field equal to the level yields no
// segments.
std::vector<ContourSegment> contour_segments(const DiskMesh& mesh, const Field& field, double level);

// levels equispaced interior values min + k (max - min) / (levels + 1),
// k = 1..levels. Empty when the field is constant.
std::vector<double> contour_levels(const Field& field, int levels);

struct RenderOptions {
  int levels = 10;
  int pixels = 800;
  bool interfaces = true;
};

// SVG with the unit circle, contours of U = sum u_i and the interfaces
// between nodal regions. Output depends only on the input.
std::string render_svg(const DiskMesh& mesh, const Densities& u, const RenderOptions& opts = {});

}  // namespace segrex
