#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "segrex/boundary.hpp"
#include "segrex/classify.hpp"
#include "segrex/mesh.hpp"
#include "segrex/pde.hpp"

namespace segrex {

// Datum JSON:
//   {"m": int, "kind": "samples" | "quadrant" | "trig_poly",
//    "samples": {"phi": [[...] x 4]} | "quadrant": {"coeffs": [c1..c4]}
//    | "trig_poly": {"a": [a0, a1, ...], "b": [b1, ...]}}
// grid_m, when given, replaces "m"; sampled traces are resampled linearly.
// Admissibility is not checked here (quadrant coefficients may be signed, so
// the same format describes perturbations). Malformed input throws
// std::invalid_argument.
BoundaryDatum parse_datum(const std::string& json_text, std::optional<std::size_t> grid_m = std::nullopt);
BoundaryDatum read_datum(const std::string& path, std::optional<std::size_t> grid_m = std::nullopt);
std::string datum_to_json(const BoundaryDatum& datum);

// Field CSV: header "x,y,u1,u2,u3,u4", one row per vertex, %.17g values.
void write_field_csv(std::ostream& os, const DiskMesh& mesh, const Densities& u);

struct FieldTable {
  std::vector<Vec2> points;
  Densities u;
};
FieldTable read_field_csv(std::istream& is);

// Mesh file: "vertices N" followed by N lines "x y", then "triangles T"
// followed by T lines "i j k" (0-based).
void write_mesh(std::ostream& os, const DiskMesh& mesh);
DiskMesh read_mesh(std::istream& is);

// Densities of a field table on a mesh; throws std::invalid_argument when the
// row count or vertex coordinates disagree.
Densities densities_on_mesh(const DiskMesh& mesh, const FieldTable& table);

// {"kind", "points", "on_boundary", "diagnostics"}.
std::string classification_to_json(const Classification& c);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace segrex
