#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "segrex/geometry.hpp"

namespace segrex {

// Triangulation of the closed unit disk.
struct DiskMesh {
  std::vector<Vec2> vertices;
  std::vector<std::array<int, 3>> triangles;  // anticlockwise vertex indices
  std::vector<char> on_boundary;              // per vertex
  std::vector<double> boundary_angle;         // polar angle of boundary vertices, NaN inside
  int rings = 0;                              // construction parameters, 0 when read from file
  int sectors = 0;

  std::size_t vertex_count() const { return vertices.size(); }
  std::size_t triangle_count() const { return triangles.size(); }

  double triangle_area(std::size_t t) const;
  double total_area() const;
  // Largest triangle diameter (longest edge). Used as "one mesh cell".
  double cell_size() const;
};

// Concentric rings at radii j/rings, each carrying `sectors` vertices, with the
// centre fanned to ring 1. Requires rings >= 1, sectors >= 8 and sectors % 4 == 0
// so that the quarter-arc endpoints are vertices.
DiskMesh build_mesh(int rings, int sectors);

// Assembles a mesh from raw vertices/triangles and checks its invariants:
// vertices in the closed disk, positively oriented non-degenerate triangles,
// conforming edges. Boundary vertices are those at distance 1 (1e-12).
DiskMesh make_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles);

// Throws std::invalid_argument describing the first violated invariant.
void check_mesh(const DiskMesh& mesh);

// Nodal scalar field, one value per mesh vertex.
struct Field {
  std::vector<double> values;

  Field() = default;
  explicit Field(std::size_t n, double v = 0.0) : values(n, v) {}
  explicit Field(std::vector<double> v) : values(std::move(v)) {}

  std::size_t size() const { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  double max() const;
  double min() const;
};

template <typename F>
Field nodal_interpolant(const DiskMesh& mesh, F&& f) {
  Field out(mesh.vertex_count());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) out[i] = f(mesh.vertices[i]);
  return out;
}

// Point location over a bucket grid of triangles.
class TriangleLocator {
 public:
  explicit TriangleLocator(const DiskMesh& mesh, int buckets_per_side = 0);

  struct Hit {
    std::size_t triangle;
    std::array<double, 3> barycentric;
  };
  std::optional<Hit> locate(Vec2 p) const;

  // P1 interpolation of a nodal field; nullopt outside the mesh.
  std::optional<double> interpolate(const Field& field, Vec2 p) const;

 private:
  const DiskMesh* mesh_;
  int n_;
  std::vector<std::vector<std::size_t>> buckets_;
  std::size_t bucket_of(double x, double y) const;
};

}  // namespace segrex
