#include "segrex/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>

namespace segrex {

namespace {

constexpr double kBoundaryTol = 1e-12;
constexpr double kMinArea = 1e-14;

}  // namespace

double DiskMesh::triangle_area(std::size_t t) const {
  const auto& tri = triangles[t];
  const Vec2 a = vertices[static_cast<std::size_t>(tri[0])];
  const Vec2 b = vertices[static_cast<std::size_t>(tri[1])];
  const Vec2 c = vertices[static_cast<std::size_t>(tri[2])];
  return 0.5 * cross(b - a, c - a);
}

double DiskMesh::total_area() const {
  double s = 0.0;
  for (std::size_t t = 0; t < triangles.size(); ++t) s += triangle_area(t);
  return s;
}

double DiskMesh::cell_size() const {
  double h = 0.0;
  for (const auto& tri : triangles) {
    for (int e = 0; e < 3; ++e) {
      const Vec2 a = vertices[static_cast<std::size_t>(tri[static_cast<std::size_t>(e)])];
      const Vec2 b = vertices[static_cast<std::size_t>(tri[static_cast<std::size_t>((e + 1) % 3)])];
      h = std::max(h, distance(a, b));
    }
  }
  return h;
}

DiskMesh build_mesh(int rings, int sectors) {
  if (rings < 1) throw std::invalid_argument("mesh needs rings >= 1");
  if (sectors < 8 || sectors % 4 != 0) throw std::invalid_argument("mesh needs sectors >= 8 and divisible by 4");

  std::vector<Vec2> v;
  v.reserve(static_cast<std::size_t>(rings) * static_cast<std::size_t>(sectors) + 1);
  v.push_back({0.0, 0.0});
  for (int j = 1; j <= rings; ++j) {
    const double r = static_cast<double>(j) / rings;
    for (int k = 0; k < sectors; ++k) {
      const double th = kTwoPi * k / sectors;
      // Exact values on the axes keep the quarter-arc endpoints on the circle.
      double c = std::cos(th);
      double s = std::sin(th);
      if (4 * k % sectors == 0) {
        const int q = 4 * k / sectors;
        c = (q == 0) ? 1.0 : (q == 2 ? -1.0 : 0.0);
        s = (q == 1) ? 1.0 : (q == 3 ? -1.0 : 0.0);
      }
      v.push_back({r * c, r * s});
    }
  }
  auto id = [sectors](int j, int k) { return 1 + (j - 1) * sectors + ((k % sectors) + sectors) % sectors; };

  std::vector<std::array<int, 3>> tris;
  tris.reserve(static_cast<std::size_t>(sectors) * static_cast<std::size_t>(2 * rings - 1));
  for (int k = 0; k < sectors; ++k) tris.push_back({0, id(1, k), id(1, k + 1)});
  for (int j = 1; j < rings; ++j) {
    for (int k = 0; k < sectors; ++k) {
      const int a = id(j, k);
      const int b = id(j + 1, k);
      const int c = id(j + 1, k + 1);
      const int d = id(j, k + 1);
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    }
  }
  DiskMesh mesh = make_mesh(std::move(v), std::move(tris));
  mesh.rings = rings;
  mesh.sectors = sectors;
  return mesh;
}

DiskMesh make_mesh(std::vector<Vec2> vertices, std::vector<std::array<int, 3>> triangles) {
  DiskMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.triangles = std::move(triangles);
  const std::size_t n = mesh.vertices.size();
  mesh.on_boundary.assign(n, 0);
  mesh.boundary_angle.assign(n, std::numeric_limits<double>::quiet_NaN());
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(norm(mesh.vertices[i]) - 1.0) <= kBoundaryTol) {
      mesh.on_boundary[i] = 1;
      mesh.boundary_angle[i] = polar_angle(mesh.vertices[i]);
    }
  }
  check_mesh(mesh);
  return mesh;
}

void check_mesh(const DiskMesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  if (n < 3 || mesh.triangles.empty()) throw std::invalid_argument("mesh is empty");
  for (std::size_t i = 0; i < n; ++i) {
    const double r = norm(mesh.vertices[i]);
    if (!std::isfinite(r) || r > 1.0 + kBoundaryTol) {
      throw std::invalid_argument("mesh vertex " + std::to_string(i) + " lies outside the unit disk");
    }
  }
  std::map<std::pair<int, int>, int> edge_use;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (int idx : mesh.triangles[t]) {
      if (idx < 0 || static_cast<std::size_t>(idx) >= n) {
        throw std::invalid_argument("triangle " + std::to_string(t) + " has an out-of-range vertex index");
      }
    }
    if (mesh.triangle_area(t) <= kMinArea) {
      throw std::invalid_argument("triangle " + std::to_string(t) + " is degenerate or clockwise");
    }
    const auto& tri = mesh.triangles[t];
    for (int e = 0; e < 3; ++e) {
      int a = tri[static_cast<std::size_t>(e)];
      int b = tri[static_cast<std::size_t>((e + 1) % 3)];
      if (a > b) std::swap(a, b);
      if (++edge_use[{a, b}] > 2) {
        throw std::invalid_argument("mesh edge shared by more than two triangles");
      }
    }
  }
  for (const auto& [edge, count] : edge_use) {
    if (count == 1 && !(mesh.on_boundary[static_cast<std::size_t>(edge.first)] &&
                        mesh.on_boundary[static_cast<std::size_t>(edge.second)])) {
      throw std::invalid_argument("mesh is not conforming: interior edge " + std::to_string(edge.first) + "-" +
                                  std::to_string(edge.second) + " has one triangle");
    }
  }
}

double Field::max() const { return values.empty() ? 0.0 : *std::max_element(values.begin(), values.end()); }
double Field::min() const { return values.empty() ? 0.0 : *std::min_element(values.begin(), values.end()); }

TriangleLocator::TriangleLocator(const DiskMesh& mesh, int buckets_per_side) : mesh_(&mesh) {
  n_ = buckets_per_side > 0
           ? buckets_per_side
           : std::max(4, static_cast<int>(std::sqrt(static_cast<double>(mesh.triangle_count()) / 2.0)));
  buckets_.resize(static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_));
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    double x0 = 2.0, x1 = -2.0, y0 = 2.0, y1 = -2.0;
    for (int idx : mesh.triangles[t]) {
      const Vec2 p = mesh.vertices[static_cast<std::size_t>(idx)];
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const std::size_t b0 = bucket_of(x0, y0);
    const std::size_t b1 = bucket_of(x1, y1);
    const std::size_t i0 = b0 % static_cast<std::size_t>(n_), j0 = b0 / static_cast<std::size_t>(n_);
    const std::size_t i1 = b1 % static_cast<std::size_t>(n_), j1 = b1 / static_cast<std::size_t>(n_);
    for (std::size_t j = j0; j <= j1; ++j) {
      for (std::size_t i = i0; i <= i1; ++i) buckets_[j * static_cast<std::size_t>(n_) + i].push_back(t);
    }
  }
}

std::size_t TriangleLocator::bucket_of(double x, double y) const {
  auto cell = [this](double v) {
    const int c = static_cast<int>(std::floor((v + 1.0) / 2.0 * n_));
    return static_cast<std::size_t>(std::clamp(c, 0, n_ - 1));
  };
  return cell(y) * static_cast<std::size_t>(n_) + cell(x);
}

std::optional<TriangleLocator::Hit> TriangleLocator::locate(Vec2 p) const {
  constexpr double kSlack = -1e-12;
  std::optional<Hit> best;
  double best_min = -std::numeric_limits<double>::infinity();
  for (std::size_t t : buckets_[bucket_of(p.x, p.y)]) {
    const auto& tri = mesh_->triangles[t];
    const Vec2 a = mesh_->vertices[static_cast<std::size_t>(tri[0])];
    const Vec2 b = mesh_->vertices[static_cast<std::size_t>(tri[1])];
    const Vec2 c = mesh_->vertices[static_cast<std::size_t>(tri[2])];
    const double area = cross(b - a, c - a);
    const double l0 = cross(b - p, c - p) / area;
    const double l1 = cross(c - p, a - p) / area;
    const double l2 = 1.0 - l0 - l1;
    const double lmin = std::min({l0, l1, l2});
    if (lmin >= kSlack && lmin > best_min) {
      best_min = lmin;
      best = Hit{t, {l0, l1, l2}};
      if (lmin >= 0.0) break;
    }
  }
  return best;
}

std::optional<double> TriangleLocator::interpolate(const Field& field, Vec2 p) const {
  const auto hit = locate(p);
  if (!hit) return std::nullopt;
  const auto& tri = mesh_->triangles[hit->triangle];
  double v = 0.0;
  for (int e = 0; e < 3; ++e) {
    v += hit->barycentric[static_cast<std::size_t>(e)] * field[static_cast<std::size_t>(tri[static_cast<std::size_t>(e)])];
  }
  return v;
}

}  // namespace segrex
