#include "segrex/render.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "segrex/classify.hpp"

namespace segrex {

namespace {

std::string coord(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s = buf;
  return s == "-0.000000" ? "0.000000" : s;
}

std::string xy(Vec2 p) { return coord(p.x) + ' ' + coord(-p.y); }

}  // namespace

std::vector<ContourSegment> contour_segments(const DiskMesh& mesh, const Field& field, double level) {
  if (field.size() != mesh.vertex_count()) throw std::invalid_argument("field size does not match the mesh");
  std::vector<ContourSegment> out;
  for (const auto& tri : mesh.triangles) {
    std::array<Vec2, 2> pts{};
    int n = 0;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto a = static_cast<std::size_t>(tri[k]);
      const auto b = static_cast<std::size_t>(tri[(k + 1) % 3]);
      const bool above_a = field[a] >= level;
      const bool above_b = field[b] >= level;
      if (above_a == above_b) continue;
      const double t = (level - field[a]) / (field[b] - field[a]);
      if (n < 2) pts[static_cast<std::size_t>(n)] = mesh.vertices[a] + t * (mesh.vertices[b] - mesh.vertices[a]);
      ++n;
    }
    if (n == 2 && !(pts[0] == pts[1])) out.push_back({pts[0], pts[1]});
  }
  return out;
}

std::vector<double> contour_levels(const Field& field, int levels) {
  std::vector<double> out;
  if (levels <= 0 || field.size() == 0) return out;
  const double lo = field.min(), hi = field.max();
  if (!(hi > lo)) return out;
  for (int k = 1; k <= levels; ++k) out.push_back(lo + k * (hi - lo) / (levels + 1));
  return out;
}

std::string render_svg(const DiskMesh& mesh, const Densities& u, const RenderOptions& opts) {
  for (const auto& f : u) {
    if (f.size() != mesh.vertex_count()) throw std::invalid_argument("field size does not match the mesh");
  }
  Field total(mesh.vertex_count());
  for (const auto& f : u) {
    for (std::size_t v = 0; v < total.size(); ++v) total[v] += f[v];
  }
  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.pixels << "\" height=\"" << opts.pixels
     << "\" viewBox=\"-1.05 -1.05 2.1 2.1\">\n"
     << "<circle cx=\"0\" cy=\"0\" r=\"1\" fill=\"none\" stroke=\"black\" stroke-width=\"0.006\"/>\n";
  os << "<g fill=\"none\" stroke=\"#3060c0\" stroke-width=\"0.003\">\n";
  for (double level : contour_levels(total, opts.levels)) {
    const auto segs = contour_segments(mesh, total, level);
    if (segs.empty()) continue;
    os << "<path data-level=\"" << coord(level) << "\" d=\"";
    for (std::size_t i = 0; i < segs.size(); ++i) {
      if (i) os << ' ';
      os << 'M' << xy(segs[i].a) << 'L' << xy(segs[i].b);
    }
    os << "\"/>\n";
  }
  os << "</g>\n";
  double umax = 0.0;
  for (const auto& f : u) umax = std::max(umax, f.max());
  if (opts.interfaces && umax > 0.0) {
    const auto part = nodal_regions(mesh, u, default_delta(u));
    os << "<g fill=\"none\" stroke=\"#c03030\" stroke-width=\"0.005\">\n";
    for (const auto& c : part.interfaces) {
      os << "<polyline data-pair=\"" << c.a << c.b << "\" points=\"";
      for (std::size_t i = 0; i < c.points.size(); ++i) {
        if (i) os << ' ';
        os << coord(c.points[i].x) << ',' << coord(-c.points[i].y);
      }
      os << "\"/>\n";
    }
    os << "</g>\n";
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace segrex
