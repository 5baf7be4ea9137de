#include "segrex/classify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "segrex/harmonic.hpp"

namespace segrex {

namespace {

// Points closer than this are one graph node. Triple points on mesh edges
// are computed in both neighbouring triangles and differ by roundoff.
constexpr double kMerge = 1e-8;

using NodeKey = std::pair<long long, long long>;

NodeKey key_of(Vec2 p) {
  return {static_cast<long long>(std::floor(p.x / kMerge)), static_cast<long long>(std::floor(p.y / kMerge))};
}

// Interface segments as a graph on merged nodes.
class SegmentGraph {
 public:
  int node(Vec2 p) {
    const auto k = key_of(p);
    for (long long dx = -1; dx <= 1; ++dx) {
      for (long long dy = -1; dy <= 1; ++dy) {
        auto it = ids_.find({k.first + dx, k.second + dy});
        if (it == ids_.end()) continue;
        for (int id : it->second) {
          if (distance(points_[static_cast<std::size_t>(id)], p) <= kMerge) return id;
        }
      }
    }
    const int id = static_cast<int>(points_.size());
    ids_[k].push_back(id);
    points_.push_back(p);
    return id;
  }

  void add(int pair, Vec2 p, Vec2 q) {
    const int a = node(p);
    const int b = node(q);
    if (a == b) return;
    if (!seen_.insert({pair, std::min(a, b), std::max(a, b)}).second) return;
    segs_.push_back({pair, a, b});
  }

  struct Seg {
    int pair;
    int n0;
    int n1;
  };

  const std::vector<Seg>& segments() const { return segs_; }
  const std::vector<Vec2>& points() const { return points_; }

 private:
  std::map<NodeKey, std::vector<int>> ids_;
  std::vector<Vec2> points_;
  std::set<std::tuple<int, int, int>> seen_;
  std::vector<Seg> segs_;
};

int pair_code(int a, int b) { return std::min(a, b) * kSpecies + std::max(a, b); }

double value(const Densities& u, int s, std::size_t v) { return u[static_cast<std::size_t>(s)][v]; }

std::array<double, 3> barycentric(const std::array<Vec2, 3>& x, Vec2 p) {
  const double area = cross(x[1] - x[0], x[2] - x[0]);
  const double l1 = cross(p - x[0], x[2] - x[0]) / area;
  const double l2 = cross(x[1] - x[0], p - x[0]) / area;
  return {1.0 - l1 - l2, l1, l2};
}

// Differences below the tie tolerance count as zero, so roundoff between
// equal densities does not create spurious tiny segments.
double tied(double f, double tie) { return std::abs(f) <= tie ? 0.0 : f; }

// Zero of u_a - u_b on edge (v, w), always computed from the lower vertex
// index so neighbouring triangles produce bitwise equal points.
Vec2 edge_crossing(const DiskMesh& mesh, const Densities& u, int a, int b, std::size_t v, std::size_t w, double tie) {
  if (w < v) std::swap(v, w);
  const double fv = tied(value(u, a, v) - value(u, b, v), tie);
  const double fw = tied(value(u, a, w) - value(u, b, w), tie);
  const double t = fv / (fv - fw);
  return mesh.vertices[v] + t * (mesh.vertices[w] - mesh.vertices[v]);
}

class EnvelopeBuilder {
 public:
  EnvelopeBuilder(const DiskMesh& mesh, const Densities& u, double delta, SegmentGraph& graph)
      : mesh_(mesh), u_(u), tie_(1e-6 * delta), graph_(graph) {}

  void triangle(std::size_t t) {
    const auto& tri = mesh_.triangles[t];
    for (std::size_t k = 0; k < 3; ++k) {
      v_[k] = static_cast<std::size_t>(tri[k]);
      x_[k] = mesh_.vertices[v_[k]];
    }
    present_.clear();
    for (int s = 0; s < kSpecies; ++s) {
      double m = 0.0;
      for (std::size_t k = 0; k < 3; ++k) m = std::max(m, value(u_, s, v_[k]));
      if (m > tie_) present_.push_back(s);
    }
    triples_.clear();
    for (std::size_t i = 0; i < present_.size(); ++i) {
      for (std::size_t j = i + 1; j < present_.size(); ++j) pair(present_[i], present_[j]);
    }
  }

 private:
  double at(int s, const std::array<double, 3>& l) const {
    return l[0] * value(u_, s, v_[0]) + l[1] * value(u_, s, v_[1]) + l[2] * value(u_, s, v_[2]);
  }

  // Point of the triangle where u_a = u_b = u_c (species sorted), shared by
  // the three pair segments that end there.
  std::optional<Vec2> triple(int a, int b, int c) {
    std::array<int, 3> s{a, b, c};
    std::sort(s.begin(), s.end());
    const int code = (s[0] * kSpecies + s[1]) * kSpecies + s[2];
    auto it = triples_.find(code);
    if (it != triples_.end()) return it->second;
    std::array<double, 3> d1{}, d2{};
    for (std::size_t k = 0; k < 3; ++k) {
      d1[k] = value(u_, s[0], v_[k]) - value(u_, s[1], v_[k]);
      d2[k] = value(u_, s[0], v_[k]) - value(u_, s[2], v_[k]);
    }
    // Solve d1.l = 0, d2.l = 0, sum l = 1: l is proportional to d1 x d2.
    std::array<double, 3> l{d1[1] * d2[2] - d1[2] * d2[1], d1[2] * d2[0] - d1[0] * d2[2], d1[0] * d2[1] - d1[1] * d2[0]};
    const double sum = l[0] + l[1] + l[2];
    std::optional<Vec2> out;
    const double scale = std::abs(l[0]) + std::abs(l[1]) + std::abs(l[2]);
    if (std::abs(sum) > 1e-14 * scale && scale > 0.0) {
      for (double& x : l) x /= sum;
      out = l[0] * x_[0] + l[1] * x_[1] + l[2] * x_[2];
    }
    triples_.emplace(code, out);
    return out;
  }

  void pair(int a, int b) {
    std::array<double, 3> f{};
    for (std::size_t k = 0; k < 3; ++k) f[k] = tied(value(u_, a, v_[k]) - value(u_, b, v_[k]), tie_);
    std::vector<Vec2> pts;
    auto push = [&](Vec2 p) {
      for (const auto& q : pts) {
        if (distance(q, p) <= kMerge) return;
      }
      pts.push_back(p);
    };
    for (std::size_t k = 0; k < 3; ++k) {
      const std::size_t n = (k + 1) % 3;
      if (f[k] == 0.0) push(x_[k]);
      if ((f[k] < 0.0 && f[n] > 0.0) || (f[k] > 0.0 && f[n] < 0.0)) {
        push(edge_crossing(mesh_, u_, a, b, v_[k], v_[n], tie_));
      }
    }
    if (pts.size() != 2) return;

    const auto l0 = barycentric(x_, pts[0]);
    const auto l1 = barycentric(x_, pts[1]);
    double lo = 0.0, hi = 1.0;
    int lo_by = -1, hi_by = -1;
    for (int c : present_) {
      if (c == a || c == b) continue;
      const double g0 = tied(at(a, l0) - at(c, l0), tie_);
      const double g1 = tied(at(a, l1) - at(c, l1), tie_);
      if (g0 < 0.0 && g1 < 0.0) return;
      if (g0 < 0.0) {
        const double t = g0 / (g0 - g1);
        if (t > lo) {
          lo = t;
          lo_by = c;
        }
      } else if (g1 < 0.0) {
        const double t = g0 / (g0 - g1);
        if (t < hi) {
          hi = t;
          hi_by = c;
        }
      }
    }
    if (hi - lo <= 1e-12) return;
    auto along = [&](double t) { return pts[0] + t * (pts[1] - pts[0]); };
    Vec2 p = pts[0], q = pts[1];
    if (lo_by >= 0) p = triple(a, b, lo_by).value_or(along(lo));
    if (hi_by >= 0) q = triple(a, b, hi_by).value_or(along(hi));
    graph_.add(pair_code(a, b), p, q);
  }

  const DiskMesh& mesh_;
  const Densities& u_;
  double tie_;
  SegmentGraph& graph_;
  std::array<std::size_t, 3> v_{};
  std::array<Vec2, 3> x_{};
  std::vector<int> present_;
  std::map<int, std::optional<Vec2>> triples_;
};

double triangle_max(const DiskMesh& mesh, const Densities& u, std::size_t t, int s) {
  double m = 0.0;
  for (int k : mesh.triangles[t]) m = std::max(m, value(u, s, static_cast<std::size_t>(k)));
  return m;
}

int centroid_label(const DiskMesh& mesh, const Densities& u, std::size_t t, double delta) {
  const auto& tri = mesh.triangles[t];
  int best = 0;
  double best_v = delta;
  for (int s = 0; s < kSpecies; ++s) {
    double m = 0.0;
    for (int k = 0; k < 3; ++k) m += value(u, s, static_cast<std::size_t>(tri[static_cast<std::size_t>(k)]));
    m /= 3.0;
    if (m > best_v) {
      best_v = m;
      best = s + 1;
    }
  }
  return best;
}

// Chains the segments of each pair into maximal polylines.
std::vector<InterfaceCurve> assemble(const SegmentGraph& graph) {
  std::map<int, std::vector<std::size_t>> by_pair;
  for (std::size_t i = 0; i < graph.segments().size(); ++i) by_pair[graph.segments()[i].pair].push_back(i);
  std::vector<InterfaceCurve> out;
  for (const auto& [code, segs] : by_pair) {
    std::map<int, std::vector<std::size_t>> incident;
    for (std::size_t s : segs) {
      incident[graph.segments()[s].n0].push_back(s);
      incident[graph.segments()[s].n1].push_back(s);
    }
    std::set<std::size_t> used;
    auto walk = [&](int start, std::size_t first) {
      InterfaceCurve c;
      c.a = code / kSpecies + 1;
      c.b = code % kSpecies + 1;
      c.points.push_back(graph.points()[static_cast<std::size_t>(start)]);
      int at = start;
      std::size_t s = first;
      while (true) {
        used.insert(s);
        const auto& seg = graph.segments()[s];
        at = seg.n0 == at ? seg.n1 : seg.n0;
        c.points.push_back(graph.points()[static_cast<std::size_t>(at)]);
        if (at == start) {
          c.closed = true;
          break;
        }
        const auto& inc = incident[at];
        if (inc.size() != 2) break;
        const std::size_t next = inc[0] == s ? inc[1] : inc[0];
        if (used.count(next)) break;
        s = next;
      }
      out.push_back(std::move(c));
    };
    for (const auto& [node, inc] : incident) {
      if (inc.size() == 2) continue;
      for (std::size_t s : inc) {
        if (!used.count(s)) walk(node, s);
      }
    }
    for (std::size_t s : segs) {
      if (!used.count(s)) walk(graph.segments()[s].n0, s);
    }
  }
  return out;
}

double dist_to_unit_circle(Vec2 p) { return std::abs(norm(p) - 1.0); }

std::string describe(const std::vector<MultiplePoint>& pts) {
  std::ostringstream os;
  os << pts.size() << " multiple point(s)";
  for (const auto& p : pts) os << " [(" << p.location.x << ", " << p.location.y << ") m=" << p.multiplicity << "]";
  return os.str();
}

}  // namespace

double default_delta(const Densities& u) {
  double m = 0.0;
  for (const auto& f : u) m = std::max(m, f.max());
  return 1e-3 * m;
}

double default_radius(const DiskMesh& mesh) { return 3.0 * mesh.cell_size(); }

NodalPartition nodal_regions(const DiskMesh& mesh, const Densities& u, double delta) {
  if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
  for (const auto& f : u) {
    if (f.size() != mesh.vertex_count()) throw std::invalid_argument("density size does not match the mesh");
  }
  NodalPartition part;
  part.delta = delta;
  const std::size_t n = mesh.vertex_count();
  part.label.assign(n, 0);
  part.dominant.assign(n, 1);
  for (std::size_t v = 0; v < n; ++v) {
    int dom = 0, above = 0;
    for (int s = 0; s < kSpecies; ++s) {
      if (value(u, s, v) > value(u, dom, v)) dom = s;
      if (value(u, s, v) > delta) ++above;
    }
    part.dominant[v] = dom + 1;
    if (value(u, dom, v) > delta) part.label[v] = dom + 1;
    if (above > 1) ++part.overlap_vertices;
  }
  if (part.overlap_vertices > 0) {
    part.warnings.push_back(std::to_string(part.overlap_vertices) +
                            " vertices carry more than one density above delta; the dominant one labels them");
  }

  SegmentGraph graph;
  EnvelopeBuilder env(mesh, u, delta, graph);
  std::map<std::pair<std::size_t, std::size_t>, std::vector<std::size_t>> edge_tris;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    env.triangle(t);
    const auto& tri = mesh.triangles[t];
    for (std::size_t k = 0; k < 3; ++k) {
      auto a = static_cast<std::size_t>(tri[k]);
      auto b = static_cast<std::size_t>(tri[(k + 1) % 3]);
      edge_tris[{std::min(a, b), std::max(a, b)}].push_back(t);
    }
  }
  // Two species that never share a triangle meet along mesh edges where
  // both vanish; the envelope cannot see these.
  const double tie = 1e-6 * delta;
  for (const auto& [edge, tris] : edge_tris) {
    if (tris.size() != 2) continue;
    if (part.label[edge.first] != 0 || part.label[edge.second] != 0) continue;
    const int la = centroid_label(mesh, u, tris[0], tie);
    const int lb = centroid_label(mesh, u, tris[1], tie);
    if (la == 0 || lb == 0 || la == lb) continue;
    if (triangle_max(mesh, u, tris[0], lb - 1) > tie || triangle_max(mesh, u, tris[1], la - 1) > tie) continue;
    graph.add(pair_code(la - 1, lb - 1), mesh.vertices[edge.first], mesh.vertices[edge.second]);
  }

  part.interfaces = assemble(graph);
  for (const auto& c : part.interfaces) {
    part.adjacency[static_cast<std::size_t>(c.a - 1)][static_cast<std::size_t>(c.b - 1)] = true;
    part.adjacency[static_cast<std::size_t>(c.b - 1)][static_cast<std::size_t>(c.a - 1)] = true;
  }
  // Junctions: nodes shared by two pairs, and interior ends of curves
  // (exact multi-way ties at a vertex can leave the curves a hair apart).
  std::vector<std::set<int>> pairs_at(graph.points().size());
  std::vector<int> degree(graph.points().size(), 0);
  for (const auto& s : graph.segments()) {
    pairs_at[static_cast<std::size_t>(s.n0)].insert(s.pair);
    pairs_at[static_cast<std::size_t>(s.n1)].insert(s.pair);
    ++degree[static_cast<std::size_t>(s.n0)];
    ++degree[static_cast<std::size_t>(s.n1)];
  }
  for (std::size_t i = 0; i < pairs_at.size(); ++i) {
    const bool open_end = degree[i] == 1 && dist_to_unit_circle(graph.points()[i]) > 1e-9;
    if (pairs_at[i].size() >= 2 || open_end) part.junctions.push_back(graph.points()[i]);
  }
  return part;
}

NodalPartition nodal_regions(const SystemState& state, double delta) {
  return nodal_regions(*state.mesh, state.u, delta > 0.0 ? delta : default_delta(state.u));
}

int multiplicity(const DiskMesh& mesh, const Densities& u, Vec2 x, double rho, double delta) {
  std::array<bool, kSpecies> seen{};
  const double r2 = rho * rho;
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    if (norm2(mesh.vertices[v] - x) > r2) continue;
    double top = 0.0;
    for (std::size_t s = 0; s < kSpecies; ++s) top = std::max(top, u[s][v]);
    if (top <= 1e-6 * delta) continue;
    for (std::size_t s = 0; s < kSpecies; ++s) {
      if (u[s][v] == top) seen[s] = true;
    }
  }
  return static_cast<int>(std::count(seen.begin(), seen.end(), true));
}

int multiplicity(const SystemState& state, Vec2 x, double rho, double delta) {
  return multiplicity(*state.mesh, state.u, x, rho > 0.0 ? rho : default_radius(*state.mesh),
                      delta > 0.0 ? delta : default_delta(state.u));
}

std::vector<MultiplePoint> multiple_points(const DiskMesh& mesh, const Densities& u, const NodalPartition& partition,
                                           const std::vector<Vec2>& boundary_points, const MultiplePointOptions& opts) {
  const double delta = opts.delta > 0.0 ? opts.delta : partition.delta;
  const double rho = opts.rho > 0.0 ? opts.rho : default_radius(mesh);
  std::vector<Vec2> cand = partition.junctions;
  const std::size_t first_boundary = cand.size();
  cand.insert(cand.end(), boundary_points.begin(), boundary_points.end());

  std::vector<std::size_t> parent(cand.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  const double link2 = 4.0 * rho * rho;
  for (std::size_t i = 0; i < cand.size(); ++i) {
    for (std::size_t j = i + 1; j < cand.size(); ++j) {
      if (norm2(cand[i] - cand[j]) <= link2) parent[find(j)] = find(i);
    }
  }
  std::map<std::size_t, std::vector<std::size_t>> clusters;
  for (std::size_t i = 0; i < cand.size(); ++i) clusters[find(i)].push_back(i);

  std::vector<MultiplePoint> out;
  for (const auto& [root, members] : clusters) {
    Vec2 mean{};
    for (std::size_t i : members) mean = mean + cand[i];
    mean = (1.0 / static_cast<double>(members.size())) * mean;
    MultiplePoint mp;
    mp.location = mean;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i : members) {
      if (i < first_boundary) continue;
      const double d = distance(cand[i], mean);
      if (d < best) {
        best = d;
        mp.location = cand[i];
        mp.on_boundary = true;
      }
    }
    mp.multiplicity = multiplicity(mesh, u, mp.location, rho, delta);
    if (mp.multiplicity >= 3) out.push_back(mp);
  }
  std::sort(out.begin(), out.end(), [](const MultiplePoint& a, const MultiplePoint& b) {
    return std::tie(a.location.x, a.location.y) < std::tie(b.location.x, b.location.y);
  });
  return out;
}

std::vector<MultiplePoint> multiple_points(const SystemState& state, const BoundaryDatum& datum,
                                           const MultiplePointOptions& opts) {
  const auto part = nodal_regions(state, opts.delta);
  std::vector<Vec2> bpts;
  for (double a : endpoints(datum)) bpts.push_back(unit_vector(a));
  return multiple_points(*state.mesh, state.u, part, bpts, opts);
}

std::string to_string(ConfigurationKind kind) {
  return kind == ConfigurationKind::FourPoint ? "four_point" : "two_triple_points";
}

std::optional<Signs> xi_signs(int k, int l) {
  k = ((k % kSpecies) + kSpecies) % kSpecies;
  l = ((l % kSpecies) + kSpecies) % kSpecies;
  const int d = ((l - k) % kSpecies + kSpecies) % kSpecies;
  Signs s{};
  if (d == 1 || d == 3) {
    // Both points bound arc i; the arc opposite i stands alone.
    const int i = d == 1 ? k : l;
    const int j = (i + 2) % kSpecies;
    s.fill(-1);
    s[static_cast<std::size_t>(j)] = +1;
    return s;
  }
  if (d == 2) {
    // Chord from k to l separates arcs {k, k+1} from {k+2, k+3}.
    for (int i = 0; i < kSpecies; ++i) s[static_cast<std::size_t>((k + i) % kSpecies)] = i < 2 ? +1 : -1;
    return s;
  }
  return std::nullopt;
}

double sup_gap(const DiskMesh& mesh, const Field& total, const TraceFunction& trace, double radius) {
  double gap = 0.0;
  for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
    const Vec2 x = mesh.vertices[v];
    if (norm(x) > radius) continue;
    gap = std::max(gap, std::abs(total[v] - std::abs(poisson_eval(trace, x))));
  }
  return gap;
}

Classification classify(const SystemState& state, const BoundaryDatum& datum, const ClassifyOptions& opts) {
  require_admissible(datum);
  const DiskMesh& mesh = *state.mesh;
  Classification out;
  auto& diag = out.diagnostics;
  diag.delta = opts.points.delta > 0.0 ? opts.points.delta : default_delta(state.u);
  diag.rho = opts.points.rho > 0.0 ? opts.points.rho : default_radius(mesh);
  diag.notes = state.warnings;

  const auto part = nodal_regions(mesh, state.u, diag.delta);
  const auto ends = endpoints(datum);
  std::vector<Vec2> bpts;
  for (double a : ends) bpts.push_back(unit_vector(a));
  MultiplePointOptions mpo{diag.delta, diag.rho};
  diag.found = multiple_points(mesh, state.u, part, bpts, mpo);

  const auto& found = diag.found;
  const auto count = [&](int m) {
    return std::count_if(found.begin(), found.end(), [m](const MultiplePoint& p) { return p.multiplicity == m; });
  };
  const Field total = state.total();
  if (found.size() == 1 && count(4) == 1) {
    out.kind = ConfigurationKind::FourPoint;
    out.points = {found[0].location};
    out.on_boundary = found[0].on_boundary;
    diag.gap = sup_gap(mesh, total, alternating_trace(datum), opts.gap_radius);
    diag.gap_reference = "psi_a";
    if (!out.on_boundary) {
      const Vec2 p = found[0].location;
      if (norm(p) < 1.0 - kDefaultRim) diag.moments = moment_conditions(datum, p);
      try {
        diag.fit_residuals.push_back(local_expansion_fit(mesh, total, p, 4).residual);
      } catch (const std::exception& e) {
        diag.notes.push_back(std::string("local fit skipped: ") + e.what());
      }
    }
    return out;
  }
  if (found.size() == 2 && count(3) == 2) {
    out.kind = ConfigurationKind::TwoTriplePoints;
    out.points = {found[0].location, found[1].location};
    out.on_boundary = found[0].on_boundary && found[1].on_boundary;
    for (const auto& p : found) {
      if (p.on_boundary) continue;
      try {
        diag.fit_residuals.push_back(local_expansion_fit(mesh, total, p.location, 3).residual);
      } catch (const std::exception& e) {
        diag.notes.push_back(std::string("local fit skipped: ") + e.what());
      }
    }
    if (out.on_boundary) {
      std::array<int, 2> idx{-1, -1};
      for (std::size_t q = 0; q < 2; ++q) {
        for (std::size_t i = 0; i < ends.size(); ++i) {
          if (distance(unit_vector(ends[i]), found[q].location) <= 2.0 * diag.rho) idx[q] = static_cast<int>(i);
        }
      }
      const auto signs = (idx[0] >= 0 && idx[1] >= 0) ? xi_signs(idx[0], idx[1]) : std::nullopt;
      if (signs) {
        diag.xi_signs = signs;
        diag.gap = sup_gap(mesh, total, signed_trace(datum, *signs), opts.gap_radius);
        diag.gap_reference = "xi_a";
      } else {
        diag.notes.push_back("Xi_a cross-check skipped: 3-points do not sit at datum endpoints");
      }
    } else {
      diag.notes.push_back("Xi_a cross-check skipped: 3-points are not both on the boundary");
    }
    return out;
  }
  throw ClassificationError("configuration is neither one 4-point nor two 3-points: " + describe(found), found);
}

LocalFit local_expansion_fit(const PointSampler& sample, Vec2 p, int h, double radius) {
  if (h != 3 && h != 4) throw std::invalid_argument("local expansion order must be 3 or 4");
  if (!(radius > 0.0)) throw std::invalid_argument("fit radius must be positive");
  if (norm(p) + radius > 1.0 + 1e-12) throw DomainError("fit circle leaves the disk");
  constexpr std::size_t kSamples = 720;
  const double k = 0.5 * h;
  const double rh = std::pow(radius, k);
  std::vector<double> theta(kSamples), s(kSamples);
  double smax = 0.0;
  for (std::size_t i = 0; i < kSamples; ++i) {
    theta[i] = kTwoPi * static_cast<double>(i) / static_cast<double>(kSamples);
    s[i] = sample(p + radius * unit_vector(theta[i]));
    smax = std::max(smax, std::abs(s[i]));
  }
  auto solve = [&](double t0) {
    double sb = 0.0, bb = 0.0;
    for (std::size_t i = 0; i < kSamples; ++i) {
      const double b = rh * std::abs(std::cos(k * (theta[i] + t0)));
      sb += s[i] * b;
      bb += b * b;
    }
    const double c = sb / bb;
    double r = 0.0;
    for (std::size_t i = 0; i < kSamples; ++i) {
      const double e = s[i] - c * rh * std::abs(std::cos(k * (theta[i] + t0)));
      r += e * e;
    }
    return std::pair{c, r};
  };
  const double period = kPi / k;
  constexpr int kGrid = 720;
  const double step = period / kGrid;
  double best_t = 0.0, best_r = std::numeric_limits<double>::infinity();
  for (int g = 0; g < kGrid; ++g) {
    const double t0 = -0.5 * period + g * step;
    const double r = solve(t0).second;
    if (r < best_r) {
      best_r = r;
      best_t = t0;
    }
  }
  double lo = best_t - step, hi = best_t + step;
  const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
  double f1 = solve(x1).second, f2 = solve(x2).second;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    if (f1 <= f2) {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - gr * (hi - lo);
      f1 = solve(x1).second;
    } else {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + gr * (hi - lo);
      f2 = solve(x2).second;
    }
  }
  double t0 = 0.5 * (lo + hi);
  auto [c, r] = solve(t0);
  if (best_r < r) {
    t0 = best_t;
    std::tie(c, r) = solve(t0);
  }
  if (!(c * rh > 1e-12 * std::max(1.0, smax))) throw NumericalError("local expansion fit is degenerate (amplitude ~ 0)");
  t0 -= period * std::floor((t0 + 0.5 * period) / period);
  LocalFit fit;
  fit.amplitude = c;
  fit.theta0 = t0;
  fit.radius = radius;
  const double rms = std::sqrt(r / static_cast<double>(kSamples));
  fit.residual = rms / c;
  fit.shape_residual = rms / (c * rh);
  return fit;
}

LocalFit local_expansion_fit(const DiskMesh& mesh, const Field& field, Vec2 p, int h, double radius) {
  if (field.size() != mesh.vertex_count()) throw std::invalid_argument("field size does not match the mesh");
  if (radius <= 0.0) radius = 5.0 * mesh.cell_size();
  if (norm(p) + radius > 1.0 + 1e-12) throw DomainError("fit circle leaves the disk");
  TriangleLocator loc(mesh);
  return local_expansion_fit(
      [&](Vec2 q) {
        const auto v = loc.interpolate(field, q);
        if (!v) throw DomainError("fit circle leaves the mesh");
        return *v;
      },
      p, h, radius);
}

std::vector<double> interface_angles(const NodalPartition& partition, Vec2 p, bool on_boundary, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const double reach = 2.0 * rho;
  std::vector<Vec2> dirs;
  for (const auto& c : partition.interfaces) {
    double dmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (const auto& q : c.points) {
      const double d = distance(q, p);
      dmin = std::min(dmin, d);
      dmax = std::max(dmax, d);
    }
    if (dmin > reach || dmax <= reach) continue;
    // Within a few cells of a multiple point the P1 zero lines are bent by
    // an amount that does not shrink under refinement, so the fit starts at
    // distance rho.
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i + (c.closed ? 1 : 0) < c.points.size(); ++i) {
      if (distance(c.points[i], p) >= rho) pts.push_back(c.points[i]);
    }
    const std::size_t take = std::min<std::size_t>(5, pts.size());
    std::partial_sort(pts.begin(), pts.begin() + static_cast<std::ptrdiff_t>(take), pts.end(),
                      [&](Vec2 a, Vec2 b) { return distance(a, p) < distance(b, p); });
    pts.resize(take);
    if (take < 2) continue;
    Vec2 m{};
    for (const auto& q : pts) m = m + q;
    m = (1.0 / static_cast<double>(take)) * m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& q : pts) {
      const Vec2 d = q - m;
      sxx += d.x * d.x;
      sxy += d.x * d.y;
      syy += d.y * d.y;
    }
    const double phi = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
    Vec2 d = unit_vector(phi);
    if (dot(d, m - p) < 0.0) d = -1.0 * d;
    dirs.push_back(d);
  }

  std::vector<double> sectors;
  if (on_boundary) {
    const double alpha = polar_angle(p);
    const double base = polar_angle(Vec2{-std::sin(alpha), std::cos(alpha)});
    std::vector<double> beta;
    for (const auto& d : dirs) {
      const double b = wrap_angle(polar_angle(d) - base);
      if (b > 0.0 && b < kPi) beta.push_back(b);
    }
    if (beta.size() < 2) throw NumericalError("fewer than 3 sectors at the boundary point");
    std::sort(beta.begin(), beta.end());
    double prev = 0.0;
    for (double b : beta) {
      sectors.push_back(b - prev);
      prev = b;
    }
    sectors.push_back(kPi - prev);
    return sectors;
  }
  if (dirs.size() < 3) throw NumericalError("fewer than 3 interfaces incident to the point");
  std::vector<double> ang;
  for (const auto& d : dirs) ang.push_back(wrap_angle(polar_angle(d)));
  std::sort(ang.begin(), ang.end());
  for (std::size_t i = 0; i + 1 < ang.size(); ++i) sectors.push_back(ang[i + 1] - ang[i]);
  sectors.push_back(kTwoPi - ang.back() + ang.front());
  return sectors;
}

std::vector<double> interface_angles(const SystemState& state, const MultiplePoint& point, double rho) {
  if (rho <= 0.0) rho = default_radius(*state.mesh);
  return interface_angles(nodal_regions(state), point.location, point.on_boundary, rho);
}

Densities split_harmonic_state(const DiskMesh& mesh, const BoundaryDatum& datum, const Signs& signs) {
  const Field psi = field_on_grid(signed_trace(datum, signs), mesh);
  const std::size_t n = mesh.vertex_count();
  std::vector<std::vector<std::size_t>> nbr(n);
  for (const auto& t : mesh.triangles) {
    for (std::size_t k = 0; k < 3; ++k) {
      const auto a = static_cast<std::size_t>(t[k]);
      const auto b = static_cast<std::size_t>(t[(k + 1) % 3]);
      nbr[a].push_back(b);
      nbr[b].push_back(a);
    }
  }
  auto sign_of = [](double x) { return x > 0.0 ? 1 : (x < 0.0 ? -1 : 0); };
  // Species owning a boundary vertex: the arc whose trace is positive there
  // and whose sign matches psi.
  auto arc_owner = [&](std::size_t v) {
    for (int i = 0; i < kSpecies; ++i) {
      if (datum.trace(i).at(mesh.boundary_angle[v]) > 0.0 && signs[static_cast<std::size_t>(i)] == sign_of(psi[v])) {
        return i;
      }
    }
    return -1;
  };
  // |psi| has no interior maximum on a nodal domain, so steepest ascent
  // through same-sign neighbours ends on the arc of that domain. Unlike a
  // flood fill it does not leak across thin wedges near boundary zeros.
  std::vector<int> owner(n, -2);  // -2 unknown, -1 none
  std::vector<std::size_t> path;
  for (std::size_t v0 = 0; v0 < n; ++v0) {
    if (owner[v0] != -2) continue;
    path.clear();
    std::size_t v = v0;
    int found = -1;
    while (true) {
      if (owner[v] != -2) {
        found = owner[v];
        break;
      }
      path.push_back(v);
      const int sv = sign_of(psi[v]);
      if (sv == 0) break;
      if (mesh.on_boundary[v]) {
        found = arc_owner(v);
        if (found >= 0) break;
      }
      std::size_t next = v;
      for (std::size_t w : nbr[v]) {
        if (sign_of(psi[w]) == sv && std::abs(psi[w]) > std::abs(psi[next])) next = w;
      }
      if (next == v) break;
      v = next;
    }
    for (std::size_t w : path) owner[w] = found;
  }
  Densities u;
  for (auto& f : u) f = Field(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    if (owner[v] >= 0) u[static_cast<std::size_t>(owner[v])][v] = std::abs(psi[v]);
  }
  return u;
}

}  // namespace segrex
