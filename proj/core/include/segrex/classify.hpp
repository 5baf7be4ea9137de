#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "segrex/boundary.hpp"
#include "segrex/conformal.hpp"
#include "segrex/errors.hpp"
#include "segrex/mesh.hpp"
#include "segrex/pde.hpp"

namespace segrex {

// Part of the common boundary of two nodal regions, as a polyline.
// Species are 1-based (a < b).
struct InterfaceCurve {
  int a = 0;
  int b = 0;
  std::vector<Vec2> points;
  bool closed = false;
};

struct NodalPartition {
  std::vector<int> label;     // 0 (null region) or 1..4 per vertex
  std::vector<int> dominant;  // argmax species per vertex, 1..4
  double delta = 0.0;
  std::array<std::array<bool, kSpecies>, kSpecies> adjacency{};
  std::vector<InterfaceCurve> interfaces;
  // Points where interfaces of two species pairs meet, and interior curve ends.
  std::vector<Vec2> junctions;
  std::size_t overlap_vertices = 0;  // vertices with two densities above delta
  std::vector<std::string> warnings;
};

// 1e-3 * max_i max u_i.
double default_delta(const Densities& u);
// Three mesh cells.
double default_radius(const DiskMesh& mesh);

// Labels each vertex with its dominant species when that density exceeds
// delta. Interfaces follow u_a = u_b >= u_c inside every triangle (the
// upper envelope of the P1 densities). Mesh edges whose endpoints are both
// null and whose two triangles belong to different species are interface
// edges as well, so fields that vanish on mesh lines are handled.
NodalPartition nodal_regions(const DiskMesh& mesh, const Densities& u, double delta);
NodalPartition nodal_regions(const SystemState& state, double delta = 0.0);

// Number of species that are the largest density at some vertex within
// distance rho of x. Values below 1e-6 delta count as zero, so competition
// tails and small magnitudes near a multiple point do not affect the count.
int multiplicity(const DiskMesh& mesh, const Densities& u, Vec2 x, double rho, double delta);
int multiplicity(const SystemState& state, Vec2 x, double rho = 0.0, double delta = 0.0);

struct MultiplePoint {
  Vec2 location;
  int multiplicity = 0;
  bool on_boundary = false;
};

struct MultiplePointOptions {
  double delta = 0.0;  // 0: default_delta
  double rho = 0.0;    // 0: default_radius
};

// Clusters the interface junctions and the given boundary points within
// 2 rho and returns clusters of multiplicity >= 3. A cluster containing a
// boundary point is located at that boundary point.
std::vector<MultiplePoint> multiple_points(const DiskMesh& mesh, const Densities& u, const NodalPartition& partition,
                                           const std::vector<Vec2>& boundary_points,
                                           const MultiplePointOptions& opts = {});
std::vector<MultiplePoint> multiple_points(const SystemState& state, const BoundaryDatum& datum,
                                           const MultiplePointOptions& opts = {});

enum class ConfigurationKind { FourPoint, TwoTriplePoints };

std::string to_string(ConfigurationKind kind);

struct ClassificationDiagnostics {
  std::optional<MomentValues> moments;  // at an interior 4-point
  std::optional<double> gap;            // sup |U - |psi_a|| or |U - |Xi_a||, |x| <= 0.9
  std::string gap_reference;            // "psi_a", "xi_a" or empty
  std::optional<Signs> xi_signs;
  std::vector<double> fit_residuals;    // local expansion fit per interior point
  double delta = 0.0;
  double rho = 0.0;
  std::vector<MultiplePoint> found;
  std::vector<std::string> notes;
};

struct Classification {
  ConfigurationKind kind = ConfigurationKind::FourPoint;
  std::vector<Vec2> points;
  bool on_boundary = false;
  ClassificationDiagnostics diagnostics;
};

// Raised when the multiple points fit neither a single 4-point nor two
// 3-points; the mesh or mu is too coarse to resolve the configuration.
class ClassificationError : public NumericalError {
 public:
  ClassificationError(const std::string& what, std::vector<MultiplePoint> found)
      : NumericalError(what), found_(std::move(found)) {}
  const std::vector<MultiplePoint>& found() const { return found_; }

 private:
  std::vector<MultiplePoint> found_;
};

struct ClassifyOptions {
  MultiplePointOptions points;
  double gap_radius = 0.9;
};

Classification classify(const SystemState& state, const BoundaryDatum& datum, const ClassifyOptions& opts = {});

// Signs of Xi_a for two boundary 3-points at datum endpoints k and l
// (0-based, endpoint i starts arc i). Consecutive endpoints bound one arc i,
// and the arc opposite i gets + while the rest get -. Endpoints two apart
// split the arcs into pairs with opposite signs. nullopt otherwise.
std::optional<Signs> xi_signs(int k, int l);

// sup over vertices with |x| <= radius of |U - |h||, h the Poisson extension.
double sup_gap(const DiskMesh& mesh, const Field& total, const TraceFunction& trace, double radius = 0.9);

struct LocalFit {
  double amplitude = 0.0;  // c
  double theta0 = 0.0;     // in [-pi/h, pi/h)
  double residual = 0.0;        // RMS misfit / c
  double shape_residual = 0.0;  // RMS misfit / (c r^{h/2}), scale free
  double radius = 0.0;
};

using PointSampler = std::function<double(Vec2)>;

// Least-squares fit of c r^{h/2} |cos((h/2)(theta + theta0))| to samples on
// the circle of radius r around p. Throws DomainError when the circle leaves
// the disk and NumericalError when the fitted amplitude is negligible.
LocalFit local_expansion_fit(const PointSampler& sample, Vec2 p, int h, double radius);
// Samples the P1 field; radius 0 means five mesh cells.
LocalFit local_expansion_fit(const DiskMesh& mesh, const Field& field, Vec2 p, int h, double radius = 0.0);

// Sector angles (radians) between consecutive interfaces incident to p,
// anticlockwise. For p on the circle the sectors run from the anticlockwise
// boundary tangent to the clockwise one and sum to pi. Incident curves come
// within 2 rho of p and leave that disk. Each direction is the principal
// axis of the five curve points nearest p at distance at least rho.
std::vector<double> interface_angles(const NodalPartition& partition, Vec2 p, bool on_boundary, double rho);
std::vector<double> interface_angles(const SystemState& state, const MultiplePoint& point, double rho = 0.0);

// Limit configuration U = |psi| for psi the extension of the signed trace:
// species i takes |psi| on the nodal domains of psi that touch arc i through
// mesh edges. Vertices reached from no arc stay zero.
Densities split_harmonic_state(const DiskMesh& mesh, const BoundaryDatum& datum, const Signs& signs);

}  // namespace segrex
