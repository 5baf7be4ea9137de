#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include "segrex/boundary.hpp"
#include "segrex/mesh.hpp"
#include "segrex/trace.hpp"

namespace segrex {

// P1 Galerkin solution of the Laplace equation with Dirichlet data
// interpolated from the trace at boundary vertices.
Field harmonic_extension_fem(const DiskMesh& mesh, const TraceFunction& trace);

// Jacobi: every species reads the previous sweep (default).
// GaussSeidel: species i reads the already updated species j < i.
enum class SweepScheme { Jacobi, GaussSeidel };

struct SolverConfig {
  double mu = 100.0;      // interaction strength
  int outer_sweeps = 20;  // fixed-point sweeps
  double tol = 1e-8;      // early stop on the max nodal change between sweeps
  int rings = 60;
  int sectors = 256;
  SweepScheme scheme = SweepScheme::Jacobi;

  void check() const;  // throws std::invalid_argument
};

using Densities = std::array<Field, kSpecies>;

struct SystemState {
  std::shared_ptr<const DiskMesh> mesh;
  Densities u;
  std::vector<double> residual_history;  // max nodal change after each sweep
  bool converged = false;
  int sweeps = 0;
  double clamp_size = 0.0;  // largest negative value removed by the final clamp
  std::vector<std::string> warnings;

  // U = u_1 + u_2 + u_3 + u_4.
  Field total() const;
};

// Fixed-point iteration for
//   -lap u_i = -mu u_i sum_{j != i} u_j in D,  u_i = phi_i on the circle.
// Each sweep solves, for every species, the linear problem
//   a(u_i, v) + mu int u_i (sum_{j != i} uold_j) v = 0
// with the reaction coefficient frozen at the previous sweep (all four
// species read the same uold) and mass-lumped. Starts from uold = 0.
SystemState solve_system(std::shared_ptr<const DiskMesh> mesh, const BoundaryDatum& datum, const SolverConfig& config);

// Builds the mesh from config.rings / config.sectors.
SystemState solve_system(const BoundaryDatum& datum, const SolverConfig& config);

using OverlapMatrix = std::array<std::array<double, kSpecies>, kSpecies>;

// int_D u_i u_j, edge-midpoint rule per triangle (exact for P1 products).
OverlapMatrix overlap(const SystemState& state);
OverlapMatrix overlap(const DiskMesh& mesh, const Densities& u);
double max_off_diagonal(const OverlapMatrix& m);

// Dirichlet energy sum_i int |grad u_i|^2 of the P1 fields.
double energy(const DiskMesh& mesh, const Densities& u);
double energy(const SystemState& state);
double dirichlet_energy(const DiskMesh& mesh, const Field& f);

// L2 norm of a P1 field (edge-midpoint rule).
double l2_norm(const DiskMesh& mesh, const Field& f);

}  // namespace segrex
