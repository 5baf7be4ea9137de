#include "segrex/pde.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "segrex/errors.hpp"

namespace segrex {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Vec = Eigen::VectorXd;

constexpr double kSolveTol = 1e-10;

// Per-triangle P1 stiffness: K_ab = (e_a . e_b) / (4A), e_a the edge opposite a.
std::array<std::array<double, 3>, 3> local_stiffness(const DiskMesh& mesh, std::size_t t) {
  const auto& tri = mesh.triangles[t];
  std::array<Vec2, 3> p;
  for (std::size_t a = 0; a < 3; ++a) p[a] = mesh.vertices[static_cast<std::size_t>(tri[a])];
  std::array<Vec2, 3> e{p[2] - p[1], p[0] - p[2], p[1] - p[0]};
  const double area = mesh.triangle_area(t);
  std::array<std::array<double, 3>, 3> k{};
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t b = 0; b < 3; ++b) k[a][b] = dot(e[a], e[b]) / (4.0 * area);
  }
  return k;
}

// Stiffness split into interior/boundary blocks plus the lumped mass.
class LaplaceSystem {
 public:
  explicit LaplaceSystem(const DiskMesh& mesh) : mesh_(mesh) {
    const std::size_t n = mesh.vertex_count();
    slot_.assign(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
      if (mesh.on_boundary[i]) {
        slot_[i] = static_cast<int>(boundary_.size());
        boundary_.push_back(i);
      } else {
        slot_[i] = static_cast<int>(interior_.size());
        interior_.push_back(i);
      }
    }
    if (boundary_.empty()) throw std::invalid_argument("mesh has no boundary vertices");
    std::vector<Eigen::Triplet<double>> tii, tib;
    mass_.assign(interior_.size(), 0.0);
    for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
      const auto k = local_stiffness(mesh, t);
      const double third = mesh.triangle_area(t) / 3.0;
      const auto& tri = mesh.triangles[t];
      for (std::size_t a = 0; a < 3; ++a) {
        const auto va = static_cast<std::size_t>(tri[a]);
        if (mesh.on_boundary[va]) continue;
        const int ra = slot_[va];
        mass_[static_cast<std::size_t>(ra)] += third;
        for (std::size_t b = 0; b < 3; ++b) {
          const auto vb = static_cast<std::size_t>(tri[b]);
          if (mesh.on_boundary[vb]) {
            tib.emplace_back(ra, slot_[vb], k[a][b]);
          } else {
            tii.emplace_back(ra, slot_[vb], k[a][b]);
          }
        }
      }
    }
    kii_.resize(static_cast<Eigen::Index>(interior_.size()), static_cast<Eigen::Index>(interior_.size()));
    kii_.setFromTriplets(tii.begin(), tii.end());
    kii_.makeCompressed();
    kib_.resize(static_cast<Eigen::Index>(interior_.size()), static_cast<Eigen::Index>(boundary_.size()));
    kib_.setFromTriplets(tib.begin(), tib.end());
    kib_.makeCompressed();
    diag_.resize(interior_.size());
    for (Eigen::Index c = 0; c < kii_.outerSize(); ++c) {
      for (SpMat::InnerIterator it(kii_, c); it; ++it) {
        if (it.row() == it.col()) diag_[static_cast<std::size_t>(c)] = &it.valueRef() - kii_.valuePtr();
      }
    }
    if (!interior_.empty()) chol_.analyzePattern(kii_);
  }

  std::size_t interior_count() const { return interior_.size(); }
  const std::vector<std::size_t>& interior() const { return interior_; }
  const std::vector<std::size_t>& boundary() const { return boundary_; }
  double lumped_mass(std::size_t r) const { return mass_[r]; }

  // Solves (K_II + diag(reaction)) u_I = -K_IB g_B and scatters into a nodal field.
  Field solve(const std::vector<double>& boundary_values, const std::vector<double>* reaction) {
    Field out(mesh_.vertex_count());
    Vec g(static_cast<Eigen::Index>(boundary_.size()));
    for (std::size_t b = 0; b < boundary_.size(); ++b) {
      g[static_cast<Eigen::Index>(b)] = boundary_values[b];
      out[boundary_[b]] = boundary_values[b];
    }
    if (interior_.empty()) return out;
    SpMat a = kii_;
    if (reaction) {
      double* v = a.valuePtr();
      for (std::size_t r = 0; r < diag_.size(); ++r) v[diag_[r]] += (*reaction)[r];
    }
    chol_.factorize(a);
    if (chol_.info() != Eigen::Success) throw NumericalError("Cholesky factorization failed");
    const Vec rhs = -(kib_ * g);
    const Vec x = chol_.solve(rhs);
    if (chol_.info() != Eigen::Success) throw NumericalError("Cholesky solve failed");
    const double bnorm = rhs.norm();
    const double res = (a * x - rhs).norm();
    if (!std::isfinite(res) || res > kSolveTol * std::max(bnorm, 1e-300)) {
      if (bnorm > 0.0 || res > 0.0) {
        std::ostringstream os;
        os << "linear solve residual " << res << " exceeds " << kSolveTol << " * " << bnorm;
        throw NumericalError(os.str());
      }
    }
    for (std::size_t r = 0; r < interior_.size(); ++r) out[interior_[r]] = x[static_cast<Eigen::Index>(r)];
    return out;
  }

 private:
  const DiskMesh& mesh_;
  std::vector<int> slot_;
  std::vector<std::size_t> interior_;
  std::vector<std::size_t> boundary_;
  std::vector<double> mass_;
  std::vector<Eigen::Index> diag_;
  SpMat kii_;
  SpMat kib_;
  Eigen::SimplicialLLT<SpMat> chol_;
};

std::vector<double> boundary_samples(const DiskMesh& mesh, const std::vector<std::size_t>& boundary,
                                     const TraceFunction& trace) {
  std::vector<double> g(boundary.size());
  for (std::size_t b = 0; b < boundary.size(); ++b) g[b] = trace.at(mesh.boundary_angle[boundary[b]]);
  return g;
}

double midpoint_product(const DiskMesh& mesh, const Field& f, const Field& g) {
  double s = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto& tri = mesh.triangles[t];
    double acc = 0.0;
    for (std::size_t e = 0; e < 3; ++e) {
      const auto a = static_cast<std::size_t>(tri[e]);
      const auto b = static_cast<std::size_t>(tri[(e + 1) % 3]);
      acc += 0.25 * (f[a] + f[b]) * (g[a] + g[b]);
    }
    s += mesh.triangle_area(t) / 3.0 * acc;
  }
  return s;
}

}  // namespace

Field harmonic_extension_fem(const DiskMesh& mesh, const TraceFunction& trace) {
  LaplaceSystem sys(mesh);
  return sys.solve(boundary_samples(mesh, sys.boundary(), trace), nullptr);
}

void SolverConfig::check() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw std::invalid_argument("mu must be positive");
  if (outer_sweeps < 1) throw std::invalid_argument("outer_sweeps must be >= 1");
  if (!(tol >= 0.0)) throw std::invalid_argument("tol must be nonnegative");
}

Field SystemState::total() const {
  Field s(u[0].size());
  for (const auto& f : u) {
    for (std::size_t i = 0; i < s.size(); ++i) s[i] += f[i];
  }
  return s;
}

SystemState solve_system(std::shared_ptr<const DiskMesh> mesh, const BoundaryDatum& datum, const SolverConfig& config) {
  config.check();
  require_admissible(datum);
  if (!mesh) throw std::invalid_argument("solve_system needs a mesh");

  LaplaceSystem sys(*mesh);
  const std::size_t n = mesh->vertex_count();
  std::array<std::vector<double>, kSpecies> g;
  for (int i = 0; i < kSpecies; ++i) g[static_cast<std::size_t>(i)] = boundary_samples(*mesh, sys.boundary(), datum.trace(i));

  SystemState state;
  state.mesh = mesh;
  Densities uold;
  for (auto& f : uold) f = Field(n, 0.0);
  std::vector<double> reaction(sys.interior_count());

  const bool gauss_seidel = config.scheme == SweepScheme::GaussSeidel;
  for (int sweep = 1; sweep <= config.outer_sweeps; ++sweep) {
    Densities unew = uold;
    for (int i = 0; i < kSpecies; ++i) {
      for (std::size_t r = 0; r < sys.interior_count(); ++r) {
        const std::size_t v = sys.interior()[r];
        double others = 0.0;
        for (int j = 0; j < kSpecies; ++j) {
          if (j == i) continue;
          const auto& src = (gauss_seidel && j < i) ? unew : uold;
          others += src[static_cast<std::size_t>(j)][v];
        }
        reaction[r] = config.mu * sys.lumped_mass(r) * others;
      }
      unew[static_cast<std::size_t>(i)] = sys.solve(g[static_cast<std::size_t>(i)], &reaction);
    }
    double change = 0.0;
    for (std::size_t i = 0; i < kSpecies; ++i) {
      for (std::size_t v = 0; v < n; ++v) {
        const double x = unew[i][v];
        if (!std::isfinite(x)) throw NumericalError("fixed-point iteration diverged at sweep " + std::to_string(sweep));
        change = std::max(change, std::abs(x - uold[i][v]));
      }
    }
    uold = std::move(unew);
    state.residual_history.push_back(change);
    state.sweeps = sweep;
    if (change < config.tol) {
      state.converged = true;
      break;
    }
  }
  if (!state.converged) {
    std::ostringstream os;
    os << "max nodal change " << state.residual_history.back() << " after " << state.sweeps
       << " sweeps is above tol " << config.tol;
    state.warnings.push_back(os.str());
  }

  double clamp = 0.0;
  for (auto& f : uold) {
    for (double& x : f.values) {
      if (x < 0.0) {
        clamp = std::max(clamp, -x);
        x = 0.0;
      }
    }
  }
  state.clamp_size = clamp;
  if (clamp > 1e-6 * datum.max_abs()) {
    std::ostringstream os;
    os << "clamped negative densities of size " << clamp;
    state.warnings.push_back(os.str());
  }
  state.u = std::move(uold);
  return state;
}

SystemState solve_system(const BoundaryDatum& datum, const SolverConfig& config) {
  config.check();
  auto mesh = std::make_shared<const DiskMesh>(build_mesh(config.rings, config.sectors));
  return solve_system(std::move(mesh), datum, config);
}

OverlapMatrix overlap(const DiskMesh& mesh, const Densities& u) {
  OverlapMatrix m{};
  for (std::size_t i = 0; i < kSpecies; ++i) {
    for (std::size_t j = i; j < kSpecies; ++j) {
      m[i][j] = midpoint_product(mesh, u[i], u[j]);
      m[j][i] = m[i][j];
    }
  }
  return m;
}

OverlapMatrix overlap(const SystemState& state) { return overlap(*state.mesh, state.u); }

double max_off_diagonal(const OverlapMatrix& m) {
  double r = 0.0;
  for (std::size_t i = 0; i < kSpecies; ++i) {
    for (std::size_t j = 0; j < kSpecies; ++j) {
      if (i != j) r = std::max(r, m[i][j]);
    }
  }
  return r;
}

double dirichlet_energy(const DiskMesh& mesh, const Field& f) {
  double e = 0.0;
  for (std::size_t t = 0; t < mesh.triangle_count(); ++t) {
    const auto k = local_stiffness(mesh, t);
    const auto& tri = mesh.triangles[t];
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = 0; b < 3; ++b) {
        e += f[static_cast<std::size_t>(tri[a])] * k[a][b] * f[static_cast<std::size_t>(tri[b])];
      }
    }
  }
  return e;
}

double energy(const DiskMesh& mesh, const Densities& u) {
  double e = 0.0;
  for (const auto& f : u) e += dirichlet_energy(mesh, f);
  return e;
}

double energy(const SystemState& state) { return energy(*state.mesh, state.u); }

double l2_norm(const DiskMesh& mesh, const Field& f) { return std::sqrt(std::max(0.0, midpoint_product(mesh, f, f))); }

}  // namespace segrex
