#pragma once

#include <cstddef>
#include <vector>

#include "segrex/geometry.hpp"
#include "segrex/mesh.hpp"
#include "segrex/trace.hpp"

namespace segrex {

// Points closer than this to the circle are not evaluated by quadrature.
inline constexpr double kDefaultRim = 1e-3;

// Value, gradient and Hessian of a harmonic function at one point.
struct HarmonicJet {
  double value = 0.0;
  Vec2 grad;
  double hxx = 0.0;
  double hxy = 0.0;
  double hyy = 0.0;
};

// Harmonic extension of the trace at an interior point by trapezoid quadrature
// of the Poisson kernel (1 - |x|^2) / |x - eta|^2. Throws DomainError when
// |x| >= 1 - rim.
double poisson_eval(const TraceFunction& trace, Vec2 x, double rim = kDefaultRim);

// Gradient of the harmonic extension from the analytically differentiated kernel.
Vec2 poisson_grad(const TraceFunction& trace, Vec2 x, double rim = kDefaultRim);

// Value, gradient and Hessian in a single pass over the samples.
HarmonicJet poisson_jet(const TraceFunction& trace, Vec2 x, double rim = kDefaultRim);

// Fourier coefficients with the convention
//   f(t) ~ A_0 / 2 + sum_{k>=1} A_k cos(k t) + B_k sin(k t),
// A_k = (1/pi) int f cos(kt) dt by the trapezoid rule. b[k-1] holds B_k.
struct FourierCoeffs {
  std::vector<double> a;  // A_0 .. A_K
  std::vector<double> b;  // B_1 .. B_K

  std::size_t order() const { return b.size(); }
};

// Throws std::invalid_argument when K >= m/2 (aliasing).
FourierCoeffs fourier_coeffs(const TraceFunction& trace, std::size_t K);

// Harmonic polynomial A_0/2 + sum r^k (A_k cos k t + B_k sin k t), defined on
// all of R^2. Used to follow critical points that leave the disk.
class HarmonicPolynomial {
 public:
  explicit HarmonicPolynomial(const FourierCoeffs& coeffs);

  HarmonicJet jet(Vec2 x) const;
  double operator()(Vec2 x) const { return jet(x).value; }

 private:
  // f(z) = sum c_k z^k with psi = Re f.
  std::vector<double> re_;
  std::vector<double> im_;
};

enum class CriticalKind { saddle, degenerate };

struct CriticalPoint {
  Vec2 location;
  double value = 0.0;
  CriticalKind kind = CriticalKind::saddle;
  double gradient_norm = 0.0;
};

struct CriticalPointOptions {
  int radial_seeds = 64;
  int angular_seeds = 64;
  double seed_radius = 0.995;
  double tol = 1e-12;           // on |grad|, scaled by max(1, max|trace|)
  int max_iterations = 50;
  double dedup_radius = 1e-6;
  double rim = kDefaultRim;
  // Roots are kept only where the quadrature is resolved: 1 - |x| must exceed
  // this many sample spacings. Closer to the circle the discrete Poisson sum
  // has spurious saddles between neighbouring samples.
  double guard_cells = 4.0;
  double degenerate_hessian = 1e-8;  // relative to max(1, max|trace|)

  // Diagnostic mode: follow the truncated Fourier series on R^2 instead of
  // the Poisson integral, seeding over a disk of radius extended_radius.
  bool extended = false;
  double extended_radius = 2.0;
  std::size_t extended_order = 32;
};

// Interior critical points of the harmonic extension of `trace`, found by
// Newton's method on grad psi = 0 seeded from a polar grid. Newton runs from
// the grid points where |grad psi| is locally minimal among grid neighbours.
std::vector<CriticalPoint> critical_points(const TraceFunction& trace, const CriticalPointOptions& opts = {});

// Largest radius at which critical points are trusted for this trace.
double reliable_radius(const TraceFunction& trace, const CriticalPointOptions& opts);

// Nodal values of the harmonic extension. Boundary vertices and vertices
// inside the rim take interpolated trace values.
Field field_on_grid(const TraceFunction& trace, const DiskMesh& mesh, double rim = kDefaultRim);

}  // namespace segrex
