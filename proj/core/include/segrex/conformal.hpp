#pragma once

#include <optional>

#include "segrex/boundary.hpp"
#include "segrex/geometry.hpp"
#include "segrex/harmonic.hpp"
#include "segrex/trace.hpp"

namespace segrex {

// Disk automorphism T_p(z) = (z + p) / (conj(p) z + 1), sending 0 to p.
class MobiusMap {
 public:
  // Throws std::invalid_argument unless |p| < 1.
  explicit MobiusMap(Vec2 p);

  Vec2 center() const { return p_; }
  Vec2 operator()(Vec2 z) const;
  // The unique z with T_p(z) = x, i.e. (x - p) / (1 - conj(p) x).
  Vec2 inverse(Vec2 x) const;
  // |T_p'(z)|, the local length scale factor of the map.
  double stretch(Vec2 z) const;

 private:
  Vec2 p_;
};

inline Vec2 mobius_eval(const MobiusMap& map, Vec2 z) { return map(z); }
inline Vec2 mobius_inverse(const MobiusMap& map, Vec2 x) { return map.inverse(x); }

// Samples trace(T_p(e^{i t_k})) on the input grid. The identity map returns
// the input unchanged.
TraceFunction pullback_trace(const TraceFunction& trace, const MobiusMap& map);

// Raw circle integrals with ds = dt and no normalisation:
//   c1 = int f ds,  c2_r = int f zeta_r ds.
struct MomentValues {
  double c1 = 0.0;
  Vec2 c2;
};

// Trapezoid moments of a trace.
MomentValues circle_moments(const TraceFunction& trace);

// Moments of the alternating trace pulled back by T_p. All vanish exactly
// when psi_a has a zero critical point at p.
MomentValues moment_conditions(const BoundaryDatum& datum, Vec2 p);

// The same conditions for p = 0 evaluated straight from the datum:
// int phi^a ds and int y_j phi^a ds.
MomentValues origin_conditions(const BoundaryDatum& datum);

struct FourPointOptions {
  CriticalPointOptions critical;
  double value_tol = 1e-7;   // |psi_a(p)| <= value_tol * max|phi^a|
  // Cross-check: |c1|, |c2| <= moment_tol * 2pi * max|phi^a|. The pullback
  // interpolates the trace linearly, so the check is second order in the
  // sample spacing.
  double moment_tol = 1e-4;
};

struct FourPointCandidate {
  Vec2 location;
  double value = 0.0;
  MomentValues moments;
};

// Interior 4-point of an admissible datum: a critical point of psi_a where
// psi_a vanishes. When found, the moment conditions at the point are checked
// and NumericalError is thrown if they disagree.
std::optional<FourPointCandidate> find_fourpoint(const BoundaryDatum& datum, const FourPointOptions& opts = {});

}  // namespace segrex
