#include "segrex/conformal.hpp"

#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "segrex/errors.hpp"

namespace segrex {

namespace {

using Complex = std::complex<double>;

Complex to_c(Vec2 v) { return {v.x, v.y}; }
Vec2 to_v(Complex c) { return {c.real(), c.imag()}; }

}  // namespace

MobiusMap::MobiusMap(Vec2 p) : p_(p) {
  if (!(norm(p) < 1.0)) throw std::invalid_argument("Mobius centre must lie in the open unit disk");
}

Vec2 MobiusMap::operator()(Vec2 z) const {
  const Complex p = to_c(p_);
  const Complex zc = to_c(z);
  return to_v((zc + p) / (std::conj(p) * zc + 1.0));
}

Vec2 MobiusMap::inverse(Vec2 x) const {
  const Complex p = to_c(p_);
  const Complex xc = to_c(x);
  return to_v((xc - p) / (1.0 - std::conj(p) * xc));
}

double MobiusMap::stretch(Vec2 z) const {
  const Complex p = to_c(p_);
  const Complex d = std::conj(p) * to_c(z) + 1.0;
  return (1.0 - std::norm(p)) / std::norm(d);
}

TraceFunction pullback_trace(const TraceFunction& trace, const MobiusMap& map) {
  if (map.center() == Vec2{0.0, 0.0}) return trace;
  const auto& g = circle_grid(trace.size());
  std::vector<double> v(trace.size());
  for (std::size_t k = 0; k < trace.size(); ++k) {
    v[k] = trace.at(polar_angle(map(Vec2{g.cos[k], g.sin[k]})));
  }
  return TraceFunction(std::move(v));
}

MomentValues circle_moments(const TraceFunction& trace) {
  const auto& g = circle_grid(trace.size());
  double s0 = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    s0 += trace[k];
    sx += trace[k] * g.cos[k];
    sy += trace[k] * g.sin[k];
  }
  const double h = trace.step();
  return {h * s0, {h * sx, h * sy}};
}

MomentValues moment_conditions(const BoundaryDatum& datum, Vec2 p) {
  return circle_moments(pullback_trace(alternating_trace(datum), MobiusMap(p)));
}

MomentValues origin_conditions(const BoundaryDatum& datum) {
  // Corollary form: boundary points y = (cos t_k, sin t_k) directly.
  const std::size_t m = datum.m();
  const auto& g = circle_grid(m);
  double s0 = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    double phi_a = 0.0;
    for (int i = 0; i < kSpecies; ++i) phi_a += kAlternatingSigns[static_cast<std::size_t>(i)] * datum.trace(i)[k];
    s0 += phi_a;
    sx += phi_a * g.cos[k];
    sy += phi_a * g.sin[k];
  }
  const double h = kTwoPi / static_cast<double>(m);
  return {h * s0, {h * sx, h * sy}};
}

std::optional<FourPointCandidate> find_fourpoint(const BoundaryDatum& datum, const FourPointOptions& opts) {
  require_admissible(datum);
  const TraceFunction phi_a = alternating_trace(datum);
  const double scale = phi_a.max_abs();
  if (scale == 0.0) return std::nullopt;

  std::optional<FourPointCandidate> best;
  for (const auto& cp : critical_points(phi_a, opts.critical)) {
    if (std::abs(cp.value) > opts.value_tol * scale) continue;
    if (best && std::abs(cp.value) >= std::abs(best->value)) continue;
    best = FourPointCandidate{cp.location, cp.value, {}};
  }
  if (!best) return std::nullopt;

  best->moments = moment_conditions(datum, best->location);
  const double mtol = opts.moment_tol * kTwoPi * scale;
  if (std::abs(best->moments.c1) > mtol || norm(best->moments.c2) > mtol) {
    std::ostringstream os;
    os << "4-point at (" << best->location.x << ", " << best->location.y
       << ") fails the moment cross-check: c1=" << best->moments.c1 << " |c2|=" << norm(best->moments.c2)
       << " tol=" << mtol;
    throw NumericalError(os.str());
  }
  return best;
}

}  // namespace segrex
