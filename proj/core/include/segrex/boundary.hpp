#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "segrex/trace.hpp"

namespace segrex {

inline constexpr int kSpecies = 4;
inline constexpr std::size_t kDefaultTraceSamples = 2048;

// Open arc on the unit circle, running anticlockwise from start to end.
struct Arc {
  double start = 0.0;
  double end = 0.0;

  double length() const;
  bool contains(double theta) const;
  double midpoint() const;
};

// Four species traces (phi_1..phi_4) on a common sample grid.
//
// Construction only checks structure (equal sample counts). Whether the data
// is admissible, i.e. nonnegative with pairwise disjoint single-arc supports in
// anticlockwise order and a sum vanishing at exactly four points, is decided
// by validate().
class BoundaryDatum {
 public:
  explicit BoundaryDatum(std::array<TraceFunction, kSpecies> traces);

  std::size_t m() const { return traces_[0].size(); }
  const TraceFunction& trace(int species) const { return traces_[static_cast<std::size_t>(species)]; }
  const std::array<TraceFunction, kSpecies>& traces() const { return traces_; }

  // Sum of all four traces.
  TraceFunction total() const;
  double max_abs() const;

 private:
  std::array<TraceFunction, kSpecies> traces_;
};

struct Violation {
  std::string rule;  // nonnegativity | disjoint-supports | support-arc | arc-order | isolated-zeros
  double angle = 0.0;
  std::string detail;
};

struct AdmissibilityReport {
  bool admissible = true;
  std::vector<Violation> violations;
};

AdmissibilityReport validate(const BoundaryDatum& datum);

// Throws DomainError listing the first violation when the datum is inadmissible.
void require_admissible(const BoundaryDatum& datum);

using Signs = std::array<int, kSpecies>;

// sum_i signs[i] * phi_i on the datum's grid; signs must be +1 or -1.
TraceFunction signed_trace(const BoundaryDatum& datum, const Signs& signs);

// -phi_1 + phi_2 - phi_3 + phi_4.
TraceFunction alternating_trace(const BoundaryDatum& datum);
inline constexpr Signs kAlternatingSigns{-1, +1, -1, +1};

// Support arcs of an admissible datum (arc i is the open support of phi_i).
std::array<Arc, kSpecies> support_arcs(const BoundaryDatum& datum);

// Zeros of sum phi_i in anticlockwise order; endpoint i is where arc i starts.
std::array<double, kSpecies> endpoints(const BoundaryDatum& datum);

// phi_i = c_i |cos t sin t| on the i-th quarter arc [(i-1)pi/2, i pi/2].
// Rejects negative coefficients with DomainError.
BoundaryDatum make_quadrant_datum(const std::array<double, kSpecies>& c, std::size_t m = kDefaultTraceSamples);

// Same construction without the sign check, for perturbation data.
std::array<TraceFunction, kSpecies> quadrant_traces(const std::array<double, kSpecies>& c, std::size_t m);

// f(t) = sum_{k>=0} a[k] cos(k t) + sum_{k>=1} b[k-1] sin(k t).
// Note a[0] is the constant term itself (no 1/2 factor).
struct TrigPolynomial {
  std::vector<double> a;
  std::vector<double> b;

  double operator()(double theta) const;
};

struct PolynomialDatum {
  BoundaryDatum datum;
  int first_sign = 1;  // sign of the trace on the arc of species 1

  // first_sign * (phi_1 - phi_2 + phi_3 - phi_4): reproduces the input trace.
  Signs sign_pattern() const { return {first_sign, -first_sign, first_sign, -first_sign}; }
};

// Splits a trigonometric polynomial with exactly four sign changes into four
// species: |f| restricted to each maximal sign-constant arc, numbered
// anticlockwise starting from the arc whose first sample has the smallest
// angle. Throws DomainError reporting the count when there are not 4 changes.
PolynomialDatum make_polynomial_datum(const TrigPolynomial& poly, std::size_t m = kDefaultTraceSamples);

}  // namespace segrex
