#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "segrex/geometry.hpp"

namespace segrex {

// Relative threshold under which a boundary sample counts as zero.
inline constexpr double kZeroRelTol = 1e-10;

// A 2pi-periodic scalar function sampled at m uniform angles,
// values[k] = f(2 pi k / m), read back with piecewise-linear interpolation.
class TraceFunction {
 public:
  static constexpr std::size_t kMinSamples = 16;

  // Throws std::invalid_argument unless m >= 16, m even and all values finite.
  explicit TraceFunction(std::vector<double> values);

  // Samples f(theta) at the m grid angles.
  template <typename F>
  static TraceFunction sample(std::size_t m, F&& f) {
    std::vector<double> v(m);
    for (std::size_t k = 0; k < m; ++k) v[k] = f(grid_angle(k, m));
    return TraceFunction(std::move(v));
  }

  static TraceFunction zeros(std::size_t m) { return TraceFunction(std::vector<double>(m, 0.0)); }

  static double grid_angle(std::size_t k, std::size_t m) {
    return kTwoPi * static_cast<double>(k) / static_cast<double>(m);
  }

  std::size_t size() const { return values_.size(); }
  double step() const { return kTwoPi / static_cast<double>(values_.size()); }
  double angle(std::size_t k) const { return grid_angle(k, values_.size()); }
  double operator[](std::size_t k) const { return values_[k]; }
  std::span<const double> values() const { return values_; }

  // Piecewise-linear periodic interpolation at an arbitrary angle.
  double at(double theta) const;

  double max_abs() const;
  double min() const;
  double max() const;
  // Trapezoid mean (1/m) sum values, i.e. (1/2pi) * integral over the circle.
  double mean() const;

  TraceFunction& operator+=(const TraceFunction& o);
  TraceFunction& operator*=(double s);
  friend TraceFunction operator+(TraceFunction a, const TraceFunction& b) { return a += b; }
  friend TraceFunction operator*(double s, TraceFunction a) { return a *= s; }

 private:
  std::vector<double> values_;
};

// Shared cos/sin tables for the uniform grid of size m.
struct CircleGrid {
  std::vector<double> cos;
  std::vector<double> sin;
};
const CircleGrid& circle_grid(std::size_t m);

}  // namespace segrex
