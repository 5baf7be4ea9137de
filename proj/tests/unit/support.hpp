#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "segrex/boundary.hpp"
#include "segrex/geometry.hpp"

namespace segrex::test {

// Quadrant index of an angle: 0 on [0, pi/2), 1 on [pi/2, pi), ...
inline int quadrant_of(double theta) {
  return static_cast<int>(std::floor(wrap_angle(theta) / (kPi / 2.0))) % 4;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo = 0.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  // Uniform point in the disk of radius r.
  Vec2 in_disk(double r) {
    const double rad = r * std::sqrt(uniform());
    return rad * unit_vector(uniform(0.0, kTwoPi));
  }

 private:
  std::mt19937_64 gen_;
};

inline std::array<TraceFunction, kSpecies> traces_of(const BoundaryDatum& d) {
  return {d.trace(0), d.trace(1), d.trace(2), d.trace(3)};
}

inline TraceFunction with_sample(const TraceFunction& t, std::size_t k, double v) {
  std::vector<double> vals(t.values().begin(), t.values().end());
  vals[k] = v;
  return TraceFunction(std::move(vals));
}

}  // namespace segrex::test
