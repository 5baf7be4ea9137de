#include "segrex/trace.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>

namespace segrex {

TraceFunction::TraceFunction(std::vector<double> values) : values_(std::move(values)) {
  const std::size_t m = values_.size();
  if (m < kMinSamples || m % 2 != 0) {
    throw std::invalid_argument("trace needs an even sample count >= 16, got " + std::to_string(m));
  }
  for (std::size_t k = 0; k < m; ++k) {
    if (!std::isfinite(values_[k])) {
      throw std::invalid_argument("trace sample " + std::to_string(k) + " is not finite");
    }
  }
}

double TraceFunction::at(double theta) const {
  const auto m = values_.size();
  const double s = wrap_angle(theta) / step();
  auto k = static_cast<std::size_t>(std::floor(s));
  double t = s - static_cast<double>(k);
  if (k >= m) {
    k = m - 1;
    t = 1.0;
  }
  const std::size_t k1 = (k + 1) % m;
  return (1.0 - t) * values_[k] + t * values_[k1];
}

double TraceFunction::max_abs() const {
  double r = 0.0;
  for (double v : values_) r = std::max(r, std::abs(v));
  return r;
}

double TraceFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }
double TraceFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }

double TraceFunction::mean() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s / static_cast<double>(values_.size());
}

TraceFunction& TraceFunction::operator+=(const TraceFunction& o) {
  if (o.size() != size()) throw std::invalid_argument("trace sizes differ");
  for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
  return *this;
}

TraceFunction& TraceFunction::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

const CircleGrid& circle_grid(std::size_t m) {
  static std::mutex mutex;
  static std::map<std::size_t, std::unique_ptr<CircleGrid>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[m];
  if (!slot) {
    slot = std::make_unique<CircleGrid>();
    slot->cos.resize(m);
    slot->sin.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
      const double th = TraceFunction::grid_angle(k, m);
      slot->cos[k] = std::cos(th);
      slot->sin[k] = std::sin(th);
    }
  }
  return *slot;
}

}  // namespace segrex
