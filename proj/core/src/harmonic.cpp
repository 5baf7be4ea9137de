#include "segrex/harmonic.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>

#include "segrex/errors.hpp"

namespace segrex {

namespace {

void check_rim(Vec2 x, double rim) {
  if (!(norm(x) < 1.0 - rim)) {
    throw DomainError("point (" + std::to_string(x.x) + ", " + std::to_string(x.y) +
                      ") is within the rim of the unit circle; use boundary values");
  }
}

double trace_scale(const TraceFunction& trace) { return std::max(1.0, trace.max_abs()); }

}  // namespace

double poisson_eval(const TraceFunction& trace, Vec2 x, double rim) {
  check_rim(x, rim);
  const auto& g = circle_grid(trace.size());
  const double w = 1.0 - norm2(x);
  double s = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double dx = x.x - g.cos[k];
    const double dy = x.y - g.sin[k];
    s += trace[k] / (dx * dx + dy * dy);
  }
  return w * s / static_cast<double>(trace.size());
}

Vec2 poisson_grad(const TraceFunction& trace, Vec2 x, double rim) {
  check_rim(x, rim);
  const auto& g = circle_grid(trace.size());
  const double w = 1.0 - norm2(x);
  double gx = 0.0;
  double gy = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double dx = x.x - g.cos[k];
    const double dy = x.y - g.sin[k];
    const double q = dx * dx + dy * dy;
    const double f = trace[k] / (q * q);
    gx += f * (x.x * q + w * dx);
    gy += f * (x.y * q + w * dy);
  }
  const double scale = -2.0 / static_cast<double>(trace.size());
  return {scale * gx, scale * gy};
}

HarmonicJet poisson_jet(const TraceFunction& trace, Vec2 x, double rim) {
  check_rim(x, rim);
  const auto& g = circle_grid(trace.size());
  const double w = 1.0 - norm2(x);
  double v = 0.0, gx = 0.0, gy = 0.0, hxx = 0.0, hxy = 0.0, hyy = 0.0;
  for (std::size_t k = 0; k < trace.size(); ++k) {
    const double phi = trace[k];
    if (phi == 0.0) continue;
    const double dx = x.x - g.cos[k];
    const double dy = x.y - g.sin[k];
    const double q = dx * dx + dy * dy;
    const double iq = 1.0 / q;
    const double iq2 = iq * iq;
    const double iq3 = iq2 * iq;
    v += phi * iq;
    gx += phi * (x.x * q + w * dx) * iq2;
    gy += phi * (x.y * q + w * dy) * iq2;
    // d2P/da db = -2 delta/q + 4 (x_a d_b + x_b d_a)/q^2 + 8 w d_a d_b/q^3 - 2 w delta/q^2
    hxx += phi * (-2.0 * iq + 8.0 * x.x * dx * iq2 + 8.0 * w * dx * dx * iq3 - 2.0 * w * iq2);
    hyy += phi * (-2.0 * iq + 8.0 * x.y * dy * iq2 + 8.0 * w * dy * dy * iq3 - 2.0 * w * iq2);
    hxy += phi * (4.0 * (x.x * dy + x.y * dx) * iq2 + 8.0 * w * dx * dy * iq3);
  }
  const double inv_m = 1.0 / static_cast<double>(trace.size());
  HarmonicJet j;
  j.value = w * v * inv_m;
  j.grad = {-2.0 * gx * inv_m, -2.0 * gy * inv_m};
  j.hxx = hxx * inv_m;
  j.hxy = hxy * inv_m;
  j.hyy = hyy * inv_m;
  return j;
}

FourierCoeffs fourier_coeffs(const TraceFunction& trace, std::size_t K) {
  const std::size_t m = trace.size();
  if (K >= m / 2) {
    throw std::invalid_argument("Fourier order " + std::to_string(K) + " aliases on " + std::to_string(m) +
                                " samples (need K < m/2)");
  }
  FourierCoeffs c;
  c.a.assign(K + 1, 0.0);
  c.b.assign(K, 0.0);
  const auto& g = circle_grid(m);
  const double scale = 2.0 / static_cast<double>(m);
  for (std::size_t k = 0; k <= K; ++k) {
    double sa = 0.0;
    double sb = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      // Index arithmetic keeps cos(k t_j) on the cached table exactly.
      const std::size_t idx = (k * j) % m;
      sa += trace[j] * g.cos[idx];
      sb += trace[j] * g.sin[idx];
    }
    c.a[k] = scale * sa;
    if (k > 0) c.b[k - 1] = scale * sb;
  }
  return c;
}

HarmonicPolynomial::HarmonicPolynomial(const FourierCoeffs& coeffs) {
  const std::size_t K = coeffs.order();
  re_.assign(K + 1, 0.0);
  im_.assign(K + 1, 0.0);
  double amax = 0.0;
  for (double v : coeffs.a) amax = std::max(amax, std::abs(v));
  for (double v : coeffs.b) amax = std::max(amax, std::abs(v));
  // Quadrature noise in high modes grows like r^k outside the disk.
  const double cut = 1e-13 * amax;
  re_[0] = coeffs.a.empty() ? 0.0 : coeffs.a[0] / 2.0;
  for (std::size_t k = 1; k <= K; ++k) {
    const double a = coeffs.a[k];
    const double b = coeffs.b[k - 1];
    re_[k] = std::abs(a) > cut ? a : 0.0;
    im_[k] = std::abs(b) > cut ? -b : 0.0;
  }
}

HarmonicJet HarmonicPolynomial::jet(Vec2 x) const {
  using C = std::complex<double>;
  const C z(x.x, x.y);
  C f = 0.0, df = 0.0, d2f = 0.0;
  for (std::size_t k = re_.size(); k-- > 0;) {
    d2f = d2f * z + 2.0 * df;
    df = df * z + f;
    f = f * z + C(re_[k], im_[k]);
  }
  HarmonicJet j;
  j.value = f.real();
  j.grad = {df.real(), -df.imag()};
  j.hxx = d2f.real();
  j.hxy = -d2f.imag();
  j.hyy = -d2f.real();
  return j;
}

double reliable_radius(const TraceFunction& trace, const CriticalPointOptions& opts) {
  return 1.0 - std::max(opts.rim, opts.guard_cells * trace.step());
}

std::vector<CriticalPoint> critical_points(const TraceFunction& trace, const CriticalPointOptions& opts) {
  if (opts.radial_seeds < 2 || opts.angular_seeds < 3 || opts.max_iterations < 1) {
    throw std::invalid_argument("critical point search needs at least a 2x3 seed grid");
  }
  const double scale = trace_scale(trace);
  const double gtol = opts.tol * scale;

  std::function<HarmonicJet(Vec2)> jet;
  double seed_r = opts.seed_radius;
  double keep_r = reliable_radius(trace, opts);
  double walk_r = 1.0 - opts.rim;
  std::optional<HarmonicPolynomial> poly;
  if (opts.extended) {
    poly.emplace(fourier_coeffs(trace, std::min(opts.extended_order, trace.size() / 2 - 1)));
    jet = [&poly](Vec2 x) { return poly->jet(x); };
    seed_r = opts.extended_radius;
    keep_r = walk_r = 1e3 * std::max(1.0, opts.extended_radius);
  } else {
    const double rim = opts.rim;
    jet = [&trace, rim](Vec2 x) { return poisson_jet(trace, x, rim); };
    seed_r = std::min(seed_r, walk_r * (1.0 - 1e-12));
  }

  // Polar seed grid: ring 0 is the centre, rings 1..nr-1 carry na seeds each.
  const int nr = opts.radial_seeds;
  const int na = opts.angular_seeds;
  std::vector<Vec2> seeds;
  std::vector<double> g2;
  seeds.push_back({0.0, 0.0});
  for (int i = 1; i < nr; ++i) {
    const double r = seed_r * i / (nr - 1);
    for (int j = 0; j < na; ++j) seeds.push_back(r * unit_vector(kTwoPi * j / na));
  }
  g2.reserve(seeds.size());
  for (const Vec2& s : seeds) g2.push_back(norm2(jet(s).grad));
  auto index = [na](int i, int j) { return i == 0 ? 0 : 1 + (i - 1) * na + ((j % na) + na) % na; };

  std::vector<std::size_t> starts;
  {
    bool centre_min = true;
    for (int j = 0; j < na && nr > 1; ++j) centre_min = centre_min && g2[0] <= g2[static_cast<std::size_t>(index(1, j))];
    if (centre_min) starts.push_back(0);
  }
  for (int i = 1; i < nr; ++i) {
    for (int j = 0; j < na; ++j) {
      const double v = g2[static_cast<std::size_t>(index(i, j))];
      bool local_min = v <= g2[static_cast<std::size_t>(index(i - 1, j))] &&
                       v <= g2[static_cast<std::size_t>(index(i, j - 1))] &&
                       v <= g2[static_cast<std::size_t>(index(i, j + 1))];
      if (i + 1 < nr) local_min = local_min && v <= g2[static_cast<std::size_t>(index(i + 1, j))];
      if (local_min) starts.push_back(static_cast<std::size_t>(index(i, j)));
    }
  }

  std::vector<CriticalPoint> found;
  for (std::size_t s : starts) {
    Vec2 x = seeds[s];
    HarmonicJet jx = jet(x);
    bool converged = false;
    for (int it = 0; it < opts.max_iterations; ++it) {
      if (norm(jx.grad) <= gtol) {
        converged = true;
        break;
      }
      const double det = jx.hxx * jx.hyy - jx.hxy * jx.hxy;
      if (!(std::abs(det) > 0.0) || !std::isfinite(det)) break;
      Vec2 step{-(jx.hyy * jx.grad.x - jx.hxy * jx.grad.y) / det, -(-jx.hxy * jx.grad.x + jx.hxx * jx.grad.y) / det};
      Vec2 xn = x + step;
      int halvings = 0;
      while (norm(xn) >= walk_r && halvings < 30) {
        step *= 0.5;
        xn = x + step;
        ++halvings;
      }
      if (norm(xn) >= walk_r) break;
      x = xn;
      jx = jet(x);
      if (norm(step) <= 1e-15 * std::max(1.0, norm(x))) {
        // Stalled at round-off level; accept only a near-zero gradient.
        converged = norm(jx.grad) <= 1e4 * gtol;
        break;
      }
    }
    if (!converged && norm(jx.grad) <= gtol) converged = true;
    if (!converged || norm(x) >= keep_r) continue;
    bool duplicate = false;
    for (const auto& c : found) duplicate = duplicate || distance(c.location, x) <= opts.dedup_radius;
    if (duplicate) continue;
    CriticalPoint cp;
    cp.location = x;
    cp.value = jx.value;
    cp.gradient_norm = norm(jx.grad);
    const double hess = std::hypot(jx.hxx, jx.hxy);
    cp.kind = hess <= opts.degenerate_hessian * scale ? CriticalKind::degenerate : CriticalKind::saddle;
    found.push_back(cp);
  }
  return found;
}

Field field_on_grid(const TraceFunction& trace, const DiskMesh& mesh, double rim) {
  Field out(mesh.vertex_count());
  for (std::size_t i = 0; i < mesh.vertex_count(); ++i) {
    const Vec2 x = mesh.vertices[i];
    if (mesh.on_boundary[i]) {
      out[i] = trace.at(mesh.boundary_angle[i]);
    } else if (norm(x) < 1.0 - rim) {
      out[i] = poisson_eval(trace, x, rim);
    } else {
      out[i] = trace.at(polar_angle(x));
    }
  }
  return out;
}

}  // namespace segrex
