#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "segrex/boundary.hpp"
#include "segrex/errors.hpp"
#include "segrex/harmonic.hpp"
#include "support.hpp"

using namespace segrex;

namespace {

TraceFunction trace_of(double (*f)(Vec2), std::size_t m = 2048) {
  return TraceFunction::sample(m, [&](double th) { return f(unit_vector(th)); });
}

double x1(Vec2 x) { return x.x; }
double x1x2(Vec2 x) { return x.x * x.y; }
double fifteen_x1x2(Vec2 x) { return 15.0 * x.x * x.y; }
double one(Vec2) { return 1.0; }
// 4(x1^2 - x2^2) + 10 x1 + 7 on the circle equals 4 cos 2t + 10 cos t + 7.
double remark(Vec2 x) { return 4.0 * (x.x * x.x - x.y * x.y) + 10.0 * x.x + 7.0; }

}  // namespace

TEST_SUITE("harmonic") {
  TEST_CASE("poisson_eval reproduces harmonic polynomials") {
    CHECK(poisson_eval(trace_of(one), {0.3, -0.2}) == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(poisson_eval(trace_of(x1), {0.5, 0.0}) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(poisson_eval(trace_of(fifteen_x1x2), {0.4, 0.3}) == doctest::Approx(1.8).epsilon(1e-12));
  }

  TEST_CASE("poisson_eval near the circle is a rim error") {
    const auto t = trace_of(x1);
    CHECK_THROWS_AS(poisson_eval(t, {0.9995, 0.0}), DomainError);
    CHECK_THROWS_AS(poisson_grad(t, {0.0, 1.0}), DomainError);
    CHECK_NOTHROW(poisson_eval(t, {0.998, 0.0}));
  }

  TEST_CASE("mean value property uses the same quadrature") {
    const auto t = alternating_trace(make_quadrant_datum({3, 9, 2, 5}));
    CHECK(std::abs(poisson_eval(t, {0, 0}) - t.mean()) <= 1e-12);
  }

  TEST_CASE("maximum principle") {
    const auto t = alternating_trace(make_quadrant_datum({3, 9, 2, 5}));
    test::Rng rng(11);
    for (int n = 0; n < 200; ++n) {
      const double v = poisson_eval(t, rng.in_disk(0.99));
      REQUIRE(v >= t.min() - 1e-12);
      REQUIRE(v <= t.max() + 1e-12);
    }
  }

  TEST_CASE("gradients") {
    test::Rng rng(3);
    for (int n = 0; n < 10; ++n) {
      const Vec2 x = rng.in_disk(0.9);
      const Vec2 g = poisson_grad(trace_of(x1), x);
      CHECK(g.x == doctest::Approx(1.0).epsilon(1e-10));
      CHECK(std::abs(g.y) < 1e-10);
      const Vec2 h = poisson_grad(trace_of(x1x2), x);
      CHECK(h.x == doctest::Approx(x.y).scale(1.0).epsilon(1e-10));
      CHECK(h.y == doctest::Approx(x.x).scale(1.0).epsilon(1e-10));
      const Vec2 c = poisson_grad(trace_of(one), x);
      CHECK(norm(c) < 1e-10);
    }
  }

  TEST_CASE("analytic gradient matches central differences") {
    const auto t = alternating_trace(make_quadrant_datum({7, 15, 7, 15}));
    test::Rng rng(5);
    const double h = 1e-5;
    for (int n = 0; n < 100; ++n) {
      const Vec2 x = rng.in_disk(0.9);
      const Vec2 g = poisson_grad(t, x);
      const double fx = (poisson_eval(t, {x.x + h, x.y}) - poisson_eval(t, {x.x - h, x.y})) / (2 * h);
      const double fy = (poisson_eval(t, {x.x, x.y + h}) - poisson_eval(t, {x.x, x.y - h})) / (2 * h);
      const double scale = std::max(1.0, norm(g));
      REQUIRE(std::abs(g.x - fx) <= 1e-6 * scale);
      REQUIRE(std::abs(g.y - fy) <= 1e-6 * scale);
    }
  }

  TEST_CASE("jet agrees with value and gradient and is harmonic") {
    const auto t = alternating_trace(make_quadrant_datum({7, 15, 7, 15}));
    const Vec2 x{0.2, -0.35};
    const auto j = poisson_jet(t, x);
    CHECK(j.value == doctest::Approx(poisson_eval(t, x)).epsilon(1e-12));
    CHECK(j.grad.x == doctest::Approx(poisson_grad(t, x).x).epsilon(1e-12));
    CHECK(std::abs(j.hxx + j.hyy) < 1e-8);
  }

  TEST_CASE("fourier coefficients") {
    const auto c = fourier_coeffs(trace_of(x1), 6);
    CHECK(c.order() == 6);
    CHECK(c.a[1] == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 0; k <= 6; ++k) {
      if (k != 1) CHECK(std::abs(c.a[k]) < 1e-12);
      if (k >= 1) CHECK(std::abs(c.b[k - 1]) < 1e-12);
    }
    const auto s = fourier_coeffs(trace_of(fifteen_x1x2), 4);
    CHECK(s.b[1] == doctest::Approx(7.5).epsilon(1e-12));
    CHECK(std::abs(s.a[2]) < 1e-12);
    CHECK(std::abs(s.b[0]) < 1e-12);
    CHECK_THROWS_AS(fourier_coeffs(trace_of(x1, 64), 32), std::invalid_argument);
  }

  TEST_CASE("harmonic polynomial from coefficients extends the trace") {
    const auto poly = HarmonicPolynomial(fourier_coeffs(trace_of(remark), 8));
    CHECK(poly({0.3, 0.1}) == doctest::Approx(remark({0.3, 0.1})).epsilon(1e-10));
    CHECK(poly({-1.5, 0.7}) == doctest::Approx(remark({-1.5, 0.7})).epsilon(1e-10));
  }

  TEST_CASE("critical points") {
    const auto saddle = critical_points(trace_of(x1x2));
    REQUIRE(saddle.size() == 1);
    CHECK(norm(saddle[0].location) < 1e-8);
    CHECK(std::abs(saddle[0].value) < 1e-10);
    CHECK(saddle[0].kind == CriticalKind::saddle);
    CHECK(critical_points(trace_of(x1)).empty());
    CHECK(critical_points(trace_of(remark)).empty());
  }

  TEST_CASE("extended mode follows the remark root outside the disk") {
    CriticalPointOptions o;
    o.extended = true;
    const auto pts = critical_points(trace_of(remark), o);
    REQUIRE(pts.size() == 1);
    CHECK(std::abs(pts[0].location.x + 1.25) < 1e-8);
    CHECK(std::abs(pts[0].location.y) < 1e-8);
  }

  TEST_CASE("nonconstant admissible data give at most one saddle") {
    test::Rng rng(17);
    for (int n = 0; n < 12; ++n) {
      std::array<double, kSpecies> c{};
      for (double& x : c) x = rng.uniform(0.5, 20.0);
      const auto pts = critical_points(alternating_trace(make_quadrant_datum(c, 1024)));
      REQUIRE(pts.size() <= 1);
      for (const auto& p : pts) CHECK(p.kind == CriticalKind::saddle);
    }
  }

  TEST_CASE("field_on_grid") {
    const auto mesh = build_mesh(20, 64);
    const auto ones = field_on_grid(trace_of(one), mesh);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) REQUIRE(ones[v] == doctest::Approx(1.0).epsilon(1e-13));
    const auto zero = field_on_grid(TraceFunction::zeros(256), mesh);
    CHECK(zero.max() == 0.0);
    CHECK(zero.min() == 0.0);
    const auto q = field_on_grid(trace_of(fifteen_x1x2), mesh);
    for (std::size_t v = 0; v < mesh.vertex_count(); ++v) {
      const Vec2 x = mesh.vertices[v];
      if (norm(x) <= 0.9) REQUIRE(std::abs(q[v] - fifteen_x1x2(x)) <= 1e-6);
      if (mesh.on_boundary[v]) REQUIRE(std::abs(q[v] - fifteen_x1x2(x)) <= 1e-3);
    }
  }
}
