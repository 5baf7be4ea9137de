#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "segrex/boundary.hpp"
#include "segrex/conformal.hpp"
#include "segrex/harmonic.hpp"
#include "support.hpp"

using namespace segrex;

namespace {

// Quadrant (15,15,15,15) datum transported so that its 4-point sits at p.
BoundaryDatum moved_quadrant(Vec2 p, std::size_t m = 2048) {
  const auto q = make_quadrant_datum({15, 15, 15, 15}, m);
  const MobiusMap back(-p);
  return BoundaryDatum({pullback_trace(q.trace(0), back), pullback_trace(q.trace(1), back),
                        pullback_trace(q.trace(2), back), pullback_trace(q.trace(3), back)});
}

}  // namespace

TEST_SUITE("conformal") {
  TEST_CASE("mobius_eval") {
    const MobiusMap t({0.3, 0.1});
    CHECK(t(Vec2{0, 0}) == Vec2{0.3, 0.1});
    const MobiusMap id({0, 0});
    CHECK(id(Vec2{0.2, -0.7}) == Vec2{0.2, -0.7});
    const Vec2 b = MobiusMap({0.5, 0})(Vec2{1, 0});
    CHECK(b.x == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(std::abs(b.y) < 1e-15);
    CHECK_THROWS_AS(MobiusMap({0.8, 0.6}), std::invalid_argument);
  }

  TEST_CASE("the circle is preserved") {
    test::Rng rng(1);
    for (int n = 0; n < 50; ++n) {
      const MobiusMap t(rng.in_disk(0.95));
      const Vec2 z = unit_vector(rng.uniform(0, kTwoPi));
      REQUIRE(std::abs(norm(t(z)) - 1.0) <= 1e-14);
      REQUIRE(norm(t(0.9 * z)) < 1.0);
    }
  }

  TEST_CASE("inverse") {
    const MobiusMap t({-0.4, 0.25});
    const Vec2 z = t.inverse(Vec2{-0.4, 0.25});
    CHECK(norm(z) < 1e-15);
    CHECK(MobiusMap({0, 0}).inverse(Vec2{0.1, 0.2}) == Vec2{0.1, 0.2});
    test::Rng rng(2);
    for (int n = 0; n < 100; ++n) {
      const MobiusMap m(rng.in_disk(0.9));
      const Vec2 x = rng.in_disk(1.0);
      REQUIRE(distance(m(m.inverse(x)), x) <= 1e-14);
    }
  }

  TEST_CASE("pullback of traces") {
    const auto q = alternating_trace(make_quadrant_datum({7, 15, 7, 15}));
    const auto same = pullback_trace(q, MobiusMap({0, 0}));
    for (std::size_t k = 0; k < q.size(); ++k) REQUIRE(same[k] == q[k]);
    const auto ones = pullback_trace(TraceFunction::sample(512, [](double) { return 2.5; }), MobiusMap({0.6, -0.3}));
    for (std::size_t k = 0; k < ones.size(); ++k) REQUIRE(ones[k] == doctest::Approx(2.5).epsilon(1e-15));

    const MobiusMap t({0.5, 0});
    const auto c = pullback_trace(TraceFunction::sample(4096, [](double th) { return std::cos(th); }), t);
    CHECK(c.at(kPi) == doctest::Approx(-1.0).epsilon(1e-12));
    for (std::size_t k = 0; k < c.size(); k += 97) {
      REQUIRE(c[k] == doctest::Approx(t(unit_vector(c.angle(k))).x).scale(1.0).epsilon(1e-5));
    }
  }

  TEST_CASE("moment conditions of the quadrant data") {
    const auto sym = moment_conditions(make_quadrant_datum({15, 15, 15, 15}), {0, 0});
    CHECK(std::abs(sym.c1) <= 1e-8);
    CHECK(norm(sym.c2) <= 1e-8);
    // (-7 + 15 - 7 + 15) * int_0^{pi/2} |cos t sin t| dt = 8; the trapezoid
    // error on the kinked trace is 16 h^2 / 6, below 1e-6 from m = 16384.
    const auto c = moment_conditions(make_quadrant_datum({7, 15, 7, 15}, 16384), {0, 0});
    CHECK(std::abs(c.c1 - 8.0) <= 1e-6);
    CHECK(norm(c.c2) <= 1e-8);
    const auto coarse = moment_conditions(make_quadrant_datum({7, 15, 7, 15}, 2048), {0, 0});
    const double h = kTwoPi / 2048;
    CHECK(coarse.c1 - 8.0 == doctest::Approx(-16 * h * h / 6).epsilon(1e-3));
    const auto z = moment_conditions(make_quadrant_datum({0, 0, 0, 0}, 256), {0.3, 0.4});
    CHECK(z.c1 == 0.0);
    CHECK(z.c2 == Vec2{0, 0});
  }

  TEST_CASE("origin conditions agree bitwise with the moments at p = 0") {
    for (const auto& c : {std::array<double, 4>{15, 15, 15, 15}, {7, 15, 7, 15}, {1, 4, 9, 2}}) {
      const auto d = make_quadrant_datum(c);
      const auto a = moment_conditions(d, {0, 0});
      const auto b = origin_conditions(d);
      CHECK(a.c1 == b.c1);
      CHECK(a.c2 == b.c2);
    }
  }

  TEST_CASE("gradient transforms with the factor 1 - |p|^2") {
    const auto t = TraceFunction::sample(4096, [](double th) {
      const Vec2 x = unit_vector(th);
      return x.x * x.y + 0.3 * x.x - 0.2 * (x.x * x.x - x.y * x.y);
    });
    for (const Vec2 p : {Vec2{0.3, -0.1}, Vec2{-0.2, 0.25}}) {
      const Vec2 g0 = poisson_grad(pullback_trace(t, MobiusMap(p)), {0, 0});
      const Vec2 gp = (1.0 - norm2(p)) * poisson_grad(t, p);
      CHECK(distance(g0, gp) <= 1e-6 * norm(gp));
    }
  }

  TEST_CASE("find_fourpoint") {
    const auto sym = find_fourpoint(make_quadrant_datum({15, 15, 15, 15}));
    REQUIRE(sym.has_value());
    CHECK(norm(sym->location) < 1e-8);
    CHECK_FALSE(find_fourpoint(make_quadrant_datum({7, 15, 7, 15})).has_value());
    CHECK_FALSE(find_fourpoint(make_polynomial_datum({{7, 10, 4}, {}}).datum).has_value());
  }

  TEST_CASE("a transported 4-point is found where it was moved") {
    const Vec2 p{0.3, -0.2};
    const auto d = moved_quadrant(p);
    const auto f = find_fourpoint(d);
    REQUIRE(f.has_value());
    CHECK(distance(f->location, p) < 1e-4);
    const auto c = fourier_coeffs(pullback_trace(alternating_trace(d), MobiusMap(f->location)), 4);
    const double scale = alternating_trace(d).max_abs();
    CHECK(std::abs(c.a[0]) < 1e-3 * scale);
    CHECK(std::abs(c.a[1]) < 1e-3 * scale);
    CHECK(std::abs(c.b[0]) < 1e-3 * scale);
    CHECK(std::hypot(c.a[2], c.b[1]) > 0.1 * scale);
  }

  TEST_CASE("find_fourpoint is stable under refinement and scaling") {
    const Vec2 p{-0.15, 0.1};
    const auto a = find_fourpoint(moved_quadrant(p, 2048));
    const auto b = find_fourpoint(moved_quadrant(p, 4096));
    REQUIRE(a.has_value());
    REQUIRE(b.has_value());
    CHECK(distance(a->location, b->location) <= 1e-6);

    const auto d = moved_quadrant(p);
    auto t = test::traces_of(d);
    for (auto& x : t) x *= 3.0;
    const auto s = find_fourpoint(BoundaryDatum(t));
    REQUIRE(s.has_value());
    CHECK(distance(s->location, a->location) <= 1e-9);
    const auto m1 = moment_conditions(d, {0.1, 0.1});
    const auto m3 = moment_conditions(BoundaryDatum(t), {0.1, 0.1});
    CHECK(m3.c1 == doctest::Approx(3.0 * m1.c1).epsilon(1e-12));
    CHECK(m3.c2.x == doctest::Approx(3.0 * m1.c2.x).epsilon(1e-12));
  }
}
