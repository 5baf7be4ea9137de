#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>

#include "segrex/boundary.hpp"
#include "segrex/classify.hpp"
#include "segrex/errors.hpp"
#include "segrex/pde.hpp"
#include "support.hpp"

using namespace segrex;

namespace {

SystemState state_of(std::shared_ptr<const DiskMesh> mesh, Densities u) {
  SystemState s;
  s.mesh = std::move(mesh);
  s.u = std::move(u);
  s.converged = true;
  return s;
}

// c |x1 x2| split by quadrant, species i on the i-th quadrant.
SystemState quadrant_state(int rings, int sectors, double c = 1.0) {
  auto mesh = std::make_shared<DiskMesh>(build_mesh(rings, sectors));
  Densities u;
  for (auto& f : u) f = Field(mesh->vertex_count());
  for (std::size_t v = 0; v < mesh->vertex_count(); ++v) {
    const Vec2 x = mesh->vertices[v];
    if (x.x == 0.0 || x.y == 0.0) continue;
    u[static_cast<std::size_t>(test::quadrant_of(polar_angle(x)))][v] = c * std::abs(x.x * x.y);
  }
  return state_of(mesh, u);
}

// |Re z^{3/2}| (principal branch) split into its three nodal sectors
// (-pi/3, pi/3), (pi/3, pi), (-pi, -pi/3).
double triple_field(Vec2 x) {
  return std::abs(std::pow(std::complex<double>(x.x, x.y), 1.5).real());
}

int triple_sector(Vec2 x) {
  const double t = std::atan2(x.y, x.x);
  if (std::abs(t) < kPi / 3) return 0;
  return t > 0 ? 1 : 2;
}

SystemState triple_state(int rings, int sectors) {
  auto mesh = std::make_shared<DiskMesh>(build_mesh(rings, sectors));
  Densities u;
  for (auto& f : u) f = Field(mesh->vertex_count());
  for (std::size_t v = 0; v < mesh->vertex_count(); ++v) {
    const Vec2 x = mesh->vertices[v];
    u[static_cast<std::size_t>(triple_sector(x))][v] = triple_field(x);
  }
  return state_of(mesh, u);
}

SystemState solved(const BoundaryDatum& d, int rings = 30, int sectors = 128) {
  SolverConfig c;
  c.rings = rings;
  c.sectors = sectors;
  return solve_system(d, c);
}

bool near_axis(Vec2 p) { return std::abs(p.x) <= 1e-12 || std::abs(p.y) <= 1e-12; }

}  // namespace

TEST_SUITE("classify") {
  TEST_CASE("exact |x1 x2| splits into quadrants with axis interfaces") {
    const auto s = quadrant_state(40, 160);
    const auto part = nodal_regions(s);
    for (std::size_t v = 0; v < s.mesh->vertex_count(); ++v) {
      const Vec2 x = s.mesh->vertices[v];
      if (std::abs(x.x * x.y) > part.delta) REQUIRE(part.label[v] == test::quadrant_of(polar_angle(x)) + 1);
    }
    CHECK(part.overlap_vertices == 0);
    CHECK(part.warnings.empty());
    for (const auto& c : part.interfaces) {
      CHECK(std::abs(c.b - c.a) % 2 == 1);
      for (const auto& p : c.points) REQUIRE(near_axis(p));
    }
    CHECK(part.adjacency[0][1]);
    CHECK(part.adjacency[1][2]);
    CHECK(part.adjacency[2][3]);
    CHECK(part.adjacency[0][3]);
    CHECK_FALSE(part.adjacency[0][2]);
    CHECK_FALSE(part.adjacency[1][3]);
  }

  TEST_CASE("single species state has one region and no interfaces") {
    auto mesh = std::make_shared<DiskMesh>(build_mesh(10, 40));
    Densities u;
    for (auto& f : u) f = Field(mesh->vertex_count());
    u[0] = Field(mesh->vertex_count(), 2.0);
    const auto part = nodal_regions(state_of(mesh, u));
    CHECK(std::all_of(part.label.begin(), part.label.end(), [](int l) { return l == 1; }));
    CHECK(part.interfaces.empty());
    CHECK(part.junctions.empty());
    CHECK_THROWS_AS(nodal_regions(*mesh, u, 0.0), std::invalid_argument);
  }

  TEST_CASE("multiplicity of the exact 4-point configuration") {
    const auto s = quadrant_state(40, 160);
    CHECK(multiplicity(s, {0.4, 0.3}) == 1);
    CHECK(multiplicity(s, {0.5, 0.0}) == 2);
    CHECK(multiplicity(s, {0.0, 0.0}) == 4);
    const auto d = make_quadrant_datum({1, 1, 1, 1});
    const auto pts = multiple_points(s, d);
    REQUIRE(pts.size() == 1);
    CHECK(norm(pts[0].location) < 1e-9);
    CHECK(pts[0].multiplicity == 4);
    CHECK_FALSE(pts[0].on_boundary);
  }

  TEST_CASE("local fit of the exact field") {
    const PointSampler f = [](Vec2 x) { return std::abs(x.x * x.y); };
    const auto fit = local_expansion_fit(f, {0, 0}, 4, 0.2);
    CHECK(fit.amplitude == doctest::Approx(0.5).epsilon(1e-6));
    const double quarter = kPi / 2;
    const double t = std::fmod(fit.theta0 + kPi / 4 + 4 * quarter, quarter);
    CHECK(std::min(t, quarter - t) < 1e-6);
    CHECK(fit.residual < 1e-10);
    CHECK(fit.theta0 >= -kPi / 4);
    CHECK(fit.theta0 < kPi / 4);
  }

  TEST_CASE("local fit of a 3-point field") {
    const PointSampler f = [](Vec2 x) { return 2.0 * triple_field(x); };
    const auto fit = local_expansion_fit(f, {0, 0}, 3, 0.1);
    CHECK(fit.amplitude == doctest::Approx(2.0).epsilon(1e-6));
    CHECK(fit.residual < 1e-10);
  }

  TEST_CASE("degenerate local fits are rejected") {
    const PointSampler zero = [](Vec2) { return 0.0; };
    CHECK_THROWS_AS(local_expansion_fit(zero, {0, 0}, 4, 0.1), NumericalError);
    const PointSampler f = [](Vec2 x) { return std::abs(x.x * x.y); };
    CHECK_THROWS_AS(local_expansion_fit(f, {0.95, 0}, 4, 0.1), DomainError);
  }

  TEST_CASE("interface angles of the exact configurations") {
    const auto q = quadrant_state(60, 256);
    const auto qa = interface_angles(q, MultiplePoint{{0, 0}, 4, false});
    REQUIRE(qa.size() == 4);
    for (double a : qa) CHECK(std::abs(a - kPi / 2) <= 2.0 * kPi / 180);

    const auto t = triple_state(60, 256);
    const auto part = nodal_regions(t);
    const auto ta = interface_angles(part, {0, 0}, false, default_radius(*t.mesh));
    REQUIRE(ta.size() == 3);
    for (double a : ta) CHECK(std::abs(a - 2 * kPi / 3) <= 3.0 * kPi / 180);
    CHECK(multiplicity(t, {0, 0}) == 3);
  }

  TEST_CASE("fewer than three interfaces at a point is an error") {
    const auto q = quadrant_state(40, 160);
    CHECK_THROWS_AS(interface_angles(q, MultiplePoint{{0.5, 0.0}, 2, false}), NumericalError);
  }

  TEST_CASE("signs of Xi_a") {
    CHECK(xi_signs(0, 1) == Signs{-1, -1, 1, -1});
    CHECK(xi_signs(1, 0) == Signs{-1, -1, 1, -1});
    CHECK(xi_signs(1, 2) == Signs{-1, -1, -1, 1});
    CHECK(xi_signs(0, 3) == Signs{-1, 1, -1, -1});
    CHECK(xi_signs(0, 2) == Signs{1, 1, -1, -1});
    CHECK(xi_signs(1, 3) == Signs{-1, 1, 1, -1});
    CHECK_FALSE(xi_signs(2, 2).has_value());
    CHECK_FALSE(xi_signs(0, 4).has_value());
  }

  TEST_CASE("sup gap of an exact limit state") {
    const auto s = quadrant_state(40, 160, 15.0);
    const auto d = make_quadrant_datum({15, 15, 15, 15});
    CHECK(sup_gap(*s.mesh, s.total(), alternating_trace(d)) <= 1e-6);
  }

  TEST_CASE("classify an exact limit state") {
    const auto s = quadrant_state(60, 256, 15.0);
    const auto d = make_quadrant_datum({15, 15, 15, 15});
    const auto c = classify(s, d);
    CHECK(c.kind == ConfigurationKind::FourPoint);
    CHECK_FALSE(c.on_boundary);
    REQUIRE(c.points.size() == 1);
    CHECK(norm(c.points[0]) < 1e-9);
    REQUIRE(c.diagnostics.gap.has_value());
    CHECK(*c.diagnostics.gap <= 1e-6);
    CHECK(c.diagnostics.gap_reference == "psi_a");
    REQUIRE(c.diagnostics.moments.has_value());
    CHECK(std::abs(c.diagnostics.moments->c1) < 1e-8);
    REQUIRE(c.diagnostics.fit_residuals.size() == 1);
    CHECK(c.diagnostics.fit_residuals[0] < 1e-3);
  }

  TEST_CASE("states without multiple points do not classify") {
    auto mesh = std::make_shared<DiskMesh>(build_mesh(10, 40));
    Densities u;
    for (auto& f : u) f = Field(mesh->vertex_count());
    u[0] = Field(mesh->vertex_count(), 2.0);
    try {
      classify(state_of(mesh, u), make_quadrant_datum({1, 1, 1, 1}));
      FAIL("expected ClassificationError");
    } catch (const ClassificationError& e) {
      CHECK(e.found().empty());
    }
  }

  TEST_CASE("solved quadrant data classify as in the figures") {
    const auto s15 = solved(make_quadrant_datum({15, 15, 15, 15}));
    const auto c15 = classify(s15, make_quadrant_datum({15, 15, 15, 15}));
    CHECK(c15.kind == ConfigurationKind::FourPoint);
    CHECK(norm(c15.points[0]) < 0.02);

    const auto d7 = make_quadrant_datum({7, 15, 7, 15});
    const auto c7 = classify(solved(d7), d7);
    REQUIRE(c7.kind == ConfigurationKind::TwoTriplePoints);
    REQUIRE(c7.points.size() == 2);
    CHECK(distance(c7.points[0], -c7.points[1]) < 0.03);
    CHECK_FALSE(c7.on_boundary);
    CHECK(c7.diagnostics.fit_residuals.size() == 2);
    CHECK_FALSE(c7.diagnostics.gap.has_value());
    CHECK_FALSE(c7.diagnostics.notes.empty());
  }

  TEST_CASE("boundary 3-points of the remark datum carry the Xi_a gap") {
    const auto d = make_polynomial_datum({{7, 10, 4}, {}}).datum;
    const auto c = classify(solved(d, 40, 160), d);
    REQUIRE(c.kind == ConfigurationKind::TwoTriplePoints);
    CHECK(c.on_boundary);
    const Vec2 a{-0.75, std::sqrt(1 - 0.5625)};
    // Boundary points are the interpolated datum endpoints, good to O(h^2).
    const double h = kTwoPi / static_cast<double>(d.m());
    for (const auto& p : c.points) CHECK(std::min(distance(p, a), distance(p, Vec2{a.x, -a.y})) < 2 * h * h);
    CHECK(c.diagnostics.gap_reference == "xi_a");
    CHECK(c.diagnostics.gap.has_value());
    CHECK(c.diagnostics.xi_signs.has_value());
  }

  TEST_CASE("interfaces end on the circle or near a multiple point") {
    for (const auto& coeffs : {std::array<double, 4>{15, 15, 15, 15}, {7, 15, 7, 15}}) {
      const auto d = make_quadrant_datum(coeffs);
      const auto s = solved(d);
      const auto part = nodal_regions(s);
      const double rho = default_radius(*s.mesh);
      const auto pts = multiple_points(s, d);
      for (const auto& c : part.interfaces) {
        if (c.closed) continue;
        for (const Vec2 e : {c.points.front(), c.points.back()}) {
          const bool on_circle = std::abs(norm(e) - 1.0) < 1e-9;
          const bool near_point = std::any_of(pts.begin(), pts.end(), [&](const MultiplePoint& m) {
            return distance(m.location, e) <= 2 * rho;
          });
          CHECK((on_circle || near_point));
        }
      }
    }
  }

  TEST_CASE("the gap to |psi_a| shrinks as mu grows") {
    const auto d = make_quadrant_datum({15, 15, 15, 15});
    double prev = 1e300;
    double last = 0.0, max_u = 0.0;
    for (double mu : {100.0, 1000.0, 10000.0}) {
      SolverConfig c;
      c.mu = mu;
      c.rings = 30;
      c.sectors = 128;
      c.outer_sweeps = 400;
      c.scheme = SweepScheme::GaussSeidel;
      const auto s = solve_system(d, c);
      const auto cl = classify(s, d);
      REQUIRE(cl.kind == ConfigurationKind::FourPoint);
      REQUIRE(cl.diagnostics.gap.has_value());
      CHECK(*cl.diagnostics.gap < prev);
      prev = *cl.diagnostics.gap;
      last = prev;
      max_u = s.total().max();
    }
    CHECK(last <= 0.05 * max_u);
  }
}
