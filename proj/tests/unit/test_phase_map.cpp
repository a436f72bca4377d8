#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hkflow/errors.hpp"
#include "hkflow/families.hpp"
#include "hkflow/phase_map.hpp"
#include "test_util.hpp"

using namespace hkflow;
using std::numbers::pi;

namespace {

FrameData frames_from(const Vec4& e1, const Vec4& e2) {
  FrameData f;
  f.e1 = e1;
  f.e2 = e2;
  return f;
}

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

std::vector<std::pair<double, double>> random_points(const SurfaceFamily& f, int n) {
  std::vector<std::pair<double, double>> pts;
  const ParamDomain d = f.domain();
  for (int k = 0; k < n; ++k) {
    const double pu = d.periodic_u ? 0 : 0.05 * (d.u1 - d.u0), pv = d.periodic_v ? 0 : 0.05 * (d.v1 - d.v0);
    pts.emplace_back(test::uniform(d.u0 + pu, d.u1 - pu), test::uniform(d.v0 + pv, d.v1 - pv));
  }
  return pts;
}

}  // namespace

TEST_CASE("phase examples") {
  const auto s = standard_structure();
  SUBCASE("plane") { CHECK(phase(s, frames_from(test::unit(0), test::unit(1))).lambda() == Vec3(1, 0, 0)); }
  SUBCASE("cylinder: (0, -x2, x1) with lambda_a = <J_a e1, e2>") {
    // With e1 = (-x2, x1, 0, 0), e2 = d3 and the stated matrices the phase is
    // the negation of the triple (0, x2, -x1); the sign follows the convention.
    const CylinderFamily cyl(1.0);
    for (double x : {0.0, 1.0, 2.0, 3.5, 5.0}) {
      const SurfaceJet j = cyl.jet(x, 0.2);
      const Vec3 l = phase(s, frames(j, s)).lambda();
      CHECK((l - Vec3(0, -j.X[1], j.X[0])).norm() <= 1e-14);
    }
  }
  SUBCASE("grim reaper") {
    const GrimReaperFamily gr;
    for (double x : {-1.2, 0.0, 0.6}) {
      const Vec3 l = phase(s, frames(gr.jet(x, 0.0), s)).lambda();
      CHECK((l - Vec3(std::cos(x), 0, -std::sin(x))).norm() <= 1e-14);
    }
  }
}

TEST_CASE("unit phase, orientation flip and the tangent block") {
  const auto s = standard_structure();
  for (int k = 0; k < 100000; ++k) {
    const auto [e1, e2] = test::random_plane();
    Vec3 l;
    for (int a = 1; a <= 3; ++a) l[a - 1] = kahler_form(s, a, e1, e2);
    REQUIRE(std::abs(l.squaredNorm() - 1.0) <= 1e-12);
    if (k % 100 == 0) {
      Vec3 m;
      for (int a = 1; a <= 3; ++a) m[a - 1] = kahler_form(s, a, e1, Vec4(-e2));
      CHECK(m == -l);
      CHECK(tangent_block_defect(s, e1, e2) <= 1e-10);
    }
  }
}

TEST_CASE("phase differential examples") {
  const auto s = standard_structure();
  SUBCASE("plane") {
    const PlaneFamily plane;
    const PhaseDifferential d = phase_differential(plane, 0.1, 0.2, s);
    CHECK(d.sample.dJ.norm() == 0.0);
    CHECK(d.sample.e_del == 0.0);
    CHECK(d.sample.e_delbar == 0.0);
  }
  SUBCASE("grim reaper |dJ|^2 = cos^2 x, energies split equally") {
    const GrimReaperFamily gr;
    for (double x : {-1.0, -0.2, 0.5, 1.3}) {
      const PhaseDifferential d = phase_differential(gr, x, 0.1, s);
      const double c2 = std::cos(x) * std::cos(x);
      CHECK(std::abs(d.sample.dJ.squaredNorm() - c2) <= 1e-7);
      CHECK(std::abs(d.dJ_shape.squaredNorm() - c2) <= 1e-12);
      CHECK(std::abs(d.sample.e_del - 0.25 * c2) <= 1e-7);
      CHECK(std::abs(d.sample.e_delbar - 0.25 * c2) <= 1e-7);
    }
  }
  SUBCASE("unit cylinder |dJ|^2 = 1") {
    const CylinderFamily cyl(1.0);
    const PhaseDifferential d = phase_differential(cyl, 0.4, 0.0, s);
    CHECK(std::abs(d.sample.dJ.squaredNorm() - 1.0) <= 1e-7);
  }
  SUBCASE("stencil leaving the domain") {
    const PlaneFamily plane;
    CHECK(kind_of([&] { phase_differential(plane, 1.0, 0.0, s); }) == ErrorKind::StencilOutOfDomain);
  }
}

TEST_CASE("phase sample invariants on every builtin family") {
  const auto s = standard_structure();
  for (const auto& name : builtin_family_names()) {
    const SurfacePtr f = make_builtin_family(name, {{"a1", 0.7}, {"b2", -0.4}, {"c1", 0.3}});
    for (const auto& [u, v] : random_points(*f, 25)) {
      const PhaseDifferential d = phase_differential(*f, u, v, s);
      const PhaseSample& p = d.sample;
      CHECK((p.dJ * p.lambda).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(std::abs(p.e_del + p.e_delbar - 0.5 * p.dJ.squaredNorm()) <= 1e-10);
      CHECK(std::abs(p.detdJ - (p.e_del - p.e_delbar)) <= 1e-10);
      CHECK(p.e_del >= 0);
      CHECK(p.e_delbar >= 0);
      CHECK(d.route_gap <= d.tolerance);
      // Structure equation B(X, J~Y) = J~ B(X, Y) + sum X(lambda_a) J_a Y.
      CHECK(structure_equation_defect(s, d.geometry, p.dJ) <= 1e-6);
      const EnergyReport e = energy_split(p, d.geometry.H);
      CHECK(e.residual <= 1e-6);
      const GaussNormal gn = gauss_normal_curvatures(d.geometry.sff);
      CHECK(std::abs(p.detdJ - gn.kappa - gn.kappa_perp) <= 1e-6);
      CHECK(std::abs(p.detdJ - 0.5 * d.geometry.H.squaredNorm() + 0.5 * p.dJ.squaredNorm()) <= 1e-6);
    }
  }
}

TEST_CASE("structure equation detects a wrong differential") {
  const auto s = standard_structure();
  const QuadraticGraphFamily q({0.5, 0.2, -0.3, 0.1, -0.6, 0.4});
  const PhaseDifferential d = phase_differential(q, 0.2, 0.1, s);
  Mat23 wrong = d.sample.dJ;
  wrong(0, 1) += 1e-3;
  CHECK(structure_equation_defect(s, d.geometry, wrong) >= 5e-4);
}

TEST_CASE("det dJ = kappa + kappa_perp on 20 random quadratic graphs") {
  const auto s = standard_structure();
  for (int k = 0; k < 20; ++k) {
    std::array<double, 6> c;
    for (double& x : c) x = test::uniform(-1, 1);
    const QuadraticGraphFamily q(c);
    const double u = test::uniform(-0.8, 0.8), v = test::uniform(-0.8, 0.8);
    const PhaseDifferential d = phase_differential(q, u, v, s);
    const GaussNormal gn = gauss_normal_curvatures(d.geometry.sff);
    CHECK(std::abs(d.sample.detdJ - gn.kappa - gn.kappa_perp) <= 1e-6);
  }
}

TEST_CASE("Gauss and normal curvature examples") {
  const auto s = standard_structure();
  const PlaneFamily plane;
  const GaussNormal p = gauss_normal_curvatures(point_geometry(plane.jet(0, 0), s).sff);
  CHECK(p.kappa == 0.0);
  CHECK(p.kappa_perp == 0.0);
  const GrimReaperFamily gr;
  for (double x : {-0.9, 0.3}) {
    const GaussNormal g = gauss_normal_curvatures(point_geometry(gr.jet(x, 0.4), s).sff);
    CHECK(std::abs(g.kappa + g.kappa_perp) <= 1e-14);
    CHECK(std::abs(phase_differential(gr, x, 0.4, s).sample.detdJ) <= 1e-8);
  }
}

TEST_CASE("curvature form identities") {
  const auto s = standard_structure();
  SUBCASE("plane") {
    const PlaneFamily plane;
    const auto g = point_geometry(plane.jet(0.3, 0.3), s);
    CHECK(curvature_form(s, g.frames, g.H).rows.norm() == 0.0);
  }
  SUBCASE("grim reaper |Hform|^2 = 2 cos^2 x") {
    const GrimReaperFamily gr;
    for (double x : {-1.1, 0.2, 0.8}) {
      const auto g = point_geometry(gr.jet(x, 0.0), s);
      const CurvatureForm cf = curvature_form(s, g.frames, g.H);
      CHECK(std::abs(cf.rows.squaredNorm() - 2 * std::cos(x) * std::cos(x)) <= 1e-12);
    }
  }
  SUBCASE("sqrt 2 cylinder: rows from H = -X_perp / 2") {
    const CylinderFamily cyl(std::sqrt(2.0));
    const SurfaceJet j = cyl.jet(0.9, 0.3);
    const auto g = point_geometry(j, s);
    const Vec4 h = -0.5 * normal_projection(g.frames, j.X);
    CHECK((g.H - h).norm() <= 1e-12);
    const CurvatureForm cf = curvature_form(s, g.frames, g.H);
    for (int i = 0; i < 2; ++i)
      for (int a = 1; a <= 3; ++a) CHECK(std::abs(cf.rows(i, a - 1) - h.dot(s.J(a) * g.frames.e(i))) <= 1e-12);
  }
  SUBCASE("H o J~ = J_S2 o H and H = dJ o J~ + J_S2 o dJ") {
    for (const auto& name : builtin_family_names()) {
      const SurfacePtr f = make_builtin_family(name, {{"a2", 0.5}, {"b1", 0.8}});
      for (const auto& [u, v] : random_points(*f, 10)) {
        const PhaseDifferential d = phase_differential(*f, u, v, s);
        const CurvatureForm cf = curvature_form(s, d.geometry.frames, d.geometry.H);
        CHECK(curvature_form_complex_defect(cf, d.sample.lambda) <= 1e-10);
        CHECK(curvature_form_phase_defect(cf, d.sample.lambda, d.sample.dJ) <= 1e-6);
        CHECK((cf.rows * d.sample.lambda).cwiseAbs().maxCoeff() <= 1e-10);
      }
    }
  }
  SUBCASE("tangential input is rejected") {
    const PlaneFamily plane;
    const auto g = point_geometry(plane.jet(0, 0), s);
    CHECK(kind_of([&] { curvature_form(s, g.frames, g.frames.e1); }) == ErrorKind::NonNormalInput);
  }
}

TEST_CASE("energy split examples") {
  const auto s = standard_structure();
  const PlaneFamily plane;
  const PhaseDifferential d = phase_differential(plane, 0, 0, s);
  CHECK(energy_split(d.sample, d.geometry.H).residual == 0.0);
  // Unit-circle torus at t = 0, 100 random points.
  const SurfacePtr torus = make_builtin_family("torus-circle");
  for (const auto& [u, v] : random_points(*torus, 100)) {
    const PhaseDifferential t = phase_differential(*torus, u, v, s);
    CHECK(energy_split(t.sample, t.geometry.H).residual < 1e-6);
  }
  // A wrong mean curvature trips the identity check.
  CHECK(kind_of([&] { energy_split(d.sample, Vec4(0, 0, 1, 0)); }) == ErrorKind::IdentityViolation);
}

TEST_CASE("tension field") {
  const auto s = standard_structure();
  SUBCASE("plane") {
    const PlaneFamily plane;
    CHECK(tension(plane, 0.0, 0.0, s).norm() == 0.0);
  }
  SUBCASE("sqrt 2 cylinder: tau = dJ(X_T) / 2 = 0") {
    const CylinderFamily cyl(std::sqrt(2.0));
    for (double x : {0.3, 2.0}) {
      const double v = 0.25;
      const SurfaceJet j = cyl.jet(x, v);
      const PhaseDifferential d = phase_differential(cyl, x, v, s);
      const Vec4 xt = tangential_projection(d.geometry.frames, j.X);
      const Vec3 rhs = 0.5 * (xt.dot(d.geometry.frames.e1) * Vec3(d.sample.dJ.row(0)) +
                              xt.dot(d.geometry.frames.e2) * Vec3(d.sample.dJ.row(1)));
      CHECK(rhs.norm() <= 1e-8);
      CHECK((tension(cyl, x, v, s) - rhs).norm() <= 1e-8);
    }
  }
  SUBCASE("tangent to the sphere and equal to the Laplacian route") {
    for (const auto& name : {"torus-perturbed", "quadratic", "grim-reaper", "sphere"}) {
      const SurfacePtr f = make_builtin_family(name, {{"a1", 0.4}, {"c2", -0.5}, {"b1", 0.3}});
      for (const auto& [u, v] : random_points(*f, 5)) {
        const Vec3 t = tension(*f, u, v, s);
        const Vec3 l = phase(s, frames(f->jet(u, v), s)).lambda();
        CHECK(std::abs(t.dot(l)) <= 1e-7);
        CHECK((t - tension_laplacian(*f, u, v, s)).norm() <= 1e-5 * (1 + t.norm()));
      }
    }
  }
  SUBCASE("stencil leaving the domain") {
    const PlaneFamily plane;
    CHECK(kind_of([&] { tension(plane, -0.999, 0.0, s); }) == ErrorKind::StencilOutOfDomain);
  }
}

TEST_CASE("degree") {
  const auto s = standard_structure();
  SUBCASE("unit-circle torus has degree 0") {
    const DegreeReport d = degree(*make_builtin_family("torus-circle"), 64, 64, s);
    CHECK(std::abs(d.degree) <= 1e-10);
    CHECK(d.area == doctest::Approx(4 * pi * pi).epsilon(1e-12));
  }
  SUBCASE("round sphere: 2 deg = chi(T) + chi(N) with chi(N) = 0") {
    const DegreeReport d = degree(SphereFamily(1.0), 200, 200, s);
    CHECK(std::abs(d.degree - 1.0) <= 1e-3);
    CHECK(std::abs(d.euler_tangent - 2.0) <= 2e-3);
    CHECK(std::abs(d.euler_normal) <= 1e-10);
    CHECK(std::abs(2 * d.degree - d.euler_tangent - d.euler_normal) <= 1e-8);
    CHECK(d.distance_to_integer <= 1e-3);
    // The half-resolution value brackets the same integer.
    CHECK(std::abs(d.coarse_degree - 1.0) <= 1e-2);
  }
  SUBCASE("constant phase gives a zero determinant") {
    const PhaseSample p = make_phase_sample(Vec3(1, 0, 0), Mat23::Zero());
    CHECK(p.detdJ == 0.0);
  }
  SUBCASE("open surfaces are rejected") {
    CHECK(kind_of([&] { degree(PlaneFamily(), 8, 8, s); }) == ErrorKind::NonClosedSurface);
  }
}

TEST_CASE("chart examples and round trip") {
  const SphereChart a = chart(PhaseDirection(Vec3(1, 0, 0)));
  CHECK(a.r == doctest::Approx(1.0));
  CHECK(a.phi == doctest::Approx(pi / 2));
  const SphereChart b = chart(PhaseDirection(Vec3(0, -1, 0)));
  CHECK(b.r == doctest::Approx(1.0));
  CHECK(b.phi == doctest::Approx(pi));
  CHECK(kind_of([] { chart(PhaseDirection(Vec3(0, 1, 0))); }) == ErrorKind::OnForbiddenSet);
  CHECK(kind_of([] { chart(PhaseDirection(Vec3(0, 0.6, 0.8))); }) == ErrorKind::OnForbiddenSet);
  CHECK_NOTHROW(chart(PhaseDirection(Vec3(0, -0.6, 0.8))));
  for (int k = 0; k < 1000; ++k) {
    const Vec3 l = Vec3(test::uniform(-1, 1), test::uniform(-1, 1), test::uniform(-1, 1)).normalized();
    if (l[0] == 0 && l[1] >= 0) continue;
    const SphereChart c = chart(PhaseDirection(l));
    CHECK(c.r > 0);
    CHECK(c.r <= 1);
    CHECK(c.phi > 0);
    CHECK(c.phi < 2 * pi);
    CHECK(std::abs(c.r * std::sin(c.phi) - l[0]) <= 1e-12);
    CHECK(std::abs(c.r * std::cos(c.phi) - l[1]) <= 1e-12);
    CHECK((chart_inverse(c, l[2] >= 0) - l).norm() <= 1e-7);
  }
}

TEST_CASE("distance to the forbidden half circle matches brute force") {
  for (int k = 0; k < 300; ++k) {
    const Vec3 l = Vec3(test::uniform(-1, 1), test::uniform(-1, 1), test::uniform(-1, 1)).normalized();
    double best = pi;
    for (int i = 0; i <= 20000; ++i) {
      const double t = -pi / 2 + pi * i / 20000.0;  // (0, cos t, sin t), cos t >= 0
      best = std::min(best, std::acos(std::clamp(l[1] * std::cos(t) + l[2] * std::sin(t), -1.0, 1.0)));
    }
    CHECK(std::abs(distance_to_forbidden(l) - best) <= 1e-3);
  }
}

TEST_CASE("containment margin examples") {
  SUBCASE("cylinder circle meets the forbidden set") {
    std::vector<Vec3> circle;
    for (int k = 0; k < 64; ++k) circle.emplace_back(0, std::cos(2 * pi * k / 64), std::sin(2 * pi * k / 64));
    const ContainmentReport r = containment_margin(std::span<const Vec3>(circle));
    CHECK(r.margin == 0.0);
    CHECK(r.violation);
  }
  SUBCASE("constant (1, 0, 0)") {
    const std::vector<PhaseDirection> c(5, PhaseDirection(Vec3(1, 0, 0)));
    const ContainmentReport r = containment_margin(std::span<const PhaseDirection>(c));
    CHECK(r.margin == doctest::Approx(pi / 2).epsilon(1e-14));
    CHECK_FALSE(r.violation);
  }
  SUBCASE("grim reaper phases stay inside") {
    const auto s = standard_structure();
    const GrimReaperFamily gr(0.1);
    std::vector<Vec3> ph;
    for (const auto& [u, v] : midpoint_grid(gr, 50, 3)) ph.push_back(frames(gr.jet(u, v), s).lambda);
    const ContainmentReport r = containment_margin(std::span<const Vec3>(ph));
    CHECK(r.margin > 0);
    CHECK_FALSE(r.violation);
  }
}

TEST_CASE("triangle phases of a flat square are (1, 0, 0)") {
  const auto s = standard_structure();
  for (const Vec3& l : triangle_phases(flat_square(4), s)) CHECK((l - Vec3(1, 0, 0)).norm() <= 1e-14);
}
