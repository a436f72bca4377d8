#include <doctest.h>

#include <cmath>

#include "hkflow/errors.hpp"
#include "hkflow/flow.hpp"
#include "hkflow/phase_map.hpp"
#include "test_util.hpp"

using namespace hkflow;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

std::vector<SurfaceSample> samples_of(const SurfaceFamily& f, int n = 12) {
  return sample_surface(f, midpoint_grid(f, n, n, 0.05), standard_structure());
}

FlowHistory synthetic(double T, double c, int n, double t_end) {
  FlowHistory h;
  for (int k = 0; k < n; ++k) {
    const double t = t_end * k / (n - 1);
    h.push(t, c / std::sqrt(T - t), 1.0);
  }
  return h;
}

}  // namespace

TEST_CASE("semi-implicit icosphere flow follows r^2 = 1 - 4t") {
  FlowState st = make_flow_state(icosphere(3));
  MeshRunOptions opt;
  opt.dt = 5e-4;
  opt.t_end = 0.2;
  const MeshRun run = run_mesh_flow(st, opt);
  CHECK_FALSE(run.truncated);
  for (std::size_t k = 0; k < run.history.size(); ++k) {
    const double r2 = run.history.area[k] / (4 * M_PI);
    CHECK(std::abs(r2 - (1 - 4 * run.history.t[k])) <= 0.02 * (1 - 4 * run.history.t[k]));
  }
  SUBCASE("its |B| history is Type I with T near 0.25") {
    const Type1Report r = type1_monitor(run.history);
    CHECK(r.T_est == doctest::Approx(0.25).epsilon(0.02));
    CHECK(r.T_low <= r.T_est);
    CHECK(r.T_high >= r.T_est);
    CHECK(r.sup_rescaled < 1.0);
  }
}

TEST_CASE("flat square with pinned boundary does not move") {
  const FlowState st = make_flow_state(flat_square(6));
  for (Scheme scheme : {Scheme::Explicit, Scheme::SemiImplicit}) {
    const FlowState next = mcf_step(st, 1e-3, scheme);
    for (std::size_t i = 0; i < st.mesh.num_vertices(); ++i)
      CHECK((next.mesh.vertices[i] - st.mesh.vertices[i]).norm() <= 1e-12);
    CHECK(next.t == doctest::Approx(1e-3));
  }
}

TEST_CASE("explicit step is X + dt H and respects the stability bound") {
  const FlowState st = make_flow_state(icosphere(2));
  const double h = min_edge_length(st.mesh);
  const double dt = 0.2 * h * h;
  const FlowState next = mcf_step(st, dt, Scheme::Explicit);
  const MeshCurvature c = mesh_mean_curvature(st.mesh);
  for (std::size_t i = 0; i < st.mesh.num_vertices(); ++i)
    CHECK((next.mesh.vertices[i] - st.mesh.vertices[i] - dt * c.H[i]).norm() <= 1e-14);
  CHECK(kind_of([&] { mcf_step(st, 0.3 * h * h, Scheme::Explicit); }) == ErrorKind::StabilityViolation);
  CHECK(kind_of([&] { mcf_step(st, -1.0, Scheme::SemiImplicit); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("torus mesh area decreases every step") {
  const SurfaceMesh m = grid_mesh(*make_builtin_family("torus-circle"), 32, 16);
  MeshRunOptions opt;
  opt.dt = 1e-3;
  opt.t_end = 0.02;
  const MeshRun run = run_mesh_flow(make_flow_state(m), opt);
  REQUIRE(run.history.size() == 21);
  for (std::size_t k = 1; k < run.history.size(); ++k) CHECK(run.history.area[k] < run.history.area[k - 1]);
}

TEST_CASE("shrinker residual examples") {
  CHECK(shrinker_residual(samples_of(PlaneFamily())) == 0.0);
  CHECK(shrinker_residual(samples_of(CylinderFamily(std::sqrt(2.0)))) < 1e-10);
  CHECK(shrinker_residual(samples_of(SphereFamily(1.0))) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(shrinker_residual(samples_of(SphereFamily(2.0))) < 1e-12);
  // The residual changes sign across the predicted radius.
  auto radial = [](double r) {
    const auto s = samples_of(CylinderFamily(r), 3);
    const Vec4 xp = normal_projection(s[0].frames, s[0].X);
    return (s[0].H + 0.5 * xp).dot(xp.normalized());
  };
  CHECK(radial(1.3) * radial(1.5) < 0);
}

TEST_CASE("translator residual examples") {
  const auto grim = samples_of(GrimReaperFamily());
  CHECK(translator_residual(grim, Vec4(0, 0, 1, 0)) < 1e-8);
  // (0,0,0,1) is normal everywhere, so the residual is |H - e4| = sqrt(1 + cos^2 x).
  double expect = 0.0;
  for (const auto& s : grim) expect = std::max(expect, std::sqrt(1 + s.H.squaredNorm()));
  CHECK(translator_residual(grim, Vec4(0, 0, 0, 1)) == doctest::Approx(expect).epsilon(1e-12));
  CHECK(expect > 1.40);  // sqrt 2 at x = 0, which the midpoint grid just misses
  CHECK(translator_residual(samples_of(PlaneFamily()), Vec4(1, 0, 0, 0)) == 0.0);
  CHECK(kind_of([&] { translator_residual(grim, Vec4(0, 0, 2, 0)); }) == ErrorKind::InvalidArgument);
}

TEST_CASE("Type I monitor") {
  SUBCASE("synthetic |B| = 1/sqrt(2 (T - t))") {
    const Type1Report r = type1_monitor(synthetic(0.25, 1 / std::sqrt(2.0), 200, 0.24));
    CHECK(r.T_est == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(r.sup_rescaled == doctest::Approx(1 / std::sqrt(2.0)).epsilon(1e-10));
    CHECK(r.tail_begin == 120);
  }
  SUBCASE("constant |B| is not blowing up") {
    FlowHistory h;
    for (int k = 0; k < 20; ++k) h.push(0.01 * k, 3.0, 1.0);
    CHECK(kind_of([&] { type1_monitor(h); }) == ErrorKind::NotBlowingUp);
  }
  SUBCASE("too short") {
    CHECK(kind_of([&] { type1_monitor(synthetic(0.25, 1.0, 4, 0.1)); }) == ErrorKind::InsufficientHistory);
  }
  SUBCASE("times must increase") {
    FlowHistory h;
    h.push(0.0, 1.0, 1.0);
    CHECK(kind_of([&] { h.push(0.0, 1.0, 1.0); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("parabolic rescaling") {
  const auto s = standard_structure();
  SUBCASE("identity") {
    const FlowState st = make_flow_state(icosphere(2), 0.1);
    const FlowState r = parabolic_rescale(st, 1.0, Vec4::Zero(), 0.0);
    for (std::size_t i = 0; i < st.mesh.num_vertices(); ++i) CHECK(r.mesh.vertices[i] == st.mesh.vertices[i]);
    CHECK(r.t == doctest::Approx(0.1));
  }
  SUBCASE("sphere rescaled by its max |B| has max |B| = 1") {
    const auto sphere = std::make_shared<SphereFamily>(0.6);
    const auto grid = midpoint_grid(*sphere, 10, 10, 0.05);
    const double b = max_B(*sphere, grid);
    CHECK(b == doctest::Approx(std::sqrt(2.0) / 0.6));
    const ParametricState r = parabolic_rescale(ParametricState{0.1, sphere}, b, Vec4::Zero(), 0.1);
    CHECK(max_B(*r.surface, grid) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(r.t == 0.0);
  }
  SUBCASE("scaling law and phase invariance") {
    const SurfacePtr f = make_builtin_family("torus-perturbed");
    const auto grid = midpoint_grid(*f, 12, 12);
    const Vec4 q(0.3, -0.2, 0.1, 0.05);
    for (double eps : {0.25, 2.5, 7.0}) {
      const ParametricState r = parabolic_rescale(ParametricState{0.0, f}, eps, q, 0.0);
      CHECK(std::abs(max_B(*r.surface, grid) - max_B(*f, grid) / eps) <= 1e-10 * max_B(*f, grid) / eps);
      for (const auto& [u, v] : grid)
        CHECK((frames(r.surface->jet(u, v), s).lambda - frames(f->jet(u, v), s).lambda).norm() <= 1e-12);
    }
    const FlowState st = make_flow_state(icosphere(2));
    const FlowState r = parabolic_rescale(st, 3.0, q, 0.0);
    const auto a = triangle_phases(st.mesh, s), b = triangle_phases(r.mesh, s);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK((a[k] - b[k]).norm() <= 1e-12);
    CHECK(r.stats.area == doctest::Approx(9.0 * st.stats.area).epsilon(1e-12));
  }
}

TEST_CASE("first_argmax breaks ties by index") {
  const std::vector<double> v{1.0, 3.0, 2.0, 3.0};
  CHECK(first_argmax(v) == 1);
}

TEST_CASE("phase evolution check") {
  const auto s = standard_structure();
  SUBCASE("static plane") {
    const auto plane = std::make_shared<PlaneFamily>();
    const std::vector<ParametricState> traj{{0.0, plane}, {0.1, plane}, {0.2, plane}};
    const auto grid = midpoint_grid(*plane, 5, 5, 0.05);
    const PhaseEvolutionReport r = phase_evolution_check(traj, grid, s);
    CHECK(r.max_residual == 0.0);
    CHECK(r.levels == 1);
    CHECK(r.residual.size() == grid.size());
  }
  SUBCASE("shrinking sphere: both sides agree") {
    std::vector<ParametricState> traj;
    const double dt = 1e-3;
    for (int k = 0; k < 4; ++k)
      traj.push_back({k * dt, std::make_shared<SphereFamily>(std::sqrt(1 - 4 * k * dt))});
    const auto grid = midpoint_grid(*traj[0].surface, 8, 8, 0.1);
    const PhaseEvolutionReport r = phase_evolution_check(traj, grid, s);
    CHECK(r.levels == 2);
    CHECK(r.max_residual <= 1e-6);
  }
  SUBCASE("errors") {
    const auto plane = std::make_shared<PlaneFamily>();
    const auto grid = midpoint_grid(*plane, 3, 3, 0.05);
    const std::vector<ParametricState> two{{0.0, plane}, {0.1, plane}};
    CHECK(kind_of([&] { phase_evolution_check(two, grid, s); }) == ErrorKind::InsufficientHistory);
    const std::vector<ParametricState> uneven{{0.0, plane}, {0.1, plane}, {0.3, plane}};
    CHECK(kind_of([&] { phase_evolution_check(uneven, grid, s); }) == ErrorKind::InvalidArgument);
  }
}

TEST_CASE("mesh stats") {
  const FlowStats st = mesh_stats(icosphere(3, 2.0));
  CHECK(st.area == doctest::Approx(16 * M_PI).epsilon(5e-3));
  CHECK(st.max_H == doctest::Approx(1.0).epsilon(2e-2));
  CHECK(st.max_B == doctest::Approx(std::sqrt(2.0) / 2).epsilon(3e-2));
}
