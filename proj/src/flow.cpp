#include "hkflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/IterativeLinearSolvers>

#include "hkflow/errors.hpp"
#include "hkflow/numeric.hpp"
#include "hkflow/phase_map.hpp"

namespace hkflow {

FlowStats mesh_stats(const SurfaceMesh& mesh) {
  FlowStats s;
  const std::vector<double> b = mesh_second_fundamental_norm(mesh);
  s.max_B = b.empty() ? 0.0 : *std::max_element(b.begin(), b.end());
  const MeshCurvature mc = mesh_mean_curvature(mesh);
  for (std::size_t i = 0; i < mc.H.size(); ++i)
    if (mc.computed[i]) s.max_H = std::max(s.max_H, mc.H[i].norm());
  s.area = total_area(mesh);
  return s;
}

FlowState make_flow_state(SurfaceMesh mesh, double t) {
  FlowState st;
  st.t = t;
  st.mesh = std::move(mesh);
  st.stats = mesh_stats(st.mesh);
  return st;
}

FlowState mcf_step(const FlowState& state, double dt, Scheme scheme, const StepOptions& opt) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
  const SurfaceMesh& m = state.mesh;
  const std::size_t n = m.num_vertices();
  FlowState next;
  next.t = state.t + dt;
  next.mesh = m;

  if (scheme == Scheme::Explicit) {
    const double h = min_edge_length(m);
    if (dt > opt.stability_c * h * h)
      fail(ErrorKind::StabilityViolation, "explicit step exceeds c h_min^2 = " + std::to_string(opt.stability_c * h * h));
    const MeshCurvature mc = mesh_mean_curvature(m);
    parallel_for(n, default_threads(), [&](std::size_t i) {
      if (mc.computed[i]) next.mesh.vertices[i] += dt * mc.H[i];
    });
  } else {
    // (M - dt L) X_new = M X_old on interior rows; pinned columns move to the right side.
    const Eigen::SparseMatrix<double> L = cotangent_matrix(m);
    const std::vector<double> area = mixed_vertex_areas(m);
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(L.nonZeros() + n);
    Eigen::MatrixXd rhs(n, 4);
    for (std::size_t i = 0; i < n; ++i) {
      if (m.boundary[i]) {
        trip.emplace_back(i, i, 1.0);
        rhs.row(i) = m.vertices[i].transpose();
      } else {
        trip.emplace_back(i, i, area[i]);
        rhs.row(i) = area[i] * m.vertices[i].transpose();
      }
    }
    for (int k = 0; k < L.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it) {
        const auto i = static_cast<std::size_t>(it.row()), j = static_cast<std::size_t>(it.col());
        if (m.boundary[i]) continue;
        if (m.boundary[j]) {
          rhs.row(i) += dt * it.value() * m.vertices[j].transpose();
        } else {
          trip.emplace_back(i, j, -dt * it.value());
        }
      }
    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                             Eigen::DiagonalPreconditioner<double>>
        cg;
    cg.setTolerance(opt.cg_tolerance);
    cg.setMaxIterations(opt.cg_max_iterations);
    cg.compute(A);
    if (cg.info() != Eigen::Success) fail(ErrorKind::SolveFailure, "factorization of the implicit system failed");
    Eigen::MatrixXd X(n, 4);
    for (int c = 0; c < 4; ++c) {
      Eigen::VectorXd guess(n);
      for (std::size_t i = 0; i < n; ++i) guess[i] = m.vertices[i][c];
      X.col(c) = cg.solveWithGuess(rhs.col(c), guess);
      if (cg.info() != Eigen::Success) fail(ErrorKind::SolveFailure, "conjugate gradient did not converge");
    }
    for (std::size_t i = 0; i < n; ++i) next.mesh.vertices[i] = X.row(i).transpose();
  }
  if (opt.compute_stats) next.stats = mesh_stats(next.mesh);
  return next;
}

std::vector<SurfaceSample> sample_surface(const SurfaceFamily& family,
                                          std::span<const std::pair<double, double>> points,
                                          const HyperkahlerStructure& s) {
  std::vector<SurfaceSample> out(points.size());
  parallel_for(points.size(), default_threads(), [&](std::size_t k) {
    const SurfaceJet jet = family.jet(points[k].first, points[k].second);
    const PointGeometry g = point_geometry(jet, s);
    out[k] = {jet.X, g.frames, g.H};
  });
  return out;
}

double shrinker_residual(std::span<const SurfaceSample> samples) {
  double r = 0.0;
  for (const auto& p : samples) r = std::max(r, (p.H + 0.5 * normal_projection(p.frames, p.X)).norm());
  return r;
}

double translator_residual(std::span<const SurfaceSample> samples, const Vec4& v0) {
  if (std::abs(v0.norm() - 1.0) > 1e-12) fail(ErrorKind::InvalidArgument, "V0 must be a unit vector");
  double r = 0.0;
  for (const auto& p : samples) r = std::max(r, (p.H - normal_projection(p.frames, v0)).norm());
  return r;
}

void FlowHistory::push(double time, double b, double a) {
  if (!t.empty() && !(time > t.back())) fail(ErrorKind::InvalidArgument, "flow history times must increase");
  t.push_back(time);
  max_B.push_back(b);
  area.push_back(a);
}

Type1Report type1_monitor(const FlowHistory& history, double tail_fraction) {
  const std::size_t n = history.size();
  if (n < 5) fail(ErrorKind::InsufficientHistory, "type-I monitor needs at least 5 records");
  const std::size_t len =
      std::min(n, std::max<std::size_t>(5, static_cast<std::size_t>(std::ceil(tail_fraction * n))));
  Type1Report r;
  r.tail_begin = n - len;

  double st = 0, sy = 0;
  for (std::size_t i = r.tail_begin; i < n; ++i) {
    if (!(history.max_B[i] > 0.0)) fail(ErrorKind::NotBlowingUp, "max|B| vanishes");
    st += history.t[i];
    sy += 1.0 / (history.max_B[i] * history.max_B[i]);
  }
  const double m = static_cast<double>(len);
  const double tbar = st / m, ybar = sy / m;
  double stt = 0, sty = 0;
  for (std::size_t i = r.tail_begin; i < n; ++i) {
    const double dt = history.t[i] - tbar;
    stt += dt * dt;
    sty += dt * (1.0 / (history.max_B[i] * history.max_B[i]) - ybar);
  }
  const double slope = sty / stt;
  // The fitted drop of 1/max|B|^2 over the tail must be resolvable.
  if (!(-slope * std::sqrt(stt / m) > 1e-12 * std::abs(ybar)))
    fail(ErrorKind::NotBlowingUp, "1/max|B|^2 does not decrease");
  const double icpt = ybar - slope * tbar;
  r.T_est = -icpt / slope;

  // Delta method on T = -a / b with the OLS covariance of (a, b).
  double sse = 0.0;
  for (std::size_t i = r.tail_begin; i < n; ++i) {
    const double e = 1.0 / (history.max_B[i] * history.max_B[i]) - (icpt + slope * history.t[i]);
    sse += e * e;
  }
  const double s2 = len > 2 ? sse / (m - 2) : 0.0;
  const double var_b = s2 / stt;
  const double var_a = s2 * (1.0 / m + tbar * tbar / stt);
  const double cov_ab = -s2 * tbar / stt;
  const double var_T = (var_a + r.T_est * r.T_est * var_b + 2 * r.T_est * cov_ab) / (slope * slope);
  const double half = 1.96 * std::sqrt(std::max(0.0, var_T));
  r.T_low = r.T_est - half;
  r.T_high = r.T_est + half;

  for (std::size_t i = r.tail_begin; i < n; ++i)
    if (history.t[i] < r.T_est) r.sup_rescaled = std::max(r.sup_rescaled, std::sqrt(r.T_est - history.t[i]) * history.max_B[i]);
  return r;
}

FlowState parabolic_rescale(const FlowState& state, double eps, const Vec4& q, double t_k) {
  if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
  FlowState out;
  out.t = eps * eps * (state.t - t_k);
  out.mesh = state.mesh;
  for (Vec4& v : out.mesh.vertices) v = eps * (v - q);
  out.stats = mesh_stats(out.mesh);
  return out;
}

ParametricState parabolic_rescale(const ParametricState& state, double eps, const Vec4& q, double t_k) {
  if (!(eps > 0.0)) fail(ErrorKind::InvalidArgument, "eps must be positive");
  return {eps * eps * (state.t - t_k), std::make_shared<RescaledFamily>(state.surface, eps, q)};
}

double max_B(const SurfaceFamily& family, std::span<const std::pair<double, double>> points) {
  const HyperkahlerStructure s = standard_structure();
  std::vector<double> b(points.size());
  parallel_for(points.size(), default_threads(), [&](std::size_t k) {
    b[k] = point_geometry(family.jet(points[k].first, points[k].second), s).sff.norm2();
  });
  return b.empty() ? 0.0 : std::sqrt(*std::max_element(b.begin(), b.end()));
}

std::size_t first_argmax(std::span<const double> values) {
  if (values.empty()) fail(ErrorKind::InvalidArgument, "argmax of an empty range");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

PhaseEvolutionReport phase_evolution_check(std::span<const ParametricState> trajectory,
                                           std::span<const std::pair<double, double>> grid,
                                           const HyperkahlerStructure& s) {
  if (trajectory.size() < 3) fail(ErrorKind::InsufficientHistory, "phase evolution needs at least 3 time levels");
  const double dt = trajectory[1].t - trajectory[0].t;
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "trajectory times must increase");
  for (std::size_t k = 1; k < trajectory.size(); ++k)
    if (std::abs(trajectory[k].t - trajectory[k - 1].t - dt) > 1e-9 * dt)
      fail(ErrorKind::InvalidArgument, "trajectory is not uniformly spaced in time");

  PhaseEvolutionReport r;
  r.levels = trajectory.size() - 2;
  const std::size_t np = grid.size();
  r.residual.assign(r.levels * np, 0.0);
  std::vector<double> rate(r.levels * np, 0.0);
  for (std::size_t k = 1; k + 1 < trajectory.size(); ++k) {
    const SurfaceFamily& prev = *trajectory[k - 1].surface;
    const SurfaceFamily& cur = *trajectory[k].surface;
    const SurfaceFamily& next = *trajectory[k + 1].surface;
    parallel_for(np, default_threads(), [&](std::size_t p) {
      const auto [u, v] = grid[p];
      const Vec3 dl = (frames(next.jet(u, v), s).lambda - frames(prev.jet(u, v), s).lambda) / (2 * dt);
      const Vec3 tau = tension(cur, u, v, s);
      r.residual[(k - 1) * np + p] = (dl - tau).norm();
      rate[(k - 1) * np + p] = dl.norm();
    });
  }
  r.max_residual = r.residual.empty() ? 0.0 : *std::max_element(r.residual.begin(), r.residual.end());
  r.max_dt_phase = rate.empty() ? 0.0 : *std::max_element(rate.begin(), rate.end());
  return r;
}

MeshRun run_mesh_flow(const FlowState& initial, const MeshRunOptions& opt,
                      const std::function<void(const FlowState&)>& on_step) {
  if (!(opt.dt > 0.0) || !(opt.t_end > 0.0)) fail(ErrorKind::InvalidArgument, "dt and t_end must be positive");
  MeshRun run;
  FlowState cur = initial;
  run.history.push(cur.t, cur.stats.max_B, cur.stats.area);
  run.stats.push_back(cur.stats);
  if (on_step) on_step(cur);
  const double t_stop = initial.t + opt.t_end;
  StepOptions step = opt.step;
  step.compute_stats = true;
  while (cur.t < t_stop - 1e-12 * opt.t_end) {
    const double dt = std::min(opt.dt, t_stop - cur.t);
    cur = mcf_step(cur, dt, opt.scheme, step);
    run.history.push(cur.t, cur.stats.max_B, cur.stats.area);
    run.stats.push_back(cur.stats);
    if (on_step) on_step(cur);
    if (cur.stats.max_B * min_edge_length(cur.mesh) > opt.resolution_limit) {
      run.truncated = true;
      break;
    }
  }
  run.final_state = cur;
  return run;
}

}  // namespace hkflow
