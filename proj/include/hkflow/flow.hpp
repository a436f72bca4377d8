#pragma once

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hkflow/families.hpp"
#include "hkflow/mesh.hpp"

namespace hkflow {

struct FlowStats {
  double max_B = 0.0;
  double max_H = 0.0;
  double area = 0.0;
};

/// Mesh state of a mean curvature flow at time t.
struct FlowState {
  double t = 0.0;
  SurfaceMesh mesh;
  FlowStats stats;
};

/// Analytic state: a parametric surface standing for Sigma_t.
struct ParametricState {
  double t = 0.0;
  SurfacePtr surface;
};

FlowStats mesh_stats(const SurfaceMesh& mesh);
FlowState make_flow_state(SurfaceMesh mesh, double t = 0.0);

enum class Scheme { Explicit, SemiImplicit };

struct StepOptions {
  double stability_c = 0.25;  ///< explicit: dt <= c h_min^2
  double cg_tolerance = 1e-10;
  int cg_max_iterations = 20000;
  bool compute_stats = true;
};

/// Advances dX/dt = H one step. Boundary vertices stay pinned.
/// Explicit: X += dt H. Semi-implicit: (M - dt L) X_new = M X_old with the
/// cotangent matrix L and mixed areas M frozen at the current geometry.
FlowState mcf_step(const FlowState& state, double dt, Scheme scheme, const StepOptions& opt = {});

/// Position, frames and mean curvature at one surface point.
struct SurfaceSample {
  Vec4 X;
  FrameData frames;
  Vec4 H;
};

std::vector<SurfaceSample> sample_surface(const SurfaceFamily& family,
                                          std::span<const std::pair<double, double>> points,
                                          const HyperkahlerStructure& s);

/// max |H + X_perp / 2|; zero on self-shrinkers.
double shrinker_residual(std::span<const SurfaceSample> samples);

/// max |H - V0_perp| for a surface translating with unit velocity V0.
/// Throws InvalidArgument unless |V0| = 1 to 1e-12.
double translator_residual(std::span<const SurfaceSample> samples, const Vec4& v0);

/// (t, max|B|, area) records with strictly increasing t.
struct FlowHistory {
  std::vector<double> t;
  std::vector<double> max_B;
  std::vector<double> area;

  /// Throws InvalidArgument when t does not increase.
  void push(double time, double b, double a);
  std::size_t size() const { return t.size(); }
};

struct Type1Report {
  double T_est = 0.0;
  double T_low = 0.0;   ///< ~95% interval from the regression slope/intercept covariance
  double T_high = 0.0;
  double sup_rescaled = 0.0;  ///< sup over the tail of sqrt(T_est - t) max|B|
  std::size_t tail_begin = 0;
};

/// Fits 1/max|B|^2 = a + b t on the last `tail_fraction` of the history.
/// Throws InsufficientHistory (< 5 points) or NotBlowingUp.
Type1Report type1_monitor(const FlowHistory& history, double tail_fraction = 0.4);

/// F_k = eps (F - q) at rescaled time eps^2 (t - t_k). Mesh stats are recomputed.
FlowState parabolic_rescale(const FlowState& state, double eps, const Vec4& q, double t_k);
ParametricState parabolic_rescale(const ParametricState& state, double eps, const Vec4& q, double t_k);

/// max over the grid of |B| on a parametric state.
double max_B(const SurfaceFamily& family, std::span<const std::pair<double, double>> points);

/// First vertex (in index order) attaining the maximum of `values`.
std::size_t first_argmax(std::span<const double> values);

struct PhaseEvolutionReport {
  std::vector<double> residual;  ///< per (interior level, grid point), level-major
  double max_residual = 0.0;
  double max_dt_phase = 0.0;     ///< max |d lambda / dt|, for scale
  std::size_t levels = 0;
};

/// Compares centered time differences of the phase with the tension field
/// at every interior level of a uniformly spaced trajectory. Throws
/// InsufficientHistory with fewer than 3 levels and InvalidArgument for
/// non-uniform spacing.
PhaseEvolutionReport phase_evolution_check(std::span<const ParametricState> trajectory,
                                           std::span<const std::pair<double, double>> grid,
                                           const HyperkahlerStructure& s);

struct MeshRunOptions {
  double dt = 1e-3;
  double t_end = 0.2;
  Scheme scheme = Scheme::SemiImplicit;
  StepOptions step{};
  double resolution_limit = 0.5;  ///< halt once max|B| h_min exceeds it
};

struct MeshRun {
  FlowHistory history;
  std::vector<FlowStats> stats;
  FlowState final_state;
  bool truncated = false;
};

MeshRun run_mesh_flow(const FlowState& initial, const MeshRunOptions& opt,
                      const std::function<void(const FlowState&)>& on_step = {});

}  // namespace hkflow
