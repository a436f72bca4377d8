#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "hkflow/families.hpp"
#include "hkflow/flow.hpp"
#include "hkflow/mesh.hpp"

namespace hkflow {

using cplx = std::complex<double>;

/// Closed curve in C sampled at x_j = 2 pi j / N.
class PlaneCurve {
 public:
  /// Throws InvalidArgument for N < 16, DegenerateSpacing when consecutive
  /// samples coincide, OriginCollision when the curve passes through 0.
  explicit PlaneCurve(std::vector<cplx> samples);

  /// Samples gamma(2 pi j / N) for j = 0..N-1.
  static PlaneCurve sample(const std::function<cplx(double)>& gamma, int n);

  const std::vector<cplx>& samples() const noexcept { return z_; }
  int size() const noexcept { return static_cast<int>(z_.size()); }
  double param(int j) const;
  double diameter() const;
  double min_spacing() const;
  double min_modulus() const;

 private:
  std::vector<cplx> z_;
};

/// d^order/dx^order of periodic samples by Fourier multipliers. Odd
/// derivatives drop the Nyquist mode.
std::vector<cplx> spectral_derivative(std::span<const cplx> f, int order);

/// Trigonometric interpolant of a sampled closed curve; evaluates gamma and
/// its first three parameter derivatives anywhere on the circle.
class TrigInterpolant {
 public:
  explicit TrigInterpolant(std::span<const cplx> samples);
  /// Returns gamma^(k)(x) for k = 0..3.
  std::array<cplx, 4> eval(double x) const;

 private:
  std::vector<cplx> coeff_;  // c_k for k = 0..N-1, FFT order
  int n_;
};

/// Arclength curvature vector d^2 gamma / ds^2 at each sample. Throws
/// DegenerateSpacing when gamma' vanishes.
std::vector<cplx> curvature_vector(const PlaneCurve& curve);

/// kappa-vector - gamma_perp / |gamma|^2, the reduced mean curvature flow
/// velocity. gamma_perp is gamma minus its component along the unit tangent.
std::vector<cplx> csf_velocity(const PlaneCurve& curve);

enum class CurveScheme { RK4, SemiImplicit };

/// Spectral filter applied to the new samples after every step. Unfiltered
/// runs grow the sawtooth mode relative to the curve from round-off at N >= 96.
enum class CurveFilter {
  None,
  Exponential,  ///< exp(-36 (|k| / (N/2))^36)
  TwoThirds,    ///< zero every mode with |k| > N/3
};

struct CsfOptions {
  double stability_c = 0.2;      ///< explicit dt bound factor on (min spacing)^2
  double origin_guard = 1e-3;    ///< relative to diameter
  CurveFilter filter = CurveFilter::TwoThirds;
};

/// One step of the reduced flow. Throws StabilityViolation for explicit steps
/// above the bound and OriginCollision when the curve enters the guard band.
PlaneCurve csf_step(const PlaneCurve& curve, double dt, CurveScheme scheme, const CsfOptions& opt = {});

/// Largest explicit step admitted by csf_step.
double csf_stable_dt(const PlaneCurve& curve, const CsfOptions& opt = {});

/// Winding number of the closed polyline through `points` about p. Throws
/// PointOnCurve when p lies on the polyline.
int winding_number(std::span<const cplx> points, cplx p);
int winding_number(const PlaneCurve& curve, cplx p);

struct CurveDiagnostics {
  int ind_gamma = 0;         ///< winding of gamma about 0
  int ind_gammaprime = 0;    ///< winding of gamma' about 0
  double total_turning = 0;  ///< (1/2pi) integral of kappa = -Im(ln gamma')' over the parameter
  double maslov_defect = 0;  ///< ind_gamma - total_turning
  int ind_gamma_gammaprime = 0;  ///< winding of gamma gamma' about 0
};

/// Throws DegenerateDerivative when gamma' vanishes at a sample.
CurveDiagnostics diagnostics(const PlaneCurve& curve);

/// F(x, y) = (gamma(x) cos y, gamma(x) sin y) in C^2, identified with R^4 via
/// (z1, z2) -> (Re z1, Im z1, Re z2, Im z2). Jets use the trigonometric
/// interpolant of the curve, so they are exact for band-limited curves.
class CurveTorusFamily final : public SurfaceFamily {
 public:
  explicit CurveTorusFamily(const PlaneCurve& curve);
  explicit CurveTorusFamily(std::function<std::array<cplx, 3>(double)> analytic);

  SurfaceJet jet(double x, double y) const override;
  ParamDomain domain() const override;
  bool closed() const override { return true; }
  std::string name() const override { return "torus"; }

 private:
  std::function<std::array<cplx, 3>(double)> gamma_;
};

struct TorusEmbedding {
  SurfaceMesh mesh;
  std::shared_ptr<const CurveTorusFamily> jets;
};

/// Mesh on the (x_j, y_k) grid with Ny >= 8 points in y, plus analytic jets.
TorusEmbedding embed_torus(const PlaneCurve& curve, int ny);

/// max over samples of |B| of the embedded torus (independent of y).
double torus_max_B(const PlaneCurve& curve);
/// max over samples of |H| of the embedded torus, equal to |csf_velocity|.
double torus_max_H(const PlaneCurve& curve);
/// Phases of the embedded torus at every (x_j, y_k) with y_k = 2 pi k / ny,
/// using the frame e1 = F_x / |F_x|, e2 = F_y / |F_y|.
std::vector<Vec3> torus_phases(const PlaneCurve& curve, int ny, const HyperkahlerStructure& s);
/// Area of the embedded torus, 2 pi integral |gamma| |gamma'| dx.
double torus_area(const PlaneCurve& curve);

struct CurveRunOptions {
  double dt = 1e-4;          ///< maximum step
  double t_end = 0.2;
  bool adaptive = true;      ///< shrink dt to the stability bound as the curve shrinks
  CurveScheme scheme = CurveScheme::RK4;
  int snapshot_every = 0;    ///< 0 keeps only the initial and final curve
  int redistribute_every = 0;  ///< arclength redistribution period, 0 = never
  CsfOptions csf{};
  /// Stop early when sqrt(T-ish) resolution fails: max|B| * min spacing > this.
  double resolution_limit = 0.5;
};

struct CurveSnapshot {
  double t;
  PlaneCurve curve;
};

struct CurveRun {
  std::vector<CurveSnapshot> snapshots;
  FlowHistory history;  ///< (t, max|B| of torus, torus area) per step
  bool truncated = false;
};

/// Integrates the reduced flow and records the torus |B| history every step.
CurveRun run_curve_flow(const PlaneCurve& initial, const CurveRunOptions& opt,
                        const std::function<void(double, const PlaneCurve&)>& on_step = {});

/// Re-samples the curve at equal arclength using its trigonometric interpolant.
PlaneCurve redistribute_arclength(const PlaneCurve& curve);

/// FlowHistory of the embedded torus along a run.
FlowHistory b_norm_history(const CurveRun& run);

}  // namespace hkflow
