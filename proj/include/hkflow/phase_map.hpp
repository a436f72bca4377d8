#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hkflow/families.hpp"
#include "hkflow/mesh.hpp"

namespace hkflow {

using Mat23 = Eigen::Matrix<double, 2, 3>;

/// Phase, its differential and the energy split at one point.
/// Row i of dJ is dJ(e_i), tangent to S^2 at lambda.
struct PhaseSample {
  Vec3 lambda;
  Mat23 dJ;
  double e_del = 0.0;     ///< |dJ^{1,0}|^2
  double e_delbar = 0.0;  ///< |dJ^{0,1}|^2
  double detdJ = 0.0;     ///< <lambda, dJ(e1) x dJ(e2)>
};

/// Projects the rows of dJ onto T_lambda S^2, then splits dJ into the parts
/// commuting and anticommuting with (J~, J_S2), D+- = (dJ -+ J_S2 dJ J~) / 2, and sets e_del = |D+|^2 / 2, e_delbar = |D-|^2 / 2.
PhaseSample make_phase_sample(const Vec3& lambda, const Mat23& dJ);

/// Row i = (<H, J_1 e_i>, <H, J_2 e_i>, <H, J_3 e_i>).
struct CurvatureForm {
  Mat23 rows;
};

struct SphereChart {
  double r = 0.0;
  double phi = 0.0;
};

/// lambda_a = omega_a(e1, e2).
PhaseDirection phase(const HyperkahlerStructure& s, const FrameData& f);

/// Rows e_i(lambda_a) = <B(e_i, e2), J_a e1> - <B(e_i, e1), J_a e2>, i.e. the
/// shape-operator form grad lambda_a = sum_j A^{(J_a e_j)perp}(J~ e_j).
Mat23 phase_differential_shape(const HyperkahlerStructure& s, const PointGeometry& g);

/// Centered differences of lambda over (u, v) with step h, mapped to (e1, e2).
/// Throws StencilOutOfDomain.
Mat23 phase_differential_fd(const SurfaceFamily& family, double u, double v, const HyperkahlerStructure& s,
                            double h);

struct PhaseDifferential {
  PhaseSample sample;      ///< built from the finite-difference route
  Mat23 dJ_shape;          ///< second-fundamental-form route
  double route_gap = 0.0;  ///< max |dJ_fd - dJ_shape|
  double tolerance = 0.0;  ///< max(1e-6, 10 h^2)
  PointGeometry geometry;
};

/// Both routes; throws IdentityViolation when they disagree beyond tolerance.
/// h = step * parameter_scale.
PhaseDifferential phase_differential(const SurfaceFamily& family, double u, double v,
                                     const HyperkahlerStructure& s, double step = 1e-4);

/// Throws NonNormalInput when |<H, e_i>| > 1e-8 max(1, |H|).
CurvatureForm curvature_form(const HyperkahlerStructure& s, const FrameData& f, const Vec4& H);

/// max |H(J~ e_i) - J_S2 H(e_i)|.
double curvature_form_complex_defect(const CurvatureForm& cf, const Vec3& lambda);
/// max |H - (dJ o J~ + J_S2 o dJ)|.
double curvature_form_phase_defect(const CurvatureForm& cf, const Vec3& lambda, const Mat23& dJ);

/// (dJ o J~) with rows dJ(e2), -dJ(e1).
Mat23 compose_tangent_complex(const Mat23& dJ);
/// J_S2 o dJ.
Mat23 compose_sphere_complex(const Vec3& lambda, const Mat23& dJ);

/// max over i, j of |B(e_i, J~ e_j) - J~ B(e_i, e_j) - sum_a dJ(e_i)_a J_a e_j|
/// with J~ = sum_a lambda_a J_a. Vanishes for the true differential.
double structure_equation_defect(const HyperkahlerStructure& s, const PointGeometry& g, const Mat23& dJ);

/// max over a of the distance between the matrix <J_a e_l, e_k> on span(e1, e2)
/// and lambda_a times the quarter turn.
double tangent_block_defect(const HyperkahlerStructure& s, const Vec4& e1, const Vec4& e2);

struct EnergyReport {
  double e_del = 0.0;
  double e_delbar = 0.0;
  double quarter_H2 = 0.0;
  double residual = 0.0;  ///< |e_del - |H|^2 / 4|
};

/// Checks |dJ^{1,0}|^2 = |H|^2 / 4; throws IdentityViolation above tol.
EnergyReport energy_split(const PhaseSample& sample, const Vec4& H, double tol = 1e-6);

struct GaussNormal {
  double kappa = 0.0;       ///< sum_a det h^a
  double kappa_perp = 0.0;  ///< (h^1 h^2 - h^2 h^1)_{12}
};

/// Gauss and Ricci equations in flat R^4 with the frame (e1, e2, nu1, nu2).
/// The commutator sign makes det dJ = kappa + kappa_perp.
GaussNormal gauss_normal_curvatures(const SecondFundamentalForm& sff);

/// tau(J) = J_S2 (Div(J_1 H)^T, Div(J_2 H)^T, Div(J_3 H)^T) with
/// Div(J_a H)^T = sum_j <J_a nabla-perp_{e_j} H, e_j>; nabla-perp H from a
/// sixth-order centered stencil of the H field. Throws StencilOutOfDomain.
Vec3 tension(const SurfaceFamily& family, double u, double v, const HyperkahlerStructure& s, double step = 1e-3);

/// Independent route: tau = Delta_g lambda + |dJ|^2 lambda with the
/// Laplace-Beltrami operator of the induced metric by finite differences.
Vec3 tension_laplacian(const SurfaceFamily& family, double u, double v, const HyperkahlerStructure& s,
                       double step = 1e-3);

struct DegreeReport {
  double degree = 0.0;               ///< (1/4pi) integral det dJ
  double distance_to_integer = 0.0;
  double coarse_degree = 0.0;        ///< same rule on the half-resolution grid
  double euler_tangent = 0.0;        ///< (1/2pi) integral kappa
  double euler_normal = 0.0;         ///< (1/2pi) integral kappa_perp
  double area = 0.0;
};

/// Midpoint quadrature on an nu x nv grid. Throws NonClosedSurface.
DegreeReport degree(const SurfaceFamily& family, int nu, int nv, const HyperkahlerStructure& s);

/// (lambda1, lambda2) = (r sin phi, r cos phi), r in (0, 1], phi in (0, 2 pi).
/// Throws OnForbiddenSet for lambda1 = 0, lambda2 >= 0.
SphereChart chart(const PhaseDirection& lambda);
/// Inverse of chart on the hemisphere sign(lambda3) = upper ? + : -.
Vec3 chart_inverse(const SphereChart& c, bool upper);

/// Geodesic distance from lambda to the closed half circle {lambda1 = 0, lambda2 >= 0}.
double distance_to_forbidden(const Vec3& lambda);

struct ContainmentReport {
  double margin = 0.0;  ///< min distance, exactly 0 on violation
  bool violation = false;
  std::size_t worst_index = 0;
};

ContainmentReport containment_margin(std::span<const PhaseDirection> phases);
ContainmentReport containment_margin(std::span<const Vec3> phases);

/// Phase of each triangle's oriented tangent plane (first edge, then Gram-Schmidt).
std::vector<Vec3> triangle_phases(const SurfaceMesh& mesh, const HyperkahlerStructure& s);

}  // namespace hkflow
