#include "hkflow/phase_map.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "hkflow/errors.hpp"
#include "hkflow/numeric.hpp"

namespace hkflow {

namespace {

void require_stencil(const SurfaceFamily& f, double u, double v, double reach) {
  const ParamDomain d = f.domain();
  const bool ok_u = d.periodic_u || (u - reach >= d.u0 && u + reach <= d.u1);
  const bool ok_v = d.periodic_v || (v - reach >= d.v0 && v + reach <= d.v1);
  if (!ok_u || !ok_v) fail(ErrorKind::StencilOutOfDomain, "finite-difference stencil leaves the parameter domain");
}

Vec3 phase_at(const SurfaceFamily& f, double u, double v, const HyperkahlerStructure& s) {
  return frames(f.jet(u, v), s).lambda;
}

Vec4 mean_curvature_at(const SurfaceFamily& f, double u, double v, const HyperkahlerStructure& s) {
  return point_geometry(f.jet(u, v), s).H;
}

// Sixth-order centered first derivative of a vector-valued function.
template <typename V, typename F>
V d1_6th(const F& fn, double h) {
  return (-fn(-3) + 9.0 * fn(-2) - 45.0 * fn(-1) + 45.0 * fn(1) - 9.0 * fn(2) + fn(3)) / (60.0 * h);
}

Mat23 rows_to_frame(const Mat2& to_param, const Vec3& du, const Vec3& dv) {
  Eigen::Matrix<double, 2, 3> d;
  d.row(0) = du.transpose();
  d.row(1) = dv.transpose();
  return to_param * d;
}

}  // namespace

PhaseSample make_phase_sample(const Vec3& lambda, const Mat23& dJ) {
  PhaseSample p;
  p.lambda = lambda;
  // Difference quotients of a unit vector leave O(h^2) radial parts; drop them.
  p.dJ = dJ - (dJ * lambda) * lambda.transpose();
  const Mat23 dplus = 0.5 * (p.dJ - compose_sphere_complex(lambda, compose_tangent_complex(p.dJ)));
  const Mat23 dminus = p.dJ - dplus;
  p.e_del = 0.5 * dplus.squaredNorm();
  p.e_delbar = 0.5 * dminus.squaredNorm();
  p.detdJ = lambda.dot(Vec3(p.dJ.row(0)).cross(Vec3(p.dJ.row(1))));
  return p;
}

PhaseDirection phase(const HyperkahlerStructure& s, const FrameData& f) {
  Vec3 l;
  for (int a = 1; a <= 3; ++a) l[a - 1] = kahler_form(s, a, f.e1, f.e2);
  return PhaseDirection(l);
}

Mat23 phase_differential_shape(const HyperkahlerStructure& s, const PointGeometry& g) {
  const FrameData& f = g.frames;
  Mat23 d;
  for (int i = 0; i < 2; ++i) {
    const Vec4 bi1 = g.sff.B(f, i, 0);
    const Vec4 bi2 = g.sff.B(f, i, 1);
    for (int a = 1; a <= 3; ++a) d(i, a - 1) = bi2.dot(s.J(a) * f.e1) - bi1.dot(s.J(a) * f.e2);
  }
  return d;
}

Mat23 phase_differential_fd(const SurfaceFamily& family, double u, double v, const HyperkahlerStructure& s,
                            double h) {
  require_stencil(family, u, v, h);
  const FrameData f = frames(family.jet(u, v), s);
  const Vec3 du = (phase_at(family, u + h, v, s) - phase_at(family, u - h, v, s)) / (2 * h);
  const Vec3 dv = (phase_at(family, u, v + h, s) - phase_at(family, u, v - h, s)) / (2 * h);
  return rows_to_frame(f.to_param, du, dv);
}

PhaseDifferential phase_differential(const SurfaceFamily& family, double u, double v,
                                     const HyperkahlerStructure& s, double step) {
  const double h = step * family.parameter_scale();
  PhaseDifferential out;
  out.geometry = point_geometry(family.jet(u, v), s);
  const Mat23 fd = phase_differential_fd(family, u, v, s, h);
  out.dJ_shape = phase_differential_shape(s, out.geometry);
  out.sample = make_phase_sample(out.geometry.frames.lambda, fd);
  out.route_gap = (fd - out.dJ_shape).cwiseAbs().maxCoeff();
  out.tolerance = std::max(1e-6, 10 * h * h);
  if (!(out.route_gap <= out.tolerance))
    fail(ErrorKind::IdentityViolation, "phase differential routes disagree by " + std::to_string(out.route_gap));
  return out;
}

Mat23 compose_tangent_complex(const Mat23& dJ) {
  Mat23 m;
  m.row(0) = dJ.row(1);
  m.row(1) = -dJ.row(0);
  return m;
}

Mat23 compose_sphere_complex(const Vec3& lambda, const Mat23& dJ) {
  Mat23 m;
  for (int i = 0; i < 2; ++i) m.row(i) = lambda.cross(Vec3(dJ.row(i))).transpose();
  return m;
}

CurvatureForm curvature_form(const HyperkahlerStructure& s, const FrameData& f, const Vec4& H) {
  const double tol = 1e-8 * std::max(1.0, H.norm());
  if (std::abs(H.dot(f.e1)) > tol || std::abs(H.dot(f.e2)) > tol)
    fail(ErrorKind::NonNormalInput, "mean curvature has a tangential component");
  CurvatureForm cf;
  for (int i = 0; i < 2; ++i)
    for (int a = 1; a <= 3; ++a) cf.rows(i, a - 1) = H.dot(s.J(a) * f.e(i));
  return cf;
}

double curvature_form_complex_defect(const CurvatureForm& cf, const Vec3& lambda) {
  const Vec3 r0 = cf.rows.row(0), r1 = cf.rows.row(1);
  return std::max((r1 - lambda.cross(r0)).cwiseAbs().maxCoeff(), (-r0 - lambda.cross(r1)).cwiseAbs().maxCoeff());
}

double curvature_form_phase_defect(const CurvatureForm& cf, const Vec3& lambda, const Mat23& dJ) {
  return (cf.rows - compose_tangent_complex(dJ) - compose_sphere_complex(lambda, dJ)).cwiseAbs().maxCoeff();
}

double structure_equation_defect(const HyperkahlerStructure& s, const PointGeometry& g, const Mat23& dJ) {
  const FrameData& f = g.frames;
  const Mat4 jt = s.combine(f.lambda);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const Vec4 jej = jt * f.e(j);
      // B is bilinear, so B(e_i, J~ e_j) expands over the tangent components of J~ e_j.
      const Vec4 lhs = jej.dot(f.e1) * g.sff.B(f, i, 0) + jej.dot(f.e2) * g.sff.B(f, i, 1);
      Vec4 rhs = jt * g.sff.B(f, i, j);
      for (int a = 1; a <= 3; ++a) rhs += dJ(i, a - 1) * (s.J(a) * f.e(j));
      worst = std::max(worst, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  return worst;
}

double tangent_block_defect(const HyperkahlerStructure& s, const Vec4& e1, const Vec4& e2) {
  double worst = 0.0;
  for (int a = 1; a <= 3; ++a) {
    const double l = kahler_form(s, a, e1, e2);
    Mat2 block, expect;
    const Vec4 j1 = s.J(a) * e1, j2 = s.J(a) * e2;
    block << j1.dot(e1), j2.dot(e1), j1.dot(e2), j2.dot(e2);
    expect << 0, -l, l, 0;
    worst = std::max(worst, (block - expect).cwiseAbs().maxCoeff());
  }
  return worst;
}

EnergyReport energy_split(const PhaseSample& sample, const Vec4& H, double tol) {
  EnergyReport r;
  r.e_del = sample.e_del;
  r.e_delbar = sample.e_delbar;
  r.quarter_H2 = 0.25 * H.squaredNorm();
  r.residual = std::abs(r.e_del - r.quarter_H2);
  if (!(r.residual <= tol))
    fail(ErrorKind::IdentityViolation, "|del J|^2 - |H|^2/4 = " + std::to_string(r.residual));
  return r;
}

GaussNormal gauss_normal_curvatures(const SecondFundamentalForm& sff) {
  GaussNormal g;
  for (const Mat2& h : sff.h) g.kappa += h(0, 0) * h(1, 1) - h(0, 1) * h(0, 1);
  const Mat2 comm = sff.h[0] * sff.h[1] - sff.h[1] * sff.h[0];
  g.kappa_perp = comm(0, 1);
  return g;
}

Vec3 tension(const SurfaceFamily& family, double u, double v, const HyperkahlerStructure& s, double step) {
  const double h = step * family.parameter_scale();
  require_stencil(family, u, v, 3 * h);
  const FrameData f = frames(family.jet(u, v), s);
  const Vec4 Hu = d1_6th<Vec4>([&](int k) { return mean_curvature_at(family, u + k * h, v, s); }, h);
  const Vec4 Hv = d1_6th<Vec4>([&](int k) { return mean_curvature_at(family, u, v + k * h, s); }, h);
  Vec3 div = Vec3::Zero();
  for (int j = 0; j < 2; ++j) {
    const Vec4 dH = normal_projection(f, f.to_param(j, 0) * Hu + f.to_param(j, 1) * Hv);
    for (int a = 1; a <= 3; ++a) div[a - 1] += (s.J(a) * dH).dot(f.e(j));
  }
  return f.lambda.cross(div);
}

Vec3 tension_laplacian(const SurfaceFamily& family, double u, double v, const HyperkahlerStructure& s,
                       double step) {
  const double h = step * family.parameter_scale();
  require_stencil(family, u, v, 2 * h);
  const SurfaceJet jet = family.jet(u, v);
  const FrameData f = frames(jet, s);
  auto lam = [&](int i, int j) { return phase_at(family, u + i * h, v + j * h, s); };
  const double w1[5] = {1.0 / 12, -8.0 / 12, 0.0, 8.0 / 12, -1.0 / 12};
  const double w2[5] = {-1.0 / 12, 16.0 / 12, -30.0 / 12, 16.0 / 12, -1.0 / 12};
  Vec3 lu = Vec3::Zero(), lv = Vec3::Zero(), luu = Vec3::Zero(), lvv = Vec3::Zero(), luv = Vec3::Zero();
  for (int k = -2; k <= 2; ++k) {
    if (k != 0) {
      lu += w1[k + 2] * lam(k, 0);
      lv += w1[k + 2] * lam(0, k);
    }
    luu += w2[k + 2] * lam(k, 0);
    lvv += w2[k + 2] * lam(0, k);
  }
  for (int a = -2; a <= 2; ++a)
    for (int b = -2; b <= 2; ++b)
      if (a != 0 && b != 0) luv += w1[a + 2] * w1[b + 2] * lam(a, b);
  lu /= h;
  lv /= h;
  luu /= h * h;
  lvv /= h * h;
  luv /= h * h;

  const Mat2 gi = f.g.inverse();
  const Vec4* tang[2] = {&jet.Xu, &jet.Xv};
  const Vec4* sec[2][2] = {{&jet.Xuu, &jet.Xuv}, {&jet.Xuv, &jet.Xvv}};
  const Vec3* d1[2] = {&lu, &lv};
  const Vec3* d2[2][2] = {{&luu, &luv}, {&luv, &lvv}};
  Vec3 lap = Vec3::Zero();
  double energy = 0.0;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) {
      // Gamma^c_ab = g^{cd} <X_ab, X_d>
      Vec3 corr = Vec3::Zero();
      for (int c = 0; c < 2; ++c) {
        double gamma = 0.0;
        for (int d = 0; d < 2; ++d) gamma += gi(c, d) * sec[a][b]->dot(*tang[d]);
        corr += gamma * *d1[c];
      }
      lap += gi(a, b) * (*d2[a][b] - corr);
      energy += gi(a, b) * d1[a]->dot(*d1[b]);
    }
  return lap + energy * f.lambda;
}

DegreeReport degree(const SurfaceFamily& family, int nu, int nv, const HyperkahlerStructure& s) {
  if (!family.closed()) fail(ErrorKind::NonClosedSurface, family.name() + " is not closed");
  if (nu < 2 || nv < 2) fail(ErrorKind::InvalidArgument, "degree grid too small");
  const ParamDomain d = family.domain();

  struct Sums {
    double det, kappa, kperp, area;
  };
  auto integrate = [&](int mu, int mv) {
    const double du = (d.u1 - d.u0) / mu, dv = (d.v1 - d.v0) / mv;
    const std::size_t n = static_cast<std::size_t>(mu) * mv;
    std::vector<double> det(n), kap(n), kp(n), area(n);
    // Stencil must fit between the midpoint and the domain edge.
    const double step = std::min(1e-4, 0.25 * std::min(du, dv) / family.parameter_scale());
    parallel_for(n, default_threads(), [&](std::size_t idx) {
      const int i = static_cast<int>(idx / mv), j = static_cast<int>(idx % mv);
      const double u = d.u0 + (i + 0.5) * du, v = d.v0 + (j + 0.5) * dv;
      const SurfaceJet jet = family.jet(u, v);
      const PointGeometry g = point_geometry(jet, s);
      const Mat23 dJ = phase_differential_fd(family, u, v, s, step * family.parameter_scale());
      const double w = std::sqrt(g.frames.g.determinant()) * du * dv;
      const GaussNormal gn = gauss_normal_curvatures(g.sff);
      det[idx] = make_phase_sample(g.frames.lambda, dJ).detdJ * w;
      kap[idx] = gn.kappa * w;
      kp[idx] = gn.kappa_perp * w;
      area[idx] = w;
    });
    return Sums{pairwise_sum(det), pairwise_sum(kap), pairwise_sum(kp), pairwise_sum(area)};
  };

  const double pi = std::numbers::pi;
  const Sums fine = integrate(nu, nv);
  const Sums coarse = integrate(std::max(1, nu / 2), std::max(1, nv / 2));
  DegreeReport r;
  r.degree = fine.det / (4 * pi);
  r.coarse_degree = coarse.det / (4 * pi);
  r.distance_to_integer = std::abs(r.degree - std::round(r.degree));
  r.euler_tangent = fine.kappa / (2 * pi);
  r.euler_normal = fine.kperp / (2 * pi);
  r.area = fine.area;
  return r;
}

SphereChart chart(const PhaseDirection& lambda) {
  const double l1 = lambda[0], l2 = lambda[1];
  if (l1 == 0.0 && l2 >= 0.0) fail(ErrorKind::OnForbiddenSet, "phase lies on the closed half circle lambda1 = 0, lambda2 >= 0");
  SphereChart c;
  c.r = std::min(1.0, std::hypot(l1, l2));
  double phi = std::atan2(l1, l2);
  if (phi <= 0.0) phi += 2 * std::numbers::pi;
  c.phi = phi;
  return c;
}

Vec3 chart_inverse(const SphereChart& c, bool upper) {
  const double z = std::sqrt(std::max(0.0, 1.0 - c.r * c.r));
  return {c.r * std::sin(c.phi), c.r * std::cos(c.phi), upper ? z : -z};
}

double distance_to_forbidden(const Vec3& lambda) {
  const Vec3 l = lambda.normalized();
  Vec3 closest;
  const double rho = std::hypot(l[1], l[2]);
  if (l[1] >= 0.0 && rho > 0.0) {
    closest = Vec3(0.0, l[1] / rho, l[2] / rho);
  } else {
    closest = Vec3(0.0, 0.0, l[2] >= 0.0 ? 1.0 : -1.0);
  }
  return 2.0 * std::asin(std::min(1.0, 0.5 * (l - closest).norm()));
}

ContainmentReport containment_margin(std::span<const Vec3> phases) {
  if (phases.empty()) fail(ErrorKind::InvalidArgument, "containment_margin needs at least one phase");
  ContainmentReport r;
  r.margin = distance_to_forbidden(phases[0]);
  for (std::size_t i = 1; i < phases.size(); ++i) {
    const double d = distance_to_forbidden(phases[i]);
    if (d < r.margin) {
      r.margin = d;
      r.worst_index = i;
    }
  }
  if (r.margin <= 1e-12) {
    r.margin = 0.0;
    r.violation = true;
  }
  return r;
}

ContainmentReport containment_margin(std::span<const PhaseDirection> phases) {
  std::vector<Vec3> v;
  v.reserve(phases.size());
  for (const auto& p : phases) v.push_back(p.lambda());
  return containment_margin(std::span<const Vec3>(v));
}

std::vector<Vec3> triangle_phases(const SurfaceMesh& mesh, const HyperkahlerStructure& s) {
  std::vector<Vec3> out(mesh.triangles.size());
  for (std::size_t k = 0; k < mesh.triangles.size(); ++k) {
    const auto& t = mesh.triangles[k];
    const Vec4 e1 = (mesh.vertices[t[1]] - mesh.vertices[t[0]]).normalized();
    const Vec4 w = mesh.vertices[t[2]] - mesh.vertices[t[0]];
    const Vec4 e2 = (w - w.dot(e1) * e1).normalized();
    for (int a = 1; a <= 3; ++a) out[k][a - 1] = kahler_form(s, a, e1, e2);
  }
  return out;
}

}  // namespace hkflow
