#include "hkflow/surface.hpp"

#include <cmath>

#include "hkflow/errors.hpp"

namespace hkflow {

Mat2 SurfaceJet::metric() const {
  Mat2 g;
  g << Xu.dot(Xu), Xu.dot(Xv), Xu.dot(Xv), Xv.dot(Xv);
  return g;
}

bool SurfaceJet::nondegenerate() const {
  const double a = Xu.squaredNorm();
  const double b = Xv.squaredNorm();
  const double c = Xu.dot(Xv);
  const double gram = a * b - c * c;
  return std::isfinite(gram) && gram > 1e-12 * a * b && a > 0.0 && b > 0.0;
}

FrameData frames(const SurfaceJet& jet, const HyperkahlerStructure& s) {
  if (!jet.nondegenerate()) fail(ErrorKind::DegenerateJet, "tangent vectors are linearly dependent");
  FrameData f;
  const double nu = jet.Xu.norm();
  f.e1 = jet.Xu / nu;
  const double c = jet.Xv.dot(f.e1);
  const Vec4 w = jet.Xv - c * f.e1;
  const double n = w.norm();
  f.e2 = w / n;
  f.g = jet.metric();
  f.to_param << 1.0 / nu, 0.0, -c / (nu * n), 1.0 / n;

  for (int a = 1; a <= 3; ++a) f.lambda[a - 1] = (s.J(a) * f.e1).dot(f.e2);
  // Round-off only: oriented 2-planes in R^4 have unit phase.
  f.lambda.normalize();

  const Mat3 rot = complete_to_rotation(f.lambda);
  f.nu1 = s.combine(rot.row(1).transpose()) * f.e1;
  f.nu2 = s.combine(rot.row(2).transpose()) * f.e1;
  return f;
}

SecondFundamentalForm second_fundamental_form(const SurfaceJet& jet, const FrameData& f) {
  SecondFundamentalForm sff;
  for (int a = 0; a < 2; ++a) {
    const Vec4& nu = f.nu(a);
    Mat2 b;
    b << jet.Xuu.dot(nu), jet.Xuv.dot(nu), jet.Xuv.dot(nu), jet.Xvv.dot(nu);
    Mat2 h = f.to_param * b * f.to_param.transpose();
    h(1, 0) = h(0, 1);
    sff.h[a] = h;
  }
  return sff;
}

Vec4 mean_curvature(const SurfaceJet&, const FrameData& f, const SecondFundamentalForm& sff) {
  return sff.h[0].trace() * f.nu1 + sff.h[1].trace() * f.nu2;
}

Vec4 tangential_projection(const FrameData& f, const Vec4& w) { return w.dot(f.e1) * f.e1 + w.dot(f.e2) * f.e2; }

Vec4 normal_projection(const FrameData& f, const Vec4& w) { return w.dot(f.nu1) * f.nu1 + w.dot(f.nu2) * f.nu2; }

PointGeometry point_geometry(const SurfaceJet& jet, const HyperkahlerStructure& s) {
  PointGeometry p;
  p.frames = frames(jet, s);
  p.sff = second_fundamental_form(jet, p.frames);
  p.H = mean_curvature(jet, p.frames, p.sff);
  return p;
}

}  // namespace hkflow
