#include "hkflow/hk_structure.hpp"

#include <algorithm>
#include <cmath>

#include "hkflow/errors.hpp"

namespace hkflow {

PhaseDirection::PhaseDirection(const Vec3& v, bool strict) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorKind::InvalidArgument, "phase direction must be a nonzero finite vector");
  if (strict && std::abs(n - 1.0) > 1e-12) fail(ErrorKind::InvalidArgument, "phase direction is not a unit vector");
  lambda_ = v / n;
}

double quaternionic_defect(const HyperkahlerStructure& s) {
  const Mat4 id = Mat4::Identity();
  double d = 0.0;
  auto acc = [&d](const Mat4& m) { d = std::max(d, m.cwiseAbs().maxCoeff()); };
  for (int a = 1; a <= 3; ++a) {
    acc(s.J(a).transpose() * s.J(a) - id);
    acc(s.J(a) * s.J(a) + id);
  }
  acc(s.J(1) * s.J(2) * s.J(3) + id);
  acc(s.J(1) * s.J(2) - s.J(3));
  acc(s.J(2) * s.J(1) + s.J(3));
  return d;
}

bool verify_quaternionic(const HyperkahlerStructure& s, double tol) { return quaternionic_defect(s) <= tol; }

HyperkahlerStructure standard_structure() {
  Mat4 j1, j2, j3;
  // clang-format off
  j1 << 0, -1, 0,  0,
        1,  0, 0,  0,
        0,  0, 0, -1,
        0,  0, 1,  0;
  j2 << 0,  0, -1, 0,
        0,  0,  0, 1,
        1,  0,  0, 0,
        0, -1,  0, 0;
  j3 << 0,  0,  0, -1,
        0,  0, -1,  0,
        0,  1,  0,  0,
        1,  0,  0,  0;
  // clang-format on
  return {j1, j2, j3};
}

HyperkahlerStructure rotate(const HyperkahlerStructure& s, const Mat3& a) {
  const double orth = (a.transpose() * a - Mat3::Identity()).cwiseAbs().maxCoeff();
  const double det = a.determinant();
  if (!(orth <= 1e-10) || !(std::abs(det - 1.0) <= 1e-10)) fail(ErrorKind::NonRotation, "matrix is not in SO(3)");
  return {s.combine(a.row(0).transpose()), s.combine(a.row(1).transpose()), s.combine(a.row(2).transpose())};
}

double kahler_form(const HyperkahlerStructure& s, int alpha, const Vec4& u, const Vec4& v) {
  return (s.J(alpha) * u).dot(v);
}

std::complex<double> holomorphic_symplectic(const HyperkahlerStructure& s, const Vec4& u, const Vec4& v) {
  return {kahler_form(s, 2, u, v), kahler_form(s, 3, u, v)};
}

Mat3 complete_to_rotation(const Vec3& lambda) {
  const Vec3 l = lambda.normalized();
  int axis = 0;
  for (int k = 1; k < 3; ++k)
    if (std::abs(l[k]) < std::abs(l[axis])) axis = k;
  Vec3 mu = Vec3::Unit(axis) - l[axis] * l;
  mu.normalize();
  Mat3 a;
  a.row(0) = l.transpose();
  a.row(1) = mu.transpose();
  a.row(2) = l.cross(mu).transpose();
  return a;
}

}  // namespace hkflow
