#pragma once

#include <array>
#include <complex>

#include <Eigen/Dense>

namespace hkflow {

using Vec3 = Eigen::Vector3d;
using Vec4 = Eigen::Vector4d;
using Mat3 = Eigen::Matrix3d;
using Mat4 = Eigen::Matrix4d;

/// A point of S^2 read as a direction in the space of complex structures
/// sum_a lambda_a J_a.
class PhaseDirection {
 public:
  /// Normalizes `v`; throws InvalidArgument when |v| is not within 1e-12 of 1
  /// and `strict` is set, or when v vanishes.
  explicit PhaseDirection(const Vec3& v, bool strict = false);

  const Vec3& lambda() const noexcept { return lambda_; }
  double operator[](int i) const { return lambda_[i]; }

 private:
  Vec3 lambda_;
};

/// Three orthogonal complex structures on R^4 obeying the quaternion relations.
class HyperkahlerStructure {
 public:
  HyperkahlerStructure(const Mat4& j1, const Mat4& j2, const Mat4& j3) : j_{j1, j2, j3} {}

  /// J_alpha for alpha in {1, 2, 3}.
  const Mat4& J(int alpha) const { return j_.at(alpha - 1); }

  /// sum_a c_a J_a.
  Mat4 combine(const Vec3& c) const { return c[0] * j_[0] + c[1] * j_[1] + c[2] * j_[2]; }

 private:
  std::array<Mat4, 3> j_;
};

/// Largest deviation from orthogonality, J_a^2 = -I, J1 J2 J3 = -I and
/// J1 J2 = -J2 J1 = J3.
double quaternionic_defect(const HyperkahlerStructure& s);

/// True when quaternionic_defect(s) <= tol.
bool verify_quaternionic(const HyperkahlerStructure& s, double tol = 1e-12);

/// The integer matrices of the flat structure on R^4 in the coordinate basis:
/// J1 is multiplication by i on (x1 + i x2, x3 + i x4).
HyperkahlerStructure standard_structure();

/// J~_a = sum_b A_ab J_b. Throws NonRotation unless A^T A = I and det A = 1
/// to 1e-10.
HyperkahlerStructure rotate(const HyperkahlerStructure& s, const Mat3& a);

/// omega_a(u, v) = <J_a u, v>.
double kahler_form(const HyperkahlerStructure& s, int alpha, const Vec4& u, const Vec4& v);

/// Omega_{J1}(u, v) = omega_2(u, v) + i omega_3(u, v). Other base directions are
/// reached by rotating the structure first.
std::complex<double> holomorphic_symplectic(const HyperkahlerStructure& s, const Vec4& u, const Vec4& v);

/// A rotation whose first row is `lambda`. The second row is the coordinate
/// axis least aligned with lambda, orthogonalized; ties go to the lowest index.
Mat3 complete_to_rotation(const Vec3& lambda);

/// Cross product on R^3 restricted to T_lambda S^2: the complex structure of S^2.
inline Vec3 sphere_complex_structure(const Vec3& lambda, const Vec3& w) { return lambda.cross(w); }

}  // namespace hkflow
