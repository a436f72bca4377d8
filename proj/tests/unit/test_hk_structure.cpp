#include <doctest.h>

#include "hkflow/errors.hpp"
#include "hkflow/hk_structure.hpp"
#include "test_util.hpp"

using namespace hkflow;
using hkflow::test::unit;

TEST_CASE("standard structure has the integer matrices and quaternion relations") {
  const auto s = standard_structure();
  CHECK(s.J(1).col(0) == Vec4(0, 1, 0, 0));
  CHECK(s.J(1).col(2) == Vec4(0, 0, 0, 1));
  CHECK(s.J(1) * s.J(2) == s.J(3));
  CHECK(s.J(1) * s.J(1) == -Mat4::Identity());
  CHECK(s.J(1) * s.J(2) * s.J(3) == -Mat4::Identity());
  for (int a = 1; a <= 3; ++a) {
    CHECK(s.J(a).transpose() * s.J(a) == Mat4::Identity());
    CHECK(s.J(a).cwiseAbs().sum() == 4.0);  // signed permutation matrices
  }
  CHECK(quaternionic_defect(s) <= 1e-14);
  CHECK(verify_quaternionic(s));
}

TEST_CASE("rotate by the identity leaves the structure unchanged") {
  const auto s = standard_structure();
  const auto r = rotate(s, Mat3::Identity());
  for (int a = 1; a <= 3; ++a) CHECK(r.J(a) == s.J(a));
}

TEST_CASE("quarter turn about the first axis exchanges J2 and J3") {
  const auto s = standard_structure();
  // Rows of A give J~_a = sum_b A_ab J_b; this A sends J2 -> J3 and J3 -> -J2.
  Mat3 a;
  a << 1, 0, 0, 0, 0, 1, 0, -1, 0;
  const auto r = rotate(s, a);
  CHECK((r.J(2) - s.J(3)).norm() == 0.0);
  CHECK((r.J(3) + s.J(2)).norm() == 0.0);
  // The right-handed matrix R_x(pi/2) produces the opposite signs.
  Mat3 rx;
  rx << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  CHECK((rotate(s, rx).J(2) + s.J(3)).norm() == 0.0);
}

TEST_CASE("rotate rejects matrices outside SO(3)") {
  const auto s = standard_structure();
  const Mat3 reflection = Eigen::Vector3d(1, 1, -1).asDiagonal();
  CHECK_THROWS_AS(rotate(s, reflection), Error);
  try {
    rotate(s, 1.5 * Mat3::Identity());
    FAIL("expected NonRotation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonRotation);
  }
}

TEST_CASE("random rotations preserve the quaternion relations") {
  const auto s = standard_structure();
  for (int k = 0; k < 1000; ++k) CHECK(verify_quaternionic(rotate(s, test::random_rotation()), 1e-12));
}

TEST_CASE("rotations compose: rotate(rotate(s, A), B) = rotate(s, BA)") {
  const auto s = standard_structure();
  for (int k = 0; k < 200; ++k) {
    const Mat3 a = test::random_rotation(), b = test::random_rotation();
    const auto lhs = rotate(rotate(s, a), b), rhs = rotate(s, b * a);
    for (int al = 1; al <= 3; ++al) CHECK((lhs.J(al) - rhs.J(al)).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("Kahler forms: examples, antisymmetry and compatibility") {
  const auto s = standard_structure();
  CHECK(kahler_form(s, 1, unit(0), unit(1)) == 1.0);
  CHECK(kahler_form(s, 2, unit(0), unit(2)) == 1.0);
  for (int k = 0; k < 200; ++k) {
    const Vec4 u = test::gaussian4(), v = test::gaussian4();
    const auto r = rotate(s, test::random_rotation());
    for (int a = 1; a <= 3; ++a) {
      CHECK(kahler_form(r, a, u, u) == doctest::Approx(0.0).epsilon(1e-12));
      CHECK(std::abs(kahler_form(r, a, u, v) + kahler_form(r, a, v, u)) <= 1e-12);
      CHECK(std::abs(kahler_form(r, a, r.J(a) * u, r.J(a) * v) - kahler_form(r, a, u, v)) <= 1e-12);
    }
  }
}

TEST_CASE("holomorphic symplectic form of J1") {
  const auto s = standard_structure();
  CHECK(holomorphic_symplectic(s, unit(0), unit(2)) == std::complex<double>(1.0, 0.0));
  CHECK(holomorphic_symplectic(s, unit(0), unit(1)) == std::complex<double>(0.0, 0.0));
  for (int k = 0; k < 50; ++k) {
    const Vec4 u = test::gaussian4(), v = test::gaussian4();
    CHECK(std::abs(holomorphic_symplectic(s, u, u)) <= 1e-12);
    CHECK(std::abs(holomorphic_symplectic(s, u, v) + holomorphic_symplectic(s, v, u)) <= 1e-12);
    // Complex bilinear for J1: Omega(J1 u, v) = i Omega(u, v).
    CHECK(std::abs(holomorphic_symplectic(s, s.J(1) * u, v) - std::complex<double>(0, 1) *
                                                                  holomorphic_symplectic(s, u, v)) <= 1e-12);
  }
}

TEST_CASE("PhaseDirection normalizes, or rejects in strict mode") {
  CHECK(PhaseDirection(Vec3(0, 3, 4)).lambda().isApprox(Vec3(0, 0.6, 0.8)));
  CHECK_THROWS_AS(PhaseDirection(Vec3(0, 3, 4), true), Error);
  CHECK_THROWS_AS(PhaseDirection(Vec3::Zero()), Error);
  CHECK_NOTHROW(PhaseDirection(Vec3(1, 0, 0), true));
}

TEST_CASE("complete_to_rotation has lambda as first row") {
  for (int k = 0; k < 200; ++k) {
    const Vec3 l = Vec3::Random().normalized();
    const Mat3 a = complete_to_rotation(l);
    CHECK((a.row(0).transpose() - l).norm() <= 1e-14);
    CHECK((a * a.transpose() - Mat3::Identity()).norm() <= 1e-12);
    CHECK(a.determinant() == doctest::Approx(1.0).epsilon(1e-12));
  }
  // The rotated J~_1 is the complex structure sum_a lambda_a J_a.
  const auto s = standard_structure();
  const Vec3 l = Vec3(0.3, -0.5, 0.2).normalized();
  CHECK((rotate(s, complete_to_rotation(l)).J(1) - s.combine(l)).norm() <= 1e-14);
}

TEST_CASE("a unit combination of the J_a is a complex structure") {
  const auto s = standard_structure();
  for (int k = 0; k < 100; ++k) {
    const Vec3 l = Vec3::Random().normalized();
    const Mat4 j = s.combine(l);
    CHECK((j * j + Mat4::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
  }
}
