#pragma once

#include <array>

#include "hkflow/hk_structure.hpp"

namespace hkflow {

using Mat2 = Eigen::Matrix2d;

/// Position and parametric derivatives up to second order of an immersion
/// X(u, v) into R^4 at one point.
struct SurfaceJet {
  Vec4 X = Vec4::Zero();
  Vec4 Xu = Vec4::Zero();
  Vec4 Xv = Vec4::Zero();
  Vec4 Xuu = Vec4::Zero();
  Vec4 Xuv = Vec4::Zero();
  Vec4 Xvv = Vec4::Zero();

  /// Induced metric in (u, v) coordinates.
  Mat2 metric() const;
  /// True when the Gram determinant exceeds 1e-12 |Xu|^2 |Xv|^2.
  bool nondegenerate() const;
};

/// Adapted orthonormal frame at a point.
///
/// e1 = Xu / |Xu| and e2 follows by Gram-Schmidt with (e1, e2) positively
/// oriented against (Xu, Xv). With lambda the phase of the tangent plane and
/// J~ = rotate(s, complete_to_rotation(lambda)), the normals are
/// nu1 = J~_2 e1 and nu2 = J~_3 e1, so (e1, e2, nu1, nu2) is positively
/// oriented in R^4 and J~_1 e1 = e2.
struct FrameData {
  Vec4 e1, e2, nu1, nu2;
  Mat2 g;          ///< induced metric in (u, v)
  Mat2 to_param;   ///< row i holds the (u, v) components of e_i
  Vec3 lambda;     ///< lambda_a = <J_a e1, e2>

  const Vec4& e(int i) const { return i == 0 ? e1 : e2; }
  const Vec4& nu(int a) const { return a == 0 ? nu1 : nu2; }
};

/// h[a](i, j) = <B(e_i, e_j), nu_a>, symmetric in (i, j).
struct SecondFundamentalForm {
  std::array<Mat2, 2> h{Mat2::Zero(), Mat2::Zero()};

  /// B(e_i, e_j) as a vector of R^4.
  Vec4 B(const FrameData& f, int i, int j) const { return h[0](i, j) * f.nu1 + h[1](i, j) * f.nu2; }
  /// |B|^2 = sum_{a,i,j} h[a](i,j)^2.
  double norm2() const { return h[0].squaredNorm() + h[1].squaredNorm(); }
};

/// Throws DegenerateJet when the jet's tangent vectors are dependent.
FrameData frames(const SurfaceJet& jet, const HyperkahlerStructure& s);

SecondFundamentalForm second_fundamental_form(const SurfaceJet& jet, const FrameData& f);

/// H = sum_i B(e_i, e_i).
Vec4 mean_curvature(const SurfaceJet& jet, const FrameData& f, const SecondFundamentalForm& sff);

Vec4 tangential_projection(const FrameData& f, const Vec4& w);
Vec4 normal_projection(const FrameData& f, const Vec4& w);

/// Everything pointwise about a jet in one bundle.
struct PointGeometry {
  FrameData frames;
  SecondFundamentalForm sff;
  Vec4 H;
};

PointGeometry point_geometry(const SurfaceJet& jet, const HyperkahlerStructure& s);

}  // namespace hkflow
