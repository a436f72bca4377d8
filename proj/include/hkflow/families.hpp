#pragma once

#include <array>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hkflow/surface.hpp"

namespace hkflow {

/// Parameter rectangle of a surface family. Periodic directions wrap; the
/// others are closed intervals that finite-difference stencils must stay in.
struct ParamDomain {
  double u0 = 0.0, u1 = 1.0, v0 = 0.0, v1 = 1.0;
  bool periodic_u = false, periodic_v = false;

  bool contains(double u, double v) const;
};

/// A parametric immersion into R^4 with analytic jets.
class SurfaceFamily {
 public:
  virtual ~SurfaceFamily() = default;

  virtual SurfaceJet jet(double u, double v) const = 0;
  virtual ParamDomain domain() const = 0;
  /// Compact without boundary (coordinate singularities such as sphere poles allowed).
  virtual bool closed() const { return false; }
  virtual std::string name() const = 0;
  /// Characteristic parameter length; finite-difference steps scale with it.
  virtual double parameter_scale() const { return 1.0; }
};

using SurfacePtr = std::shared_ptr<const SurfaceFamily>;

/// X = (u, v, 0, 0) on [-1, 1]^2.
class PlaneFamily final : public SurfaceFamily {
 public:
  explicit PlaneFamily(double half_width = 1.0) : w_(half_width) {}
  SurfaceJet jet(double u, double v) const override;
  ParamDomain domain() const override { return {-w_, w_, -w_, w_, false, false}; }
  std::string name() const override { return "plane"; }

 private:
  double w_;
};

/// X = (r cos u, r sin u, v, 0), u periodic, |v| <= half_length.
class CylinderFamily final : public SurfaceFamily {
 public:
  explicit CylinderFamily(double radius = 1.0, double half_length = 1.0) : r_(radius), l_(half_length) {}
  SurfaceJet jet(double u, double v) const override;
  ParamDomain domain() const override;
  std::string name() const override { return "cylinder"; }
  double radius() const { return r_; }

 private:
  double r_, l_;
};

/// Round sphere of radius r in {x4 = 0}, polar angle u in [0, pi], azimuth v periodic.
/// Outward normal with the (u, v) orientation.
class SphereFamily final : public SurfaceFamily {
 public:
  explicit SphereFamily(double radius = 1.0) : r_(radius) {}
  SurfaceJet jet(double u, double v) const override;
  ParamDomain domain() const override;
  bool closed() const override { return true; }
  std::string name() const override { return "sphere"; }
  double radius() const { return r_; }

 private:
  double r_;
};

/// Grim reaper X = (u, v, -ln cos u, 0), |u| <= pi/2 - margin, |v| <= half_length.
class GrimReaperFamily final : public SurfaceFamily {
 public:
  explicit GrimReaperFamily(double margin = 0.05, double half_length = 1.0) : margin_(margin), l_(half_length) {}
  SurfaceJet jet(double u, double v) const override;
  ParamDomain domain() const override;
  std::string name() const override { return "grim-reaper"; }

 private:
  double margin_, l_;
};

/// Graph X = (u, v, q1(u, v), q2(u, v)) with q_k = a_k u^2 + b_k u v + c_k v^2,
/// coefficients ordered (a1, b1, c1, a2, b2, c2).
class QuadraticGraphFamily final : public SurfaceFamily {
 public:
  explicit QuadraticGraphFamily(const std::array<double, 6>& c, double half_width = 1.0) : c_(c), w_(half_width) {}
  SurfaceJet jet(double u, double v) const override;
  ParamDomain domain() const override { return {-w_, w_, -w_, w_, false, false}; }
  std::string name() const override { return "quadratic"; }
  const std::array<double, 6>& coefficients() const { return c_; }

 private:
  std::array<double, 6> c_;
  double w_;
};

/// eps (X - q) for a base family. Tangent planes, and hence phases, are unchanged.
class RescaledFamily final : public SurfaceFamily {
 public:
  RescaledFamily(SurfacePtr base, double eps, const Vec4& q) : base_(std::move(base)), eps_(eps), q_(q) {}
  SurfaceJet jet(double u, double v) const override;
  ParamDomain domain() const override { return base_->domain(); }
  bool closed() const override { return base_->closed(); }
  std::string name() const override { return base_->name() + "-rescaled"; }
  double parameter_scale() const override { return base_->parameter_scale(); }

 private:
  SurfacePtr base_;
  double eps_;
  Vec4 q_;
};

/// Named parameters for building families from configuration.
using FamilyParams = std::map<std::string, double>;

/// plane | cylinder | sphere | grim-reaper | quadratic | torus-circle | torus-perturbed.
/// Throws InvalidArgument for unknown names.
SurfacePtr make_builtin_family(const std::string& name, const FamilyParams& params = {});

std::vector<std::string> builtin_family_names();

/// Tensor-product midpoint grid over the family's domain, shrunk by `inset`
/// (relative) in non-periodic directions so FD stencils stay inside.
std::vector<std::pair<double, double>> midpoint_grid(const SurfaceFamily& f, int nu, int nv, double inset = 1e-3);

}  // namespace hkflow
