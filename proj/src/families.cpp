#include "hkflow/families.hpp"

#include <cmath>
#include <numbers>

#include "hkflow/curve.hpp"
#include "hkflow/errors.hpp"

namespace hkflow {

using std::numbers::pi;

bool ParamDomain::contains(double u, double v) const {
  const bool in_u = periodic_u || (u >= u0 && u <= u1);
  const bool in_v = periodic_v || (v >= v0 && v <= v1);
  return in_u && in_v;
}

SurfaceJet PlaneFamily::jet(double u, double v) const {
  SurfaceJet j;
  j.X = Vec4(u, v, 0, 0);
  j.Xu = Vec4(1, 0, 0, 0);
  j.Xv = Vec4(0, 1, 0, 0);
  return j;
}

SurfaceJet CylinderFamily::jet(double u, double v) const {
  const double c = std::cos(u), s = std::sin(u);
  SurfaceJet j;
  j.X = Vec4(r_ * c, r_ * s, v, 0);
  j.Xu = Vec4(-r_ * s, r_ * c, 0, 0);
  j.Xv = Vec4(0, 0, 1, 0);
  j.Xuu = Vec4(-r_ * c, -r_ * s, 0, 0);
  return j;
}

ParamDomain CylinderFamily::domain() const { return {0.0, 2 * pi, -l_, l_, true, false}; }

SurfaceJet SphereFamily::jet(double u, double v) const {
  const double st = std::sin(u), ct = std::cos(u), sp = std::sin(v), cp = std::cos(v);
  SurfaceJet j;
  j.X = r_ * Vec4(st * cp, st * sp, ct, 0);
  j.Xu = r_ * Vec4(ct * cp, ct * sp, -st, 0);
  j.Xv = r_ * Vec4(-st * sp, st * cp, 0, 0);
  j.Xuu = r_ * Vec4(-st * cp, -st * sp, -ct, 0);
  j.Xuv = r_ * Vec4(-ct * sp, ct * cp, 0, 0);
  j.Xvv = r_ * Vec4(-st * cp, -st * sp, 0, 0);
  return j;
}

ParamDomain SphereFamily::domain() const { return {0.0, pi, 0.0, 2 * pi, false, true}; }

SurfaceJet GrimReaperFamily::jet(double u, double v) const {
  const double c = std::cos(u), t = std::tan(u);
  SurfaceJet j;
  j.X = Vec4(u, v, -std::log(c), 0);
  j.Xu = Vec4(1, 0, t, 0);
  j.Xv = Vec4(0, 1, 0, 0);
  j.Xuu = Vec4(0, 0, 1.0 / (c * c), 0);
  return j;
}

ParamDomain GrimReaperFamily::domain() const {
  const double a = pi / 2 - margin_;
  return {-a, a, -l_, l_, false, false};
}

SurfaceJet QuadraticGraphFamily::jet(double u, double v) const {
  const auto& c = c_;
  SurfaceJet j;
  j.X = Vec4(u, v, c[0] * u * u + c[1] * u * v + c[2] * v * v, c[3] * u * u + c[4] * u * v + c[5] * v * v);
  j.Xu = Vec4(1, 0, 2 * c[0] * u + c[1] * v, 2 * c[3] * u + c[4] * v);
  j.Xv = Vec4(0, 1, c[1] * u + 2 * c[2] * v, c[4] * u + 2 * c[5] * v);
  j.Xuu = Vec4(0, 0, 2 * c[0], 2 * c[3]);
  j.Xuv = Vec4(0, 0, c[1], c[4]);
  j.Xvv = Vec4(0, 0, 2 * c[2], 2 * c[5]);
  return j;
}

SurfaceJet RescaledFamily::jet(double u, double v) const {
  SurfaceJet j = base_->jet(u, v);
  j.X = eps_ * (j.X - q_);
  j.Xu *= eps_;
  j.Xv *= eps_;
  j.Xuu *= eps_;
  j.Xuv *= eps_;
  j.Xvv *= eps_;
  return j;
}

namespace {

double param_or(const FamilyParams& p, const std::string& key, double fallback) {
  auto it = p.find(key);
  return it == p.end() ? fallback : it->second;
}

}  // namespace

SurfacePtr make_builtin_family(const std::string& name, const FamilyParams& p) {
  if (name == "plane") return std::make_shared<PlaneFamily>(param_or(p, "half_width", 1.0));
  if (name == "cylinder")
    return std::make_shared<CylinderFamily>(param_or(p, "radius", 1.0), param_or(p, "half_length", 1.0));
  if (name == "sphere") return std::make_shared<SphereFamily>(param_or(p, "radius", 1.0));
  if (name == "grim-reaper")
    return std::make_shared<GrimReaperFamily>(param_or(p, "margin", 0.05), param_or(p, "half_length", 1.0));
  if (name == "quadratic") {
    std::array<double, 6> c{};
    const char* keys[] = {"a1", "b1", "c1", "a2", "b2", "c2"};
    for (int k = 0; k < 6; ++k) c[k] = param_or(p, keys[k], 0.0);
    return std::make_shared<QuadraticGraphFamily>(c, param_or(p, "half_width", 1.0));
  }
  if (name == "torus-circle") {
    const double r = param_or(p, "radius", 1.0);
    return std::make_shared<CurveTorusFamily>([r](double x) {
      const cplx e = std::polar(1.0, x);
      return std::array<cplx, 3>{r * e, cplx(0, r) * e, -r * e};
    });
  }
  if (name == "torus-perturbed") {
    const double a = param_or(p, "amplitude", 0.05);
    const double k = param_or(p, "mode", 3.0);
    return std::make_shared<CurveTorusFamily>([a, k](double x) {
      // gamma = e^{ix} (1 + a cos kx)
      const cplx e = std::polar(1.0, x);
      const cplx I(0, 1);
      const double r = 1 + a * std::cos(k * x), r1 = -a * k * std::sin(k * x), r2 = -a * k * k * std::cos(k * x);
      return std::array<cplx, 3>{r * e, (r1 + I * r) * e, (r2 + 2.0 * I * r1 - r) * e};
    });
  }
  fail(ErrorKind::InvalidArgument, "unknown surface family '" + name + "'");
}

std::vector<std::string> builtin_family_names() {
  return {"plane", "cylinder", "sphere", "grim-reaper", "quadratic", "torus-circle", "torus-perturbed"};
}

std::vector<std::pair<double, double>> midpoint_grid(const SurfaceFamily& f, int nu, int nv, double inset) {
  const ParamDomain d = f.domain();
  auto shrink = [inset](double a, double b, bool periodic) {
    if (periodic) return std::pair{a, b};
    const double pad = inset * (b - a);
    return std::pair{a + pad, b - pad};
  };
  const auto [u0, u1] = shrink(d.u0, d.u1, d.periodic_u);
  const auto [v0, v1] = shrink(d.v0, d.v1, d.periodic_v);
  std::vector<std::pair<double, double>> pts;
  pts.reserve(static_cast<std::size_t>(nu) * nv);
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j)
      pts.emplace_back(u0 + (i + 0.5) * (u1 - u0) / nu, v0 + (j + 0.5) * (v1 - v0) / nv);
  return pts;
}

}  // namespace hkflow
