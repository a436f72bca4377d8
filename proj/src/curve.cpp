#include "hkflow/curve.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <numbers>

#include <unsupported/Eigen/FFT>

#include "hkflow/errors.hpp"
#include "hkflow/numeric.hpp"

namespace hkflow {

using std::numbers::pi;

namespace {

const cplx I(0.0, 1.0);

// Signed wavenumber of FFT slot j.
int wavenumber(int j, int n) { return j <= n / 2 ? j : j - n; }

std::vector<cplx> fft(std::span<const cplx> f) {
  Eigen::FFT<double> engine;
  std::vector<cplx> in(f.begin(), f.end()), out;
  engine.fwd(out, in);
  return out;
}

std::vector<cplx> ifft(const std::vector<cplx>& c) {
  Eigen::FFT<double> engine;
  std::vector<cplx> out;
  engine.inv(out, c);
  return out;
}

// Fourier multiplier (ik)^order; odd orders drop the Nyquist mode.
cplx multiplier(int j, int n, int order) {
  const int k = wavenumber(j, n);
  if (order % 2 == 1 && 2 * j == n) return 0.0;
  cplx m = 1.0;
  for (int o = 0; o < order; ++o) m *= I * static_cast<double>(k);
  return m;
}

double dot2(cplx a, cplx b) { return a.real() * b.real() + a.imag() * b.imag(); }

struct CurveDerivatives {
  std::vector<cplx> d1, d2;
};

CurveDerivatives derivatives(const PlaneCurve& c) {
  return {spectral_derivative(c.samples(), 1), spectral_derivative(c.samples(), 2)};
}

}  // namespace

PlaneCurve::PlaneCurve(std::vector<cplx> samples) : z_(std::move(samples)) {
  if (z_.size() < 16) fail(ErrorKind::InvalidArgument, "a plane curve needs at least 16 samples");
  const double diam = diameter();
  if (!(diam > 0.0) || !std::isfinite(diam)) fail(ErrorKind::DegenerateSpacing, "curve has no extent");
  if (!(min_spacing() > 1e-10 * diam)) fail(ErrorKind::DegenerateSpacing, "consecutive samples coincide");
  if (!(min_modulus() > 1e-10 * diam)) fail(ErrorKind::OriginCollision, "curve passes through the origin");
}

PlaneCurve PlaneCurve::sample(const std::function<cplx(double)>& gamma, int n) {
  std::vector<cplx> z(std::max(n, 0));
  for (int j = 0; j < n; ++j) z[j] = gamma(2 * pi * j / n);
  return PlaneCurve(std::move(z));
}

double PlaneCurve::param(int j) const { return 2 * pi * j / size(); }

double PlaneCurve::diameter() const {
  double d = 0.0;
  for (std::size_t i = 0; i < z_.size(); ++i)
    for (std::size_t j = i + 1; j < z_.size(); ++j) d = std::max(d, std::abs(z_[i] - z_[j]));
  return d;
}

double PlaneCurve::min_spacing() const {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < z_.size(); ++j) m = std::min(m, std::abs(z_[(j + 1) % z_.size()] - z_[j]));
  return m;
}

double PlaneCurve::min_modulus() const {
  double m = std::numeric_limits<double>::infinity();
  for (cplx z : z_) m = std::min(m, std::abs(z));
  return m;
}

std::vector<cplx> spectral_derivative(std::span<const cplx> f, int order) {
  if (order < 0) fail(ErrorKind::InvalidArgument, "negative derivative order");
  const int n = static_cast<int>(f.size());
  std::vector<cplx> c = fft(f);
  for (int j = 0; j < n; ++j) c[j] *= multiplier(j, n, order);
  return ifft(c);
}

TrigInterpolant::TrigInterpolant(std::span<const cplx> samples) : coeff_(fft(samples)), n_(static_cast<int>(samples.size())) {
  for (cplx& c : coeff_) c /= static_cast<double>(n_);
}

std::array<cplx, 4> TrigInterpolant::eval(double x) const {
  std::array<cplx, 4> out{};
  auto add = [&](cplx c, double k) {
    const cplx e = c * std::polar(1.0, k * x);
    cplx m = 1.0;
    for (int d = 0; d < 4; ++d) {
      out[d] += m * e;
      m *= I * k;
    }
  };
  for (int j = 0; j < n_; ++j) {
    if (2 * j == n_) {
      // Nyquist mode split evenly between +-n/2 keeps the interpolant real-symmetric.
      add(0.5 * coeff_[j], n_ / 2.0);
      add(0.5 * coeff_[j], -n_ / 2.0);
    } else {
      add(coeff_[j], wavenumber(j, n_));
    }
  }
  return out;
}

std::vector<cplx> curvature_vector(const PlaneCurve& curve) {
  const auto [d1, d2] = derivatives(curve);
  const double scale = curve.diameter() / curve.size();
  std::vector<cplx> k(d1.size());
  for (std::size_t j = 0; j < d1.size(); ++j) {
    const double s2 = std::norm(d1[j]);
    if (!(std::sqrt(s2) > 1e-12 * scale)) fail(ErrorKind::DegenerateSpacing, "curve derivative vanishes");
    const cplx t = d1[j] / std::sqrt(s2);
    k[j] = (d2[j] - dot2(d2[j], t) * t) / s2;
  }
  return k;
}

std::vector<cplx> csf_velocity(const PlaneCurve& curve) {
  const auto& z = curve.samples();
  const auto d1 = spectral_derivative(z, 1);
  std::vector<cplx> v = curvature_vector(curve);
  for (std::size_t j = 0; j < z.size(); ++j) {
    const cplx t = d1[j] / std::abs(d1[j]);
    const cplx perp = z[j] - dot2(z[j], t) * t;
    v[j] -= perp / std::norm(z[j]);
  }
  return v;
}

double csf_stable_dt(const PlaneCurve& curve, const CsfOptions& opt) {
  const double h = curve.min_spacing();
  return opt.stability_c * h * h;
}

PlaneCurve csf_step(const PlaneCurve& curve, double dt, CurveScheme scheme, const CsfOptions& opt) {
  if (!(dt > 0.0)) fail(ErrorKind::InvalidArgument, "dt must be positive");
  const std::vector<cplx>& z = curve.samples();
  const std::size_t n = z.size();
  auto shifted = [&](const std::vector<cplx>& k, double a) {
    std::vector<cplx> w(n);
    for (std::size_t j = 0; j < n; ++j) w[j] = z[j] + a * k[j];
    return PlaneCurve(std::move(w));
  };

  std::vector<cplx> next(n);
  if (scheme == CurveScheme::RK4) {
    if (dt > csf_stable_dt(curve, opt) * (1 + 1e-12))
      fail(ErrorKind::StabilityViolation, "explicit step exceeds c (min spacing)^2");
    const auto k1 = csf_velocity(curve);
    const auto k2 = csf_velocity(shifted(k1, dt / 2));
    const auto k3 = csf_velocity(shifted(k2, dt / 2));
    const auto k4 = csf_velocity(shifted(k3, dt));
    for (std::size_t j = 0; j < n; ++j) next[j] = z[j] + dt / 6 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
  } else {
    // Linearly implicit: the stiff part a D^2 is taken implicitly with a
    // constant a >= 1/|gamma'|^2, the remainder explicitly.
    const auto v = csf_velocity(curve);
    const auto d1 = spectral_derivative(z, 1);
    const auto d2 = spectral_derivative(z, 2);
    double a = 0.0;
    for (cplx d : d1) a = std::max(a, 1.0 / std::norm(d));
    std::vector<cplx> rhs(n);
    for (std::size_t j = 0; j < n; ++j) rhs[j] = z[j] + dt * (v[j] - a * d2[j]);
    std::vector<cplx> c = fft(rhs);
    const int ni = static_cast<int>(n);
    for (int j = 0; j < ni; ++j) {
      const double k = wavenumber(j, ni);
      c[j] /= 1.0 + dt * a * k * k;
    }
    next = ifft(c);
  }
  if (opt.filter != CurveFilter::None) {
    std::vector<cplx> c = fft(next);
    const int ni = static_cast<int>(n);
    for (int j = 0; j < ni; ++j) {
      const int k = std::abs(wavenumber(j, ni));
      if (opt.filter == CurveFilter::TwoThirds)
        c[j] *= 3 * k > ni ? 0.0 : 1.0;
      else
        c[j] *= std::exp(-36.0 * std::pow(k / (ni / 2.0), 36));
    }
    next = ifft(c);
  }
  PlaneCurve out(std::move(next));
  if (out.min_modulus() < opt.origin_guard * out.diameter())
    fail(ErrorKind::OriginCollision, "curve entered the origin guard band");
  return out;
}

int winding_number(std::span<const cplx> points, cplx p) {
  const std::size_t n = points.size();
  if (n < 2) fail(ErrorKind::InvalidArgument, "winding number needs a closed polyline");
  double scale = 0.0;
  for (cplx z : points) scale = std::max(scale, std::abs(z - p));
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const cplx a = points[j] - p, b = points[(j + 1) % n] - p;
    // Distance from p to the segment [a, b].
    const cplx d = b - a;
    const double s = std::norm(d) > 0 ? std::clamp(-dot2(a, d) / std::norm(d), 0.0, 1.0) : 0.0;
    if (std::abs(a + s * d) <= 1e-14 * scale) fail(ErrorKind::PointOnCurve, "point lies on the curve");
    total += std::arg(b / a);
  }
  return static_cast<int>(std::lround(total / (2 * pi)));
}

int winding_number(const PlaneCurve& curve, cplx p) { return winding_number(curve.samples(), p); }

CurveDiagnostics diagnostics(const PlaneCurve& curve) {
  const auto& z = curve.samples();
  const auto [d1, d2] = derivatives(curve);
  double big = 0.0;
  for (cplx d : d1) big = std::max(big, std::abs(d));
  for (cplx d : d1)
    if (!(std::abs(d) > 1e-12 * big)) fail(ErrorKind::DegenerateDerivative, "gamma' vanishes at a sample");

  CurveDiagnostics r;
  r.ind_gamma = winding_number(z, 0.0);
  r.ind_gammaprime = winding_number(d1, 0.0);
  std::vector<double> kappa(z.size());
  std::vector<cplx> prod(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) {
    kappa[j] = -(d2[j] / d1[j]).imag();  // -Im (ln gamma')'
    prod[j] = z[j] * d1[j];
  }
  // Trapezoid on a periodic grid: (1/2pi) sum kappa_j (2pi/N).
  r.total_turning = pairwise_sum(kappa) / static_cast<double>(z.size());
  r.maslov_defect = r.ind_gamma - r.total_turning;
  r.ind_gamma_gammaprime = winding_number(prod, 0.0);
  return r;
}

CurveTorusFamily::CurveTorusFamily(const PlaneCurve& curve) {
  auto interp = std::make_shared<TrigInterpolant>(curve.samples());
  gamma_ = [interp](double x) {
    const auto e = interp->eval(x);
    return std::array<cplx, 3>{e[0], e[1], e[2]};
  };
}

CurveTorusFamily::CurveTorusFamily(std::function<std::array<cplx, 3>(double)> analytic) : gamma_(std::move(analytic)) {}

SurfaceJet CurveTorusFamily::jet(double x, double y) const {
  const auto [g, g1, g2] = gamma_(x);
  const double c = std::cos(y), s = std::sin(y);
  auto lift = [](cplx a, cplx b) { return Vec4(a.real(), a.imag(), b.real(), b.imag()); };
  SurfaceJet j;
  j.X = lift(g * c, g * s);
  j.Xu = lift(g1 * c, g1 * s);
  j.Xv = lift(-g * s, g * c);
  j.Xuu = lift(g2 * c, g2 * s);
  j.Xuv = lift(-g1 * s, g1 * c);
  j.Xvv = lift(-g * c, -g * s);
  return j;
}

ParamDomain CurveTorusFamily::domain() const { return {0.0, 2 * pi, 0.0, 2 * pi, true, true}; }

TorusEmbedding embed_torus(const PlaneCurve& curve, int ny) {
  if (ny < 8) fail(ErrorKind::InvalidArgument, "embed_torus needs Ny >= 8");
  TorusEmbedding e;
  e.jets = std::make_shared<CurveTorusFamily>(curve);
  const int nx = curve.size();
  auto lift = [](cplx a, cplx b) { return Vec4(a.real(), a.imag(), b.real(), b.imag()); };
  for (int i = 0; i < nx; ++i)
    for (int k = 0; k < ny; ++k) {
      const double y = 2 * pi * k / ny;
      const cplx g = curve.samples()[i];
      e.mesh.vertices.push_back(lift(g * std::cos(y), g * std::sin(y)));
    }
  auto id = [nx, ny](int i, int k) { return (i % nx) * ny + (k % ny); };
  for (int i = 0; i < nx; ++i)
    for (int k = 0; k < ny; ++k) {
      e.mesh.triangles.push_back({id(i, k), id(i + 1, k), id(i + 1, k + 1)});
      e.mesh.triangles.push_back({id(i, k), id(i + 1, k + 1), id(i, k + 1)});
    }
  e.mesh.finalize();
  return e;
}

double torus_max_B(const PlaneCurve& curve) {
  const auto& z = curve.samples();
  const auto d1 = spectral_derivative(z, 1);
  const auto kv = curvature_vector(curve);
  double best = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    // Orthonormal normal frame (N (c, s), i gamma/|gamma| (-s, c)) with N = i gamma'/|gamma'|:
    // B11 = kappa, B22 = -<gamma, N>/|gamma|^2, B12 = <i gamma, gamma'>/(|gamma'| |gamma|^2).
    const double sp = std::abs(d1[j]), r2 = std::norm(z[j]);
    const cplx nrm = I * d1[j] / sp;
    const double b11 = dot2(kv[j], nrm);
    const double b22 = -dot2(z[j], nrm) / r2;
    const double b12 = dot2(I * z[j], d1[j]) / (sp * r2);
    best = std::max(best, b11 * b11 + b22 * b22 + 2 * b12 * b12);
  }
  return std::sqrt(best);
}

double torus_max_H(const PlaneCurve& curve) {
  double best = 0.0;
  for (const cplx& w : csf_velocity(curve)) best = std::max(best, std::abs(w));
  return best;
}

std::vector<Vec3> torus_phases(const PlaneCurve& curve, int ny, const HyperkahlerStructure& s) {
  if (ny < 1) fail(ErrorKind::InvalidArgument, "torus_phases needs ny >= 1");
  const auto& z = curve.samples();
  const auto d1 = spectral_derivative(z, 1);
  auto lift = [](cplx a, cplx b) { return Vec4(a.real(), a.imag(), b.real(), b.imag()); };
  std::vector<Vec3> out;
  out.reserve(z.size() * ny);
  for (std::size_t j = 0; j < z.size(); ++j) {
    // F_x and F_y are orthogonal for every curve, so no Gram-Schmidt is needed.
    const cplx t = d1[j] / std::abs(d1[j]), r = z[j] / std::abs(z[j]);
    for (int k = 0; k < ny; ++k) {
      const double c = std::cos(2 * pi * k / ny), sn = std::sin(2 * pi * k / ny);
      const Vec4 e1 = lift(t * c, t * sn), e2 = lift(-r * sn, r * c);
      out.emplace_back(kahler_form(s, 1, e1, e2), kahler_form(s, 2, e1, e2), kahler_form(s, 3, e1, e2));
    }
  }
  return out;
}

double torus_area(const PlaneCurve& curve) {
  const auto& z = curve.samples();
  const auto d1 = spectral_derivative(z, 1);
  std::vector<double> w(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) w[j] = std::abs(z[j]) * std::abs(d1[j]);
  return 2 * pi * pairwise_sum(w) * (2 * pi / z.size());
}

PlaneCurve redistribute_arclength(const PlaneCurve& curve) {
  const int n = curve.size();
  const TrigInterpolant interp(curve.samples());
  const int m = 16 * n;
  std::vector<double> s(m + 1, 0.0);
  double prev = std::abs(interp.eval(0.0)[1]);
  for (int k = 1; k <= m; ++k) {
    const double cur = std::abs(interp.eval(2 * pi * k / m)[1]);
    s[k] = s[k - 1] + 0.5 * (prev + cur) * (2 * pi / m);
    prev = cur;
  }
  const double length = s[m];
  std::vector<cplx> out(n);
  int k = 0;
  for (int j = 0; j < n; ++j) {
    const double target = length * j / n;
    while (k < m - 1 && s[k + 1] < target) ++k;
    const double frac = (target - s[k]) / (s[k + 1] - s[k]);
    out[j] = interp.eval(2 * pi * (k + frac) / m)[0];
  }
  return PlaneCurve(std::move(out));
}

CurveRun run_curve_flow(const PlaneCurve& initial, const CurveRunOptions& opt,
                        const std::function<void(double, const PlaneCurve&)>& on_step) {
  if (!(opt.dt > 0.0) || !(opt.t_end > 0.0)) fail(ErrorKind::InvalidArgument, "dt and t_end must be positive");
  CurveRun run;
  PlaneCurve cur = initial;
  double t = 0.0;
  run.snapshots.push_back({t, cur});
  run.history.push(t, torus_max_B(cur), torus_area(cur));
  if (on_step) on_step(t, cur);
  long step = 0;
  while (t < opt.t_end * (1 - 1e-12)) {
    double dt = std::min(opt.dt, opt.t_end - t);
    if (opt.adaptive && opt.scheme == CurveScheme::RK4) dt = std::min(dt, csf_stable_dt(cur, opt.csf));
    cur = csf_step(cur, dt, opt.scheme, opt.csf);
    ++step;
    t = (opt.t_end - t - dt <= 1e-12 * opt.t_end) ? opt.t_end : t + dt;
    if (opt.redistribute_every > 0 && step % opt.redistribute_every == 0) cur = redistribute_arclength(cur);
    const double b = torus_max_B(cur);
    run.history.push(t, b, torus_area(cur));
    if (on_step) on_step(t, cur);
    if (opt.snapshot_every > 0 && step % opt.snapshot_every == 0) run.snapshots.push_back({t, cur});
    if (b * cur.min_spacing() > opt.resolution_limit) {
      run.truncated = true;
      break;
    }
  }
  if (run.snapshots.back().t != t) run.snapshots.push_back({t, cur});
  return run;
}

FlowHistory b_norm_history(const CurveRun& run) { return run.history; }

}  // namespace hkflow
