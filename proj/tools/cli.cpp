#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "hkflow/curve.hpp"
#include "hkflow/families.hpp"
#include "hkflow/flow.hpp"
#include "hkflow/io.hpp"
#include "hkflow/mesh.hpp"
#include "hkflow/numeric.hpp"
#include "hkflow/phase_map.hpp"

namespace hkflow::cli {

using json = nlohmann::ordered_json;
using std::numbers::pi;
namespace fs = std::filesystem;

int exit_code_for(ErrorKind kind) noexcept {
  return (kind == ErrorKind::InvalidArgument || kind == ErrorKind::Io) ? kExitUsage : kExitNumeric;
}

namespace {

struct GlobalOptions {
  std::string out = "hkflow-out";
  unsigned threads = 1;
  std::uint64_t seed = 1;
};

struct VerifyOptions {
  std::string suite = "all";
  std::string surface;
  std::vector<std::string> params;
  int points = 50;
  int rotations = 1000;
  int degree_grid = 200;
};

struct CurveOptions {
  std::string curve = "circle";
  std::string curve_file;
  int n = 256;
  double radius = 1.0;
  double center_x = 0.0, center_y = 0.0;
  double amplitude = 0.1;
  double mode = 5.0;
  double minor = 0.5;
  double dt = 1e-4;
  double t_end = 0.24;
  std::string scheme = "rk4";
  std::string filter = "two-thirds";
  int snapshot_every = 0;
  int redistribute_every = 0;
  int log_every = 1;
  int phase_ny = 8;
  double tail = 0.4;
};

struct MeshOptions {
  std::string mesh = "icosphere";
  std::string mesh_file;
  int level = 4;
  double radius = 1.0;
  double amplitude = 0.05;
  double mode = 3.0;
  int nu = 64, nv = 32;
  double dt = 5e-4;
  double t_end = 0.2;
  std::string scheme = "semi-implicit";
  int checkpoint_every = 0;
  int log_every = 1;
};

struct AnalyzeOptions {
  std::string trajectory;
  std::string jets;
  std::vector<double> v0{0.0, 0.0, 1.0, 0.0};
  double tail = 0.4;
};

struct PhaseOptions {
  std::string surface;
  std::vector<std::string> params;
  int nu = 64, nv = 64;
};

// Formats a number for JSON so that identical inputs give identical bytes; NaN
// and infinities become null.
json number(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::Io, "cannot write " + path.string());
  os << text;
  if (!os) fail(ErrorKind::Io, "write failed for " + path.string());
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::ofstream open_out(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorKind::Io, "cannot write " + path.string());
  return os;
}

FamilyParams parse_params(const std::vector<std::string>& items) {
  FamilyParams p;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos || eq == 0) fail(ErrorKind::InvalidArgument, "expected key=value, got '" + item + "'");
    try {
      std::size_t used = 0;
      const std::string value = item.substr(eq + 1);
      p[item.substr(0, eq)] = std::stod(value, &used);
      if (used != value.size()) throw std::invalid_argument(value);
    } catch (const std::logic_error&) {
      fail(ErrorKind::InvalidArgument, "parameter '" + item + "' is not numeric");
    }
  }
  return p;
}

std::pair<double, double> random_point(const ParamDomain& d, std::mt19937_64& rng, double inset) {
  auto pick = [&](double a, double b, bool periodic) {
    const double pad = periodic ? 0.0 : inset * (b - a);
    return std::uniform_real_distribution<double>(a + pad, b - pad)(rng);
  };
  const double u = pick(d.u0, d.u1, d.periodic_u);
  const double v = pick(d.v0, d.v1, d.periodic_v);
  return {u, v};
}

Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Mat3 m;
  for (int i = 0; i < 9; ++i) m(i / 3, i % 3) = g(rng);
  Mat3 q = Eigen::HouseholderQR<Mat3>(m).householderQ();
  if (q.determinant() < 0) q.col(0) = -q.col(0);
  return q;
}

// ---------------------------------------------------------------- verify

struct Identity {
  std::string name;
  double tolerance = 0.0;
  double max_residual = 0.0;
  std::size_t samples = 0;

  void add(double r) {
    // NaN poisons the maximum so a broken evaluation can never pass.
    max_residual = (std::isnan(r) || std::isnan(max_residual)) ? std::nan("") : std::max(max_residual, r);
    ++samples;
  }
  bool pass() const { return samples > 0 && max_residual <= tolerance; }
};

class IdentityTable {
 public:
  Identity& at(const std::string& name, double tol) {
    for (auto& id : rows_)
      if (id.name == name) return id;
    rows_.push_back({name, tol});
    return rows_.back();
  }
  const std::deque<Identity>& rows() const { return rows_; }

 private:
  std::deque<Identity> rows_;  // references stay valid across push_back
};

std::vector<std::pair<std::string, SurfacePtr>> verify_families(const VerifyOptions& o, std::mt19937_64& rng) {
  if (!o.surface.empty()) return {{o.surface, make_builtin_family(o.surface, parse_params(o.params))}};
  std::vector<std::pair<std::string, SurfacePtr>> fams = {
      {"plane", make_builtin_family("plane")},
      {"cylinder", make_builtin_family("cylinder", {{"radius", std::sqrt(2.0)}})},
      {"sphere", make_builtin_family("sphere")},
      {"grim-reaper", make_builtin_family("grim-reaper")},
      {"torus-circle", make_builtin_family("torus-circle")},
      {"torus-perturbed", make_builtin_family("torus-perturbed")}};
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  for (int k = 0; k < 3; ++k) {
    FamilyParams p;
    for (const char* key : {"a1", "b1", "c1", "a2", "b2", "c2"}) p[key] = coef(rng);
    fams.emplace_back("quadratic", make_builtin_family("quadratic", p));
  }
  return fams;
}

void verify_algebra(const VerifyOptions& o, std::mt19937_64& rng, IdentityTable& table) {
  const HyperkahlerStructure s = standard_structure();
  Identity& quat = table.at("quaternionic", 1e-12);
  Identity& kahler = table.at("kahler_compatibility", 1e-12);
  Identity& compose = table.at("rotation_composition", 1e-12);
  quat.add(quaternionic_defect(s));
  std::normal_distribution<double> g;
  for (int k = 0; k < o.rotations; ++k) {
    const Mat3 a = random_rotation(rng), b = random_rotation(rng);
    const HyperkahlerStructure r = rotate(s, a);
    quat.add(quaternionic_defect(r));
    const HyperkahlerStructure lhs = rotate(r, b), rhs = rotate(s, b * a);
    double d = 0.0;
    for (int al = 1; al <= 3; ++al) d = std::max(d, (lhs.J(al) - rhs.J(al)).cwiseAbs().maxCoeff());
    compose.add(d);
    // Braced initialization fixes the draw order.
    const Vec4 u{g(rng), g(rng), g(rng), g(rng)}, v{g(rng), g(rng), g(rng), g(rng)};
    for (int al = 1; al <= 3; ++al)
      kahler.add(std::abs(kahler_form(r, al, r.J(al) * u, r.J(al) * v) - kahler_form(r, al, u, v)));
  }
}

void verify_planes(const VerifyOptions& o, std::mt19937_64& rng, IdentityTable& table) {
  const HyperkahlerStructure s = standard_structure();
  Identity& unit = table.at("unit_phase", 1e-12);
  Identity& block = table.at("tangent_block", 1e-10);
  std::normal_distribution<double> g;
  for (int k = 0; k < o.points * 20; ++k) {
    Eigen::Matrix<double, 4, 2> m;
    for (int i = 0; i < 8; ++i) m(i / 2, i % 2) = g(rng);
    const Eigen::Matrix4d q = Eigen::HouseholderQR<Eigen::Matrix<double, 4, 2>>(m).householderQ();
    const Vec4 e1 = q.col(0), e2 = q.col(1);
    Vec3 l;
    for (int a = 1; a <= 3; ++a) l[a - 1] = kahler_form(s, a, e1, e2);
    unit.add(std::abs(l.norm() - 1.0));
    block.add(tangent_block_defect(s, e1, e2));
  }
}

void verify_pointwise(const VerifyOptions& o, const std::string& suite, std::mt19937_64& rng, IdentityTable& table) {
  const HyperkahlerStructure s = standard_structure();
  const bool all = suite == "all";
  const bool phase_ids = all || suite == "phase";
  const bool energy_ids = all || suite == "energy";
  const bool curvature_ids = all || suite == "curvature";
  for (const auto& [label, fam] : verify_families(o, rng)) {
    const double h = 1e-4 * fam->parameter_scale();
    for (int k = 0; k < o.points; ++k) {
      const auto [u, v] = random_point(fam->domain(), rng, 0.05);
      const PointGeometry geo = point_geometry(fam->jet(u, v), s);
      const Mat23 fd = phase_differential_fd(*fam, u, v, s, h);
      const Mat23 shape = phase_differential_shape(s, geo);
      const PhaseSample smp = make_phase_sample(geo.frames.lambda, fd);
      const double H2 = geo.H.squaredNorm(), dJ2 = fd.squaredNorm();
      if (phase_ids) {
        table.at("phase_routes", std::max(1e-6, 10 * h * h)).add((fd - shape).cwiseAbs().maxCoeff());
        table.at("structure_equation", 1e-6).add(structure_equation_defect(s, geo, fd));
        const CurvatureForm cf = curvature_form(s, geo.frames, geo.H);
        table.at("curvature_form_complex", 1e-10).add(curvature_form_complex_defect(cf, geo.frames.lambda));
        table.at("curvature_form_phase", 1e-6).add(curvature_form_phase_defect(cf, geo.frames.lambda, fd));
      }
      if (energy_ids) {
        table.at("energy_quarter_H2", 1e-6).add(std::abs(smp.e_del - 0.25 * H2));
        table.at("energy_splitting", 1e-10)
            .add(std::max(std::abs(smp.e_del + smp.e_delbar - 0.5 * dJ2),
                          std::abs(smp.detdJ - (smp.e_del - smp.e_delbar))));
      }
      if (curvature_ids) {
        const GaussNormal gn = gauss_normal_curvatures(geo.sff);
        table.at("det_gauss_ricci", 1e-6).add(std::abs(smp.detdJ - gn.kappa - gn.kappa_perp));
        table.at("det_energy", 1e-6).add(std::abs(smp.detdJ - 0.5 * H2 + 0.5 * dJ2));
      }
    }
  }
}

void verify_degree(const VerifyOptions& o, std::mt19937_64& rng, IdentityTable& table, json& extra) {
  const HyperkahlerStructure s = standard_structure();
  for (const auto& [label, fam] : verify_families(o, rng)) {
    if (!fam->closed()) continue;
    const DegreeReport d = degree(*fam, o.degree_grid, o.degree_grid, s);
    table.at("degree_integrality", 1e-2).add(d.distance_to_integer);
    table.at("degree_formula", 1e-2).add(std::abs(2 * d.degree - d.euler_tangent - d.euler_normal));
    extra.push_back({{"surface", label},
                     {"degree", number(d.degree)},
                     {"euler_tangent", number(d.euler_tangent)},
                     {"euler_normal", number(d.euler_normal)}});
  }
}

int cmd_verify(const GlobalOptions& g, const VerifyOptions& o, std::ostream& out) {
  static const std::vector<std::string> suites = {"all", "quaternionic", "phase", "energy", "curvature", "degree"};
  if (std::find(suites.begin(), suites.end(), o.suite) == suites.end())
    fail(ErrorKind::InvalidArgument, "unknown suite '" + o.suite + "'");
  std::mt19937_64 rng(g.seed);
  IdentityTable table;
  json degrees = json::array();
  if (o.suite == "all" || o.suite == "quaternionic") verify_algebra(o, rng, table);
  if (o.suite == "all" || o.suite == "phase") verify_planes(o, rng, table);
  if (o.suite != "quaternionic" && o.suite != "degree") verify_pointwise(o, o.suite, rng, table);
  if (o.suite == "all" || o.suite == "degree") verify_degree(o, rng, table, degrees);

  json report;
  report["suite"] = o.suite;
  report["surface"] = o.surface.empty() ? json("builtin") : json(o.surface);
  report["seed"] = g.seed;
  bool ok = true;
  json ids = json::object();
  for (const Identity& id : table.rows()) {
    ids[id.name] = {{"max_residual", number(id.max_residual)},
                    {"tolerance", id.tolerance},
                    {"samples", id.samples},
                    {"pass", id.pass()}};
    ok = ok && id.pass();
  }
  report["identities"] = ids;
  if (!degrees.empty()) report["degree"] = degrees;
  report["pass"] = ok;
  write_json(fs::path(g.out) / "verify.json", report);
  out << report.dump(2) << "\n";
  return ok ? kExitOk : kExitNumeric;
}

// ------------------------------------------------------------ flow-curve

PlaneCurve initial_curve(const CurveOptions& o) {
  if (o.curve == "file") {
    std::ifstream is(o.curve_file);
    if (!is) fail(ErrorKind::Io, "cannot open curve file '" + o.curve_file + "'");
    return read_curve_csv(is);
  }
  const cplx c(o.center_x, o.center_y);
  const double r = o.radius, a = o.amplitude, m = o.mode, b = o.minor;
  std::function<cplx(double)> shape;
  if (o.curve == "circle")
    shape = [r](double x) { return std::polar(r, x); };
  else if (o.curve == "perturbed")
    shape = [r, a, m](double x) { return std::polar(r * (1.0 + a * std::cos(m * x)), x); };
  else if (o.curve == "ellipse")
    shape = [r, b](double x) { return cplx(r * std::cos(x), b * std::sin(x)); };
  else if (o.curve == "limacon")
    shape = [r](double x) { return r * (1.0 + 2.0 * std::polar(1.0, x)) * std::polar(1.0, x); };
  else if (o.curve == "figure-eight")
    shape = [r](double x) { return r * cplx(std::sin(x), std::sin(x) * std::cos(x)); };
  else
    fail(ErrorKind::InvalidArgument, "unknown curve '" + o.curve + "'");
  return PlaneCurve::sample([shape, c](double x) { return c + shape(x); }, o.n);
}

json diagnostics_json(const CurveDiagnostics& d) {
  return {{"ind_gamma", d.ind_gamma},
          {"ind_gammaprime", d.ind_gammaprime},
          {"total_turning", number(d.total_turning)},
          {"maslov_defect", number(d.maslov_defect)},
          {"ind_gamma_gammaprime", d.ind_gamma_gammaprime}};
}

std::string numbered(const std::string& stem, std::size_t k, const std::string& ext) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_%06zu", k);
  return stem + buf + ext;
}

int cmd_flow_curve(const GlobalOptions& g, const CurveOptions& o, std::ostream& out) {
  CurveRunOptions run_opt;
  run_opt.dt = o.dt;
  run_opt.t_end = o.t_end;
  if (o.scheme == "rk4")
    run_opt.scheme = CurveScheme::RK4;
  else if (o.scheme == "semi-implicit")
    run_opt.scheme = CurveScheme::SemiImplicit;
  else
    fail(ErrorKind::InvalidArgument, "unknown scheme '" + o.scheme + "'");
  if (o.filter == "two-thirds")
    run_opt.csf.filter = CurveFilter::TwoThirds;
  else if (o.filter == "exponential")
    run_opt.csf.filter = CurveFilter::Exponential;
  else if (o.filter == "none")
    run_opt.csf.filter = CurveFilter::None;
  else
    fail(ErrorKind::InvalidArgument, "unknown filter '" + o.filter + "'");
  run_opt.snapshot_every = o.snapshot_every;
  run_opt.redistribute_every = o.redistribute_every;

  const PlaneCurve start = initial_curve(o);
  const CurveDiagnostics d0 = diagnostics(start);
  const fs::path dir(g.out);
  const HyperkahlerStructure s = standard_structure();

  std::ofstream log = open_out(dir / "trajectory.jsonl");
  long step = 0;
  auto on_step = [&](double t, const PlaneCurve& c) {
    if (step++ % o.log_every != 0) return;
    const FlowStats st{torus_max_B(c), torus_max_H(c), torus_area(c)};
    const std::vector<Vec3> phases = torus_phases(c, o.phase_ny, s);
    write_trajectory_record(log, t, st, containment_margin(std::span<const Vec3>(phases)).margin);
  };
  const CurveRun run = run_curve_flow(start, run_opt, on_step);
  if (!log) fail(ErrorKind::Io, "write failed for trajectory.jsonl");

  for (std::size_t k = 0; k < run.snapshots.size(); ++k) {
    std::ofstream os = open_out(dir / numbered("curve", k, ".csv"));
    write_curve_csv(os, run.snapshots[k].curve);
  }

  json report = diagnostics_json(d0);
  report["curve"] = o.curve;
  report["n"] = o.n;
  try {
    const Type1Report t1 = type1_monitor(run.history, o.tail);
    report["T_est"] = number(t1.T_est);
    report["T_low"] = number(t1.T_low);
    report["T_high"] = number(t1.T_high);
    report["sup_rescaled"] = number(t1.sup_rescaled);
    report["type1"] = "fit";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotBlowingUp && e.kind() != ErrorKind::InsufficientHistory) throw;
    report["T_est"] = nullptr;
    report["type1"] = std::string(to_string(e.kind()));
  }
  report["steps"] = run.history.size() - 1;
  report["t_final"] = number(run.history.t.back());
  report["truncated"] = run.truncated;
  report["snapshots"] = run.snapshots.size();
  report["final"] = diagnostics_json(diagnostics(run.snapshots.back().curve));
  write_json(dir / "diagnostics.json", report);
  out << report.dump(2) << "\n";
  return kExitOk;
}

// ------------------------------------------------------------- flow-mesh

SurfaceMesh initial_mesh(const MeshOptions& o) {
  if (o.mesh == "icosphere") return icosphere(o.level, o.radius);
  if (o.mesh == "torus-circle")
    return grid_mesh(*make_builtin_family("torus-circle", {{"radius", o.radius}}), o.nu, o.nv);
  if (o.mesh == "torus-perturbed")
    return grid_mesh(*make_builtin_family("torus-perturbed", {{"amplitude", o.amplitude}, {"mode", o.mode}}), o.nu,
                     o.nv);
  if (o.mesh == "file") return read_off4(o.mesh_file);
  fail(ErrorKind::InvalidArgument, "unknown mesh '" + o.mesh + "'");
}

int cmd_flow_mesh(const GlobalOptions& g, const MeshOptions& o, std::ostream& out) {
  MeshRunOptions run_opt;
  run_opt.dt = o.dt;
  run_opt.t_end = o.t_end;
  if (o.scheme == "explicit")
    run_opt.scheme = Scheme::Explicit;
  else if (o.scheme == "semi-implicit")
    run_opt.scheme = Scheme::SemiImplicit;
  else
    fail(ErrorKind::InvalidArgument, "unknown scheme '" + o.scheme + "'");

  const fs::path dir(g.out);
  const HyperkahlerStructure s = standard_structure();
  const FlowState start = make_flow_state(initial_mesh(o));
  std::ofstream log = open_out(dir / "trajectory.jsonl");
  std::size_t step = 0, checkpoints = 0;
  auto checkpoint = [&](const FlowState& st) { write_off4((dir / numbered("mesh", checkpoints++, ".off")).string(), st.mesh); };
  auto on_step = [&](const FlowState& st) {
    if (step % o.log_every == 0) {
      const std::vector<Vec3> phases = triangle_phases(st.mesh, s);
      write_trajectory_record(log, st.t, st.stats, containment_margin(std::span<const Vec3>(phases)).margin);
    }
    if (step == 0 || (o.checkpoint_every > 0 && step % o.checkpoint_every == 0)) checkpoint(st);
    ++step;
  };
  const MeshRun run = run_mesh_flow(start, run_opt, on_step);
  if (!log) fail(ErrorKind::Io, "write failed for trajectory.jsonl");
  const std::size_t last = step - 1;
  if (!(o.checkpoint_every > 0 && last % o.checkpoint_every == 0) && last != 0) checkpoint(run.final_state);

  bool decreasing = true;
  for (std::size_t k = 1; k < run.history.size(); ++k) decreasing = decreasing && run.history.area[k] < run.history.area[k - 1];
  const FlowStats& fin = run.final_state.stats;
  json report;
  report["mesh"] = o.mesh;
  report["vertices"] = start.mesh.num_vertices();
  report["triangles"] = start.mesh.triangles.size();
  report["steps"] = run.history.size() - 1;
  report["t_final"] = number(run.final_state.t);
  report["truncated"] = run.truncated;
  report["area_strictly_decreasing"] = decreasing;
  report["checkpoints"] = checkpoints;
  report["final"] = {{"max_B", number(fin.max_B)}, {"max_H", number(fin.max_H)}, {"area", number(fin.area)}};
  if (o.mesh == "icosphere") report["radius2_final"] = number(fin.area / (4 * pi));
  write_json(dir / "summary.json", report);
  out << report.dump(2) << "\n";
  return kExitOk;
}

// --------------------------------------------------------------- analyze

int analyze_trajectory(const GlobalOptions& g, const AnalyzeOptions& o, std::ostream& out) {
  std::ifstream is(o.trajectory);
  if (!is) fail(ErrorKind::Io, "cannot open trajectory '" + o.trajectory + "'");
  FlowHistory hist;
  double min_margin = std::numeric_limits<double>::infinity();
  bool has_margin = false;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json rec = json::parse(line);
      hist.push(rec.at("t").get<double>(), rec.at("max_B").get<double>(), rec.value("area", 0.0));
      if (rec.contains("margin")) {
        min_margin = std::min(min_margin, rec.at("margin").get<double>());
        has_margin = true;
      }
    } catch (const json::exception& e) {
      fail(ErrorKind::Io, o.trajectory + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (hist.size() == 0) fail(ErrorKind::Io, "trajectory '" + o.trajectory + "' has no records");

  bool area_monotone = true;
  for (std::size_t k = 1; k < hist.size(); ++k) area_monotone = area_monotone && hist.area[k] <= hist.area[k - 1];
  json report;
  report["records"] = hist.size();
  report["t_first"] = number(hist.t.front());
  report["t_last"] = number(hist.t.back());
  report["max_B_last"] = number(hist.max_B.back());
  report["area_nonincreasing"] = area_monotone;
  report["min_margin"] = has_margin ? number(min_margin) : json(nullptr);
  report["containment_violation"] = has_margin && min_margin <= 0.0;
  try {
    const Type1Report t1 = type1_monitor(hist, o.tail);
    report["type1"] = {{"status", "fit"},
                       {"T_est", number(t1.T_est)},
                       {"T_low", number(t1.T_low)},
                       {"T_high", number(t1.T_high)},
                       {"sup_rescaled", number(t1.sup_rescaled)},
                       {"tail_begin", t1.tail_begin}};
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NotBlowingUp && e.kind() != ErrorKind::InsufficientHistory) throw;
    report["type1"] = {{"status", std::string(to_string(e.kind()))}};
  }
  write_json(fs::path(g.out) / "analysis.json", report);
  out << report.dump(2) << "\n";
  return kExitOk;
}

int analyze_jets(const GlobalOptions& g, const AnalyzeOptions& o, std::ostream& out) {
  std::ifstream is(o.jets);
  if (!is) fail(ErrorKind::Io, "cannot open jet file '" + o.jets + "'");
  const std::vector<SurfaceJet> jets = read_jet_samples_csv(is);
  if (jets.empty()) fail(ErrorKind::Io, "jet file '" + o.jets + "' has no rows");
  if (o.v0.size() != 4) fail(ErrorKind::InvalidArgument, "--v0 needs four components");
  const HyperkahlerStructure s = standard_structure();
  std::vector<SurfaceSample> samples;
  samples.reserve(jets.size());
  for (const SurfaceJet& j : jets) {
    const PointGeometry geo = point_geometry(j, s);
    samples.push_back({j.X, geo.frames, geo.H});
  }
  const Vec4 v0(o.v0[0], o.v0[1], o.v0[2], o.v0[3]);
  std::vector<Vec3> phases;
  for (const auto& smp : samples) phases.push_back(smp.frames.lambda);
  const ContainmentReport cm = containment_margin(std::span<const Vec3>(phases));
  json report;
  report["samples"] = samples.size();
  report["v0"] = o.v0;
  report["translator_residual"] = number(translator_residual(samples, v0));
  report["shrinker_residual"] = number(shrinker_residual(samples));
  report["min_margin"] = number(cm.margin);
  report["containment_violation"] = cm.violation;
  write_json(fs::path(g.out) / "analysis.json", report);
  out << report.dump(2) << "\n";
  return kExitOk;
}

int cmd_analyze(const GlobalOptions& g, const AnalyzeOptions& o, std::ostream& out) {
  if (o.trajectory.empty() == o.jets.empty())
    fail(ErrorKind::InvalidArgument, "analyze needs exactly one of --trajectory and --jets");
  return o.trajectory.empty() ? analyze_jets(g, o, out) : analyze_trajectory(g, o, out);
}

// ----------------------------------------------------------------- phase

int cmd_phase(const GlobalOptions& g, const PhaseOptions& o, std::ostream& out) {
  const SurfacePtr fam = make_builtin_family(o.surface, parse_params(o.params));
  const HyperkahlerStructure s = standard_structure();
  const auto grid = midpoint_grid(*fam, o.nu, o.nv);
  const fs::path dir(g.out);
  {
    std::ofstream os = open_out(dir / "phase_field.csv");
    write_phase_field_csv(os, *fam, grid, s);
  }
  std::vector<SurfaceJet> jets(grid.size());
  std::vector<Vec3> phases(grid.size());
  parallel_for(grid.size(), default_threads(), [&](std::size_t k) {
    jets[k] = fam->jet(grid[k].first, grid[k].second);
    phases[k] = frames(jets[k], s).lambda;
  });
  {
    std::ofstream os = open_out(dir / "jets.csv");
    write_jet_samples_csv(os, jets);
  }
  const ContainmentReport cm = containment_margin(std::span<const Vec3>(phases));
  json report;
  report["surface"] = o.surface;
  report["nu"] = o.nu;
  report["nv"] = o.nv;
  report["margin"] = number(cm.margin);
  report["violation"] = cm.violation;
  report["worst_point"] = {number(grid[cm.worst_index].first), number(grid[cm.worst_index].second)};
  if (fam->closed()) {
    const DegreeReport d = degree(*fam, o.nu, o.nv, s);
    report["degree"] = {{"degree", number(d.degree)},
                        {"distance_to_integer", number(d.distance_to_integer)},
                        {"coarse_degree", number(d.coarse_degree)},
                        {"euler_tangent", number(d.euler_tangent)},
                        {"euler_normal", number(d.euler_normal)},
                        {"area", number(d.area)}};
  }
  write_json(dir / "summary.json", report);
  out << report.dump(2) << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Hyperkahler phase map and mean curvature flow experiments", "hkflow"};
  app.config_formatter(std::make_shared<CLI::ConfigINI>());
  app.set_config("--config", "", "INI file with one [section] per subcommand");
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--out", g.out, "Output directory")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::Range(1u, 1024u))->capture_default_str();
  app.add_option("--seed", g.seed, "Seed for random sample points")->capture_default_str();

  VerifyOptions vo;
  CLI::App* verify = app.add_subcommand("verify", "Check the algebraic and differential identities");
  verify->add_option("--suite", vo.suite, "all|quaternionic|phase|energy|curvature|degree")->capture_default_str();
  verify->add_option("--surface", vo.surface, "Restrict to one builtin family");
  verify->add_option("--param", vo.params, "Family parameter key=value (repeatable)");
  verify->add_option("--points", vo.points, "Random points per family")->check(CLI::Range(1, 1000000))->capture_default_str();
  verify->add_option("--rotations", vo.rotations, "Random rotations")->check(CLI::Range(1, 1000000))->capture_default_str();
  verify->add_option("--degree-grid", vo.degree_grid, "Quadrature grid per direction")
      ->check(CLI::Range(8, 4096))
      ->capture_default_str();

  CurveOptions co;
  CLI::App* fcurve = app.add_subcommand("flow-curve", "Run the reduced flow of a curve-generated torus");
  fcurve->add_option("--curve", co.curve, "circle|perturbed|ellipse|limacon|figure-eight|file")->capture_default_str();
  fcurve->add_option("--curve-file", co.curve_file, "CSV with columns x,re,im");
  fcurve->add_option("--n", co.n, "Samples on the curve")->check(CLI::Range(16, 1 << 20))->capture_default_str();
  fcurve->add_option("--radius", co.radius, "Scale of the curve")->check(CLI::PositiveNumber)->capture_default_str();
  fcurve->add_option("--center-x", co.center_x, "Real part of the centre")->capture_default_str();
  fcurve->add_option("--center-y", co.center_y, "Imaginary part of the centre")->capture_default_str();
  fcurve->add_option("--amplitude", co.amplitude, "Perturbation amplitude")->capture_default_str();
  fcurve->add_option("--mode", co.mode, "Perturbation wavenumber")->capture_default_str();
  fcurve->add_option("--minor", co.minor, "Ellipse minor semi-axis")->check(CLI::PositiveNumber)->capture_default_str();
  fcurve->add_option("--dt", co.dt, "Maximum time step")->check(CLI::PositiveNumber)->capture_default_str();
  fcurve->add_option("--t-end", co.t_end, "Final time")->check(CLI::PositiveNumber)->capture_default_str();
  fcurve->add_option("--scheme", co.scheme, "rk4|semi-implicit")->capture_default_str();
  fcurve->add_option("--filter", co.filter, "two-thirds|exponential|none")->capture_default_str();
  fcurve->add_option("--snapshot-every", co.snapshot_every, "Steps between curve snapshots, 0 = ends only")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  fcurve->add_option("--redistribute-every", co.redistribute_every, "Steps between arclength redistributions")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  fcurve->add_option("--log-every", co.log_every, "Steps between log records")
      ->check(CLI::Range(1, 1 << 30))
      ->capture_default_str();
  fcurve->add_option("--phase-ny", co.phase_ny, "Torus circles sampled for the containment margin")
      ->check(CLI::Range(1, 4096))
      ->capture_default_str();
  fcurve->add_option("--tail", co.tail, "Tail fraction for the blow-up fit")
      ->check(CLI::Range(0.01, 1.0))
      ->capture_default_str();

  MeshOptions mo;
  CLI::App* fmesh = app.add_subcommand("flow-mesh", "Run mean curvature flow on a triangle mesh");
  fmesh->add_option("--mesh", mo.mesh, "icosphere|torus-circle|torus-perturbed|file")->capture_default_str();
  fmesh->add_option("--mesh-file", mo.mesh_file, "4OFF mesh");
  fmesh->add_option("--level", mo.level, "Icosphere refinement level")->check(CLI::Range(0, 8))->capture_default_str();
  fmesh->add_option("--radius", mo.radius, "Sphere or circle radius")->check(CLI::PositiveNumber)->capture_default_str();
  fmesh->add_option("--amplitude", mo.amplitude, "Torus perturbation amplitude")->capture_default_str();
  fmesh->add_option("--mode", mo.mode, "Torus perturbation wavenumber")->capture_default_str();
  fmesh->add_option("--nu", mo.nu, "Torus grid along the curve")->check(CLI::Range(8, 1 << 16))->capture_default_str();
  fmesh->add_option("--nv", mo.nv, "Torus grid around the circle")->check(CLI::Range(8, 1 << 16))->capture_default_str();
  fmesh->add_option("--dt", mo.dt, "Time step")->check(CLI::PositiveNumber)->capture_default_str();
  fmesh->add_option("--t-end", mo.t_end, "Duration")->check(CLI::PositiveNumber)->capture_default_str();
  fmesh->add_option("--scheme", mo.scheme, "semi-implicit|explicit")->capture_default_str();
  fmesh->add_option("--checkpoint-every", mo.checkpoint_every, "Steps between OFF checkpoints, 0 = ends only")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  fmesh->add_option("--log-every", mo.log_every, "Steps between log records")
      ->check(CLI::Range(1, 1 << 30))
      ->capture_default_str();

  AnalyzeOptions ao;
  CLI::App* analyze = app.add_subcommand("analyze", "Analyze a stored trajectory or jet sample file");
  analyze->add_option("--trajectory", ao.trajectory, "JSON-lines trajectory log");
  analyze->add_option("--jets", ao.jets, "Jet samples CSV");
  analyze->add_option("--v0", ao.v0, "Translation direction (four numbers)")->expected(4)->capture_default_str();
  analyze->add_option("--tail", ao.tail, "Tail fraction for the blow-up fit")
      ->check(CLI::Range(0.01, 1.0))
      ->capture_default_str();

  PhaseOptions po;
  CLI::App* phase_cmd = app.add_subcommand("phase", "Dump the phase field of a builtin family");
  phase_cmd->add_option("--surface", po.surface, "Builtin family")->required();
  phase_cmd->add_option("--param", po.params, "Family parameter key=value (repeatable)");
  phase_cmd->add_option("--nu", po.nu, "Grid size in u")->check(CLI::Range(2, 1 << 14))->capture_default_str();
  phase_cmd->add_option("--nv", po.nv, "Grid size in v")->check(CLI::Range(2, 1 << 14))->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    set_default_threads(g.threads);
    fs::create_directories(g.out);
    CLI::App* sub = app.get_subcommands().front();
    // The manifest is itself a valid --config file for the same run.
    std::ostringstream manifest;
    manifest << "; hkflow " << sub->get_name() << "\n"
             << "out=" << std::quoted(g.out) << "\nthreads=" << g.threads << "\nseed=" << g.seed << "\n\n["
             << sub->get_name() << "]\n"
             << sub->config_to_str(true, false);
    write_text(fs::path(g.out) / "manifest.ini", manifest.str());
    if (sub == verify) return cmd_verify(g, vo, out);
    if (sub == fcurve) return cmd_flow_curve(g, co, out);
    if (sub == fmesh) return cmd_flow_mesh(g, mo, out);
    if (sub == analyze) return cmd_analyze(g, ao, out);
    return cmd_phase(g, po, out);
  } catch (const Error& e) {
    err << "hkflow: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "hkflow: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"hkflow"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hkflow::cli
