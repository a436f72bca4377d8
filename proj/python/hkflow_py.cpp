#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "cli.hpp"
#include "hkflow/curve.hpp"
#include "hkflow/errors.hpp"
#include "hkflow/families.hpp"
#include "hkflow/flow.hpp"
#include "hkflow/phase_map.hpp"

namespace py = pybind11;
using namespace hkflow;

namespace {

using Grid = std::vector<std::pair<double, double>>;
using VertexArray = Eigen::Matrix<double, Eigen::Dynamic, 4, Eigen::RowMajor>;
using FaceArray = Eigen::Matrix<int, Eigen::Dynamic, 3, Eigen::RowMajor>;

// Python-side handle; the library shares families as pointers to const.
struct Family {
  SurfacePtr ptr;
};

py::dict jet_dict(const SurfaceJet& j) {
  py::dict d;
  d["X"] = j.X;
  d["Xu"] = j.Xu;
  d["Xv"] = j.Xv;
  d["Xuu"] = j.Xuu;
  d["Xuv"] = j.Xuv;
  d["Xvv"] = j.Xvv;
  return d;
}

PlaneCurve to_curve(const std::vector<cplx>& z) { return PlaneCurve(z); }

py::dict history_dict(const FlowHistory& h) {
  py::dict d;
  d["t"] = h.t;
  d["max_B"] = h.max_B;
  d["area"] = h.area;
  return d;
}

py::dict type1_dict(const Type1Report& r) {
  py::dict d;
  d["T_est"] = r.T_est;
  d["T_low"] = r.T_low;
  d["T_high"] = r.T_high;
  d["sup_rescaled"] = r.sup_rescaled;
  d["tail_begin"] = r.tail_begin;
  return d;
}

SurfaceMesh to_mesh(const VertexArray& v, const FaceArray& f) {
  SurfaceMesh m;
  for (Eigen::Index i = 0; i < v.rows(); ++i) m.vertices.emplace_back(v.row(i).transpose());
  for (Eigen::Index i = 0; i < f.rows(); ++i) m.triangles.push_back({f(i, 0), f(i, 1), f(i, 2)});
  m.finalize();
  return m;
}

std::pair<VertexArray, FaceArray> from_mesh(const SurfaceMesh& m) {
  VertexArray v(m.vertices.size(), 4);
  FaceArray f(m.triangles.size(), 3);
  for (std::size_t i = 0; i < m.vertices.size(); ++i) v.row(i) = m.vertices[i].transpose();
  for (std::size_t i = 0; i < m.triangles.size(); ++i)
    for (int k = 0; k < 3; ++k) f(i, k) = m.triangles[i][k];
  return {v, f};
}

Scheme mesh_scheme(const std::string& s) {
  if (s == "semi-implicit") return Scheme::SemiImplicit;
  if (s == "explicit") return Scheme::Explicit;
  fail(ErrorKind::InvalidArgument, "unknown scheme '" + s + "'");
}

CurveScheme curve_scheme(const std::string& s) {
  if (s == "rk4") return CurveScheme::RK4;
  if (s == "semi-implicit") return CurveScheme::SemiImplicit;
  fail(ErrorKind::InvalidArgument, "unknown scheme '" + s + "'");
}

}  // namespace

PYBIND11_MODULE(_hkflow, m) {
  m.doc() = "Hyperkahler phase maps and mean curvature flow of surfaces in R^4";

  // Leaked on purpose: it must outlive the interpreter's module teardown.
  static auto* error = new py::exception<Error>(m, "Error");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object inst = py::handle(error->ptr())(e.what());
      inst.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(error->ptr(), inst.ptr());
    }
  });

  m.def("standard_structure", [] {
    const HyperkahlerStructure s = standard_structure();
    return std::vector<Mat4>{s.J(1), s.J(2), s.J(3)};
  }, "The three complex structures J1, J2, J3 as 4x4 arrays.");

  m.def("builtin_family_names", &builtin_family_names);

  py::class_<Family>(m, "Family")
      .def(py::init([](const std::string& name, const FamilyParams& params) {
             return Family{make_builtin_family(name, params)};
           }),
           py::arg("name"), py::arg("params") = FamilyParams{})
      .def_property_readonly("name", [](const Family& f) { return f.ptr->name(); })
      .def_property_readonly("closed", [](const Family& f) { return f.ptr->closed(); })
      .def_property_readonly("domain",
                             [](const Family& f) {
                               const ParamDomain d = f.ptr->domain();
                               return py::make_tuple(d.u0, d.u1, d.v0, d.v1, d.periodic_u, d.periodic_v);
                             })
      .def("jet", [](const Family& f, double u, double v) { return jet_dict(f.ptr->jet(u, v)); })
      .def(
          "midpoint_grid", [](const Family& f, int nu, int nv) { return midpoint_grid(*f.ptr, nu, nv); },
          py::arg("nu"), py::arg("nv"));

  m.def(
      "phase",
      [](const Family& f, double u, double v) {
        const PhaseDifferential pd = phase_differential(*f.ptr, u, v, standard_structure());
        py::dict d;
        d["lambda"] = pd.sample.lambda;
        d["dJ"] = pd.sample.dJ;
        d["e_del"] = pd.sample.e_del;
        d["e_delbar"] = pd.sample.e_delbar;
        d["detdJ"] = pd.sample.detdJ;
        d["H"] = pd.geometry.H;
        d["margin"] = distance_to_forbidden(pd.sample.lambda);
        d["route_gap"] = pd.route_gap;
        return d;
      },
      py::arg("family"), py::arg("u"), py::arg("v"),
      "Phase, its differential and the energy split at one parameter point.");

  m.def(
      "degree",
      [](const Family& f, int nu, int nv) {
        DegreeReport r;
        {
          py::gil_scoped_release release;
          r = degree(*f.ptr, nu, nv, standard_structure());
        }
        py::dict d;
        d["degree"] = r.degree;
        d["distance_to_integer"] = r.distance_to_integer;
        d["coarse_degree"] = r.coarse_degree;
        d["euler_tangent"] = r.euler_tangent;
        d["euler_normal"] = r.euler_normal;
        d["area"] = r.area;
        return d;
      },
      py::arg("family"), py::arg("nu") = 200, py::arg("nv") = 200);

  m.def(
      "translator_residual",
      [](const Family& f, const Vec4& v0, int nu, int nv) {
        const Grid g = midpoint_grid(*f.ptr, nu, nv, 0.05);
        return translator_residual(sample_surface(*f.ptr, g, standard_structure()), v0);
      },
      py::arg("family"), py::arg("v0"), py::arg("nu") = 12, py::arg("nv") = 12);

  m.def(
      "shrinker_residual",
      [](const Family& f, int nu, int nv) {
        const Grid g = midpoint_grid(*f.ptr, nu, nv, 0.05);
        return shrinker_residual(sample_surface(*f.ptr, g, standard_structure()));
      },
      py::arg("family"), py::arg("nu") = 12, py::arg("nv") = 12);

  m.def(
      "curve_diagnostics",
      [](const std::vector<cplx>& z) {
        const CurveDiagnostics c = diagnostics(to_curve(z));
        py::dict d;
        d["ind_gamma"] = c.ind_gamma;
        d["ind_gammaprime"] = c.ind_gammaprime;
        d["total_turning"] = c.total_turning;
        d["maslov_defect"] = c.maslov_defect;
        d["ind_gamma_gammaprime"] = c.ind_gamma_gammaprime;
        return d;
      },
      py::arg("samples"), "Winding data of a closed curve given by equally spaced complex samples.");

  m.def(
      "winding_number", [](const std::vector<cplx>& z, cplx p) { return winding_number(to_curve(z), p); },
      py::arg("samples"), py::arg("point") = cplx(0.0));

  m.def(
      "curve_flow",
      [](const std::vector<cplx>& z, double t_end, double dt, const std::string& scheme) {
        CurveRunOptions opt;
        opt.t_end = t_end;
        opt.dt = dt;
        opt.scheme = curve_scheme(scheme);
        const PlaneCurve start = to_curve(z);
        CurveRun run;
        {
          py::gil_scoped_release release;
          run = run_curve_flow(start, opt);
        }
        py::dict d = history_dict(run.history);
        d["final"] = run.snapshots.back().curve.samples();
        d["truncated"] = run.truncated;
        return d;
      },
      py::arg("samples"), py::arg("t_end") = 0.2, py::arg("dt") = 1e-4, py::arg("scheme") = "rk4",
      "Reduced flow of the curve generating a torus; returns the torus |B| and area history.");

  m.def(
      "type1_fit",
      [](const std::vector<double>& t, const std::vector<double>& b, double tail) {
        if (t.size() != b.size()) fail(ErrorKind::InvalidArgument, "t and max_B differ in length");
        FlowHistory h;
        for (std::size_t k = 0; k < t.size(); ++k) h.push(t[k], b[k], 0.0);
        return type1_dict(type1_monitor(h, tail));
      },
      py::arg("t"), py::arg("max_B"), py::arg("tail") = 0.4);

  m.def(
      "icosphere", [](int level, double radius) { return from_mesh(icosphere(level, radius)); }, py::arg("level"),
      py::arg("radius") = 1.0, "Vertices (n x 4) and triangles (m x 3) of a subdivided icosahedron in R^3 x {0}.");

  m.def(
      "mesh_flow",
      [](const VertexArray& v, const FaceArray& f, double dt, double t_end, const std::string& scheme) {
        MeshRunOptions opt;
        opt.dt = dt;
        opt.t_end = t_end;
        opt.scheme = mesh_scheme(scheme);
        const FlowState start = make_flow_state(to_mesh(v, f));
        MeshRun run;
        {
          py::gil_scoped_release release;
          run = run_mesh_flow(start, opt);
        }
        py::dict d = history_dict(run.history);
        d["vertices"] = from_mesh(run.final_state.mesh).first;
        d["truncated"] = run.truncated;
        return d;
      },
      py::arg("vertices"), py::arg("triangles"), py::arg("dt") = 1e-3, py::arg("t_end") = 0.1,
      py::arg("scheme") = "semi-implicit");

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run_cli(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the command-line tool in-process; returns (exit_code, stdout, stderr).");
}
