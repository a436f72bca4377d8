#include <doctest.h>

#include <cmath>
#include <sstream>

#include "hkflow/curve.hpp"
#include "hkflow/errors.hpp"
#include "hkflow/mesh.hpp"
#include "test_util.hpp"

using namespace hkflow;

namespace {

double max_rel_H_error(const SurfaceMesh& m, double expected) {
  const MeshCurvature c = mesh_mean_curvature(m);
  double worst = 0.0;
  for (std::size_t i = 0; i < m.num_vertices(); ++i)
    if (c.computed[i]) worst = std::max(worst, std::abs(c.H[i].norm() - expected) / expected);
  return worst;
}

}  // namespace

TEST_CASE("icosphere sizes and radius") {
  CHECK(icosphere(0).num_vertices() == 12);
  CHECK(icosphere(0).triangles.size() == 20);
  const SurfaceMesh m = icosphere(4, 2.0);
  CHECK(m.num_vertices() == 2562);
  for (const Vec4& x : m.vertices) {
    CHECK(x.norm() == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(x[3] == 0.0);
  }
  for (bool b : m.boundary) CHECK_FALSE(b);
}

TEST_CASE("icosphere mean curvature is 2 within 2% and converges") {
  const SurfaceMesh m = icosphere(4);
  const MeshCurvature c = mesh_mean_curvature(m);
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    REQUIRE(c.computed[i]);
    CHECK(std::abs(c.H[i].norm() - 2.0) <= 0.04);
    CHECK(c.H[i].dot(m.vertices[i]) < 0);  // inward
  }
  const double e2 = max_rel_H_error(icosphere(2), 2.0);
  const double e3 = max_rel_H_error(icosphere(3), 2.0);
  const double e4 = max_rel_H_error(icosphere(4), 2.0);
  MESSAGE("icosphere |H| errors " << e2 << " " << e3 << " " << e4);
  CHECK(std::log2(e3 / e4) >= 1.0);
  CHECK(std::log2(e2 / e3) >= 1.0);
}

TEST_CASE("flat square interior has zero mean curvature") {
  const SurfaceMesh m = flat_square(8);
  const MeshCurvature c = mesh_mean_curvature(m);
  int interior = 0;
  for (std::size_t i = 0; i < m.num_vertices(); ++i) {
    const Vec4& x = m.vertices[i];
    const bool on_edge = std::abs(std::abs(x[0]) - 1) < 1e-12 || std::abs(std::abs(x[1]) - 1) < 1e-12;
    CHECK(m.boundary[i] == on_edge);
    CHECK(c.computed[i] == !on_edge);
    if (c.computed[i]) {
      ++interior;
      CHECK(c.H[i].norm() < 1e-10);
    }
  }
  CHECK(interior == 49);
}

TEST_CASE("unit-circle torus mesh matches the analytic |H| = 2 within 5%") {
  const PlaneCurve circle = PlaneCurve::sample([](double x) { return std::polar(1.0, x); }, 128);
  const TorusEmbedding e = embed_torus(circle, 128);
  CHECK(e.mesh.num_vertices() == 128 * 128);
  CHECK(max_rel_H_error(e.mesh, 2.0) <= 0.05);
}

TEST_CASE("mixed areas partition the total area; cotangent matrix is a symmetric Laplacian") {
  for (const SurfaceMesh& m : {icosphere(2), flat_square(5)}) {
    const auto a = mixed_vertex_areas(m);
    double sum = 0.0;
    for (double x : a) {
      CHECK(x > 0);
      sum += x;
    }
    CHECK(sum == doctest::Approx(total_area(m)).epsilon(1e-12));
    const Eigen::SparseMatrix<double> L = cotangent_matrix(m);
    const Eigen::MatrixXd d(L);
    CHECK((d - d.transpose()).cwiseAbs().maxCoeff() <= 1e-14);
    CHECK(d.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("icosphere |B| from the quadratic fit is sqrt 2") {
  const SurfaceMesh m = icosphere(4);
  for (double b : mesh_second_fundamental_norm(m)) CHECK(std::abs(b - std::sqrt(2.0)) <= 0.02);
}

TEST_CASE("triangle area in R^4") {
  CHECK(triangle_area(Vec4(0, 0, 0, 0), Vec4(1, 0, 0, 0), Vec4(0, 0, 0, 1)) == doctest::Approx(0.5));
  CHECK(triangle_area(Vec4(0, 0, 0, 0), Vec4(1, 1, 1, 1), Vec4(2, 2, 2, 2)) == doctest::Approx(0.0));
}

TEST_CASE("finalize rejects bad indices and degenerate triangles") {
  SurfaceMesh m;
  m.vertices = {Vec4(0, 0, 0, 0), Vec4(1, 0, 0, 0), Vec4(2, 0, 0, 0)};
  m.triangles = {{0, 1, 2}};
  try {
    m.finalize();
    FAIL("expected DegenerateTriangle");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateTriangle);
  }
  m.triangles = {{0, 1, 5}};
  CHECK_THROWS_AS(m.finalize(), Error);
}

TEST_CASE("grid mesh glues periodic directions") {
  const SurfacePtr torus = make_builtin_family("torus-circle");
  const SurfaceMesh m = grid_mesh(*torus, 16, 8);
  CHECK(m.num_vertices() == 128);
  CHECK(m.triangles.size() == 256);
  for (bool b : m.boundary) CHECK_FALSE(b);
  const SurfacePtr cyl = make_builtin_family("cylinder");
  const SurfaceMesh c = grid_mesh(*cyl, 16, 5);
  int boundary = 0;
  for (bool b : c.boundary) boundary += b;
  CHECK(boundary == 32);
}

TEST_CASE("OFF4 round trip is exact") {
  SurfaceMesh m = icosphere(1);
  m.vertices[0] += Vec4(0, 0, 0, 0.1234567890123456789);
  std::stringstream ss;
  write_off4(ss, m);
  const SurfaceMesh r = read_off4(ss);
  REQUIRE(r.num_vertices() == m.num_vertices());
  for (std::size_t i = 0; i < m.num_vertices(); ++i) CHECK(r.vertices[i] == m.vertices[i]);
  CHECK(r.triangles == m.triangles);
}

TEST_CASE("OFF4 reader rejects malformed input") {
  auto kind_of = [](const std::string& text) {
    std::istringstream is(text);
    try {
      read_off4(is);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::InvalidArgument;  // sentinel: nothing thrown
  };
  CHECK(kind_of("OFF\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n") == ErrorKind::Io);
  CHECK(kind_of("4OFF\n3 1 0\n0 0 0\n1 0 0 0\n0 1 0 0\n3 0 1 2\n") == ErrorKind::Io);
  CHECK(kind_of("4OFF\n3 1 0\n0 0 0 0 9\n1 0 0 0\n0 1 0 0\n3 0 1 2\n") == ErrorKind::Io);
  CHECK(kind_of("4OFF\n3 1 0\n0 0 0 0\n1 0 0 0\n0 1 0 0\n4 0 1 2 0\n") == ErrorKind::Io);
  CHECK(kind_of("4OFF\n3 1 0\n0 0 0 0\n1 0 0 0\n") == ErrorKind::Io);
  CHECK_THROWS_AS(read_off4(std::string("/nonexistent/mesh.off")), Error);
}

TEST_CASE("min edge length") {
  const SurfaceMesh m = flat_square(4, 1.0);
  CHECK(min_edge_length(m) == doctest::Approx(0.5));
}
