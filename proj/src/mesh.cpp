#include "hkflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "hkflow/errors.hpp"
#include "hkflow/numeric.hpp"

namespace hkflow {

namespace {

double cot_at(const Vec4& apex, const Vec4& a, const Vec4& b) {
  const Vec4 u = a - apex, v = b - apex;
  const double d = u.dot(v);
  const double c = std::sqrt(std::max(0.0, u.squaredNorm() * v.squaredNorm() - d * d));
  return d / c;
}

std::vector<std::set<int>> one_ring(const SurfaceMesh& mesh) {
  std::vector<std::set<int>> ring(mesh.vertices.size());
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      ring[t[k]].insert(t[(k + 1) % 3]);
      ring[t[k]].insert(t[(k + 2) % 3]);
    }
  return ring;
}

// Orthonormal basis of the plane spanned by the dominant directions of `offsets`.
std::pair<Vec4, Vec4> principal_plane(const std::vector<Vec4>& offsets) {
  Mat4 c = Mat4::Zero();
  for (const Vec4& d : offsets) c += d * d.transpose();
  Eigen::SelfAdjointEigenSolver<Mat4> es(c);
  return {es.eigenvectors().col(3), es.eigenvectors().col(2)};
}

// Completes (t1, t2) to an orthonormal basis of R^4.
std::pair<Vec4, Vec4> normal_complement(const Vec4& t1, const Vec4& t2) {
  Eigen::Matrix<double, 4, 2> t;
  t << t1, t2;
  const Mat4 p = Mat4::Identity() - t * t.transpose();
  Eigen::SelfAdjointEigenSolver<Mat4> es(p);
  return {es.eigenvectors().col(3), es.eigenvectors().col(2)};
}

}  // namespace

void SurfaceMesh::finalize() {
  const int n = static_cast<int>(vertices.size());
  std::map<std::pair<int, int>, int> edge_count;
  for (const auto& t : triangles) {
    for (int k = 0; k < 3; ++k)
      if (t[k] < 0 || t[k] >= n) fail(ErrorKind::InvalidArgument, "triangle index out of range");
    if (t[0] == t[1] || t[1] == t[2] || t[0] == t[2]) fail(ErrorKind::DegenerateTriangle, "repeated triangle vertex");
    const Vec4 &a = vertices[t[0]], &b = vertices[t[1]], &c = vertices[t[2]];
    const double scale = std::max({(b - a).squaredNorm(), (c - b).squaredNorm(), (a - c).squaredNorm()});
    if (!(triangle_area(a, b, c) > 1e-12 * scale)) fail(ErrorKind::DegenerateTriangle, "zero-area triangle");
    for (int k = 0; k < 3; ++k) {
      const int i = t[k], j = t[(k + 1) % 3];
      ++edge_count[{std::min(i, j), std::max(i, j)}];
    }
  }
  boundary.assign(vertices.size(), false);
  for (const auto& [e, count] : edge_count)
    if (count == 1) boundary[e.first] = boundary[e.second] = true;
}

double triangle_area(const Vec4& a, const Vec4& b, const Vec4& c) {
  const Vec4 u = b - a, v = c - a;
  const double d = u.dot(v);
  return 0.5 * std::sqrt(std::max(0.0, u.squaredNorm() * v.squaredNorm() - d * d));
}

double total_area(const SurfaceMesh& mesh) {
  std::vector<double> a;
  a.reserve(mesh.triangles.size());
  for (const auto& t : mesh.triangles)
    a.push_back(triangle_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
  return pairwise_sum(a);
}

double min_edge_length(const SurfaceMesh& mesh) {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) m = std::min(m, (mesh.vertices[t[k]] - mesh.vertices[t[(k + 1) % 3]]).norm());
  return m;
}

SurfaceMesh icosphere(int level, double radius) {
  if (level < 0) fail(ErrorKind::InvalidArgument, "icosphere level must be non-negative");
  const double p = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Eigen::Vector3d> v = {{-1, p, 0}, {1, p, 0},  {-1, -p, 0}, {1, -p, 0}, {0, -1, p},  {0, 1, p},
                                    {0, -1, -p}, {0, 1, -p}, {p, 0, -1},  {p, 0, 1},  {-p, 0, -1}, {-p, 0, 1}};
  for (auto& x : v) x.normalize();
  std::vector<std::array<int, 3>> f = {{0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
                                       {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
                                       {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
                                       {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1}};
  for (int l = 0; l < level; ++l) {
    std::map<std::pair<int, int>, int> mid;
    auto midpoint = [&](int a, int b) {
      const std::pair<int, int> key{std::min(a, b), std::max(a, b)};
      auto it = mid.find(key);
      if (it != mid.end()) return it->second;
      v.push_back((v[a] + v[b]).normalized());
      const int id = static_cast<int>(v.size()) - 1;
      mid.emplace(key, id);
      return id;
    };
    std::vector<std::array<int, 3>> next;
    next.reserve(f.size() * 4);
    for (const auto& t : f) {
      const int a = midpoint(t[0], t[1]), b = midpoint(t[1], t[2]), c = midpoint(t[2], t[0]);
      next.push_back({t[0], a, c});
      next.push_back({t[1], b, a});
      next.push_back({t[2], c, b});
      next.push_back({a, b, c});
    }
    f = std::move(next);
  }
  SurfaceMesh m;
  m.vertices.reserve(v.size());
  for (const auto& x : v) m.vertices.emplace_back(radius * x[0], radius * x[1], radius * x[2], 0.0);
  m.triangles = std::move(f);
  m.finalize();
  return m;
}

SurfaceMesh flat_square(int n, double half_width) {
  if (n < 1) fail(ErrorKind::InvalidArgument, "flat_square needs n >= 1");
  SurfaceMesh m;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j)
      m.vertices.emplace_back(-half_width + 2 * half_width * i / n, -half_width + 2 * half_width * j / n, 0.0, 0.0);
  auto id = [n](int i, int j) { return i * (n + 1) + j; };
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  m.finalize();
  return m;
}

SurfaceMesh grid_mesh(const SurfaceFamily& family, int nu, int nv) {
  if (nu < 3 || nv < 3) fail(ErrorKind::InvalidArgument, "grid_mesh needs at least 3 cells per direction");
  const ParamDomain d = family.domain();
  const int mu = d.periodic_u ? nu : nu + 1;
  const int mv = d.periodic_v ? nv : nv + 1;
  SurfaceMesh m;
  m.vertices.reserve(static_cast<std::size_t>(mu) * mv);
  for (int i = 0; i < mu; ++i)
    for (int j = 0; j < mv; ++j)
      m.vertices.push_back(family.jet(d.u0 + (d.u1 - d.u0) * i / nu, d.v0 + (d.v1 - d.v0) * j / nv).X);
  auto id = [&](int i, int j) { return (i % mu) * mv + (j % mv); };
  for (int i = 0; i < nu; ++i)
    for (int j = 0; j < nv; ++j) {
      m.triangles.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      m.triangles.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  m.finalize();
  return m;
}

std::vector<double> mixed_vertex_areas(const SurfaceMesh& mesh) {
  std::vector<double> area(mesh.vertices.size(), 0.0);
  for (const auto& t : mesh.triangles) {
    const Vec4* p[3] = {&mesh.vertices[t[0]], &mesh.vertices[t[1]], &mesh.vertices[t[2]]};
    const double a = triangle_area(*p[0], *p[1], *p[2]);
    int obtuse = -1;
    for (int k = 0; k < 3; ++k)
      if ((*p[(k + 1) % 3] - *p[k]).dot(*p[(k + 2) % 3] - *p[k]) < 0) obtuse = k;
    if (obtuse < 0) {
      for (int k = 0; k < 3; ++k) {
        const int i = (k + 1) % 3, j = (k + 2) % 3;
        // Voronoi share: |e_ij|^2 cot(angle at k) / 8 to both ends of edge ij.
        const double w = (*p[i] - *p[j]).squaredNorm() * cot_at(*p[k], *p[i], *p[j]) / 8.0;
        area[t[i]] += w;
        area[t[j]] += w;
      }
    } else {
      for (int k = 0; k < 3; ++k) area[t[k]] += (k == obtuse ? 0.5 : 0.25) * a;
    }
  }
  return area;
}

Eigen::SparseMatrix<double> cotangent_matrix(const SurfaceMesh& mesh) {
  const int n = static_cast<int>(mesh.vertices.size());
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(mesh.triangles.size() * 12);
  for (const auto& t : mesh.triangles)
    for (int k = 0; k < 3; ++k) {
      const int i = t[(k + 1) % 3], j = t[(k + 2) % 3];
      const double w = 0.5 * cot_at(mesh.vertices[t[k]], mesh.vertices[i], mesh.vertices[j]);
      trip.emplace_back(i, j, w);
      trip.emplace_back(j, i, w);
      trip.emplace_back(i, i, -w);
      trip.emplace_back(j, j, -w);
    }
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

MeshCurvature mesh_mean_curvature(const SurfaceMesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  Eigen::MatrixXd X(n, 4);
  for (std::size_t i = 0; i < n; ++i) X.row(i) = mesh.vertices[i].transpose();
  const Eigen::MatrixXd LX = cotangent_matrix(mesh) * X;
  const std::vector<double> area = mixed_vertex_areas(mesh);
  MeshCurvature mc;
  mc.H.assign(n, Vec4::Zero());
  mc.computed.assign(n, false);
  for (std::size_t i = 0; i < n; ++i) {
    if (mesh.boundary[i] || area[i] <= 0.0) continue;
    mc.H[i] = LX.row(i).transpose() / area[i];
    mc.computed[i] = true;
  }
  return mc;
}

std::vector<double> mesh_second_fundamental_norm(const SurfaceMesh& mesh) {
  const std::size_t n = mesh.vertices.size();
  const auto ring = one_ring(mesh);
  std::vector<double> out(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::set<int> two(ring[i].begin(), ring[i].end());
    for (int j : ring[i]) two.insert(ring[j].begin(), ring[j].end());
    two.erase(static_cast<int>(i));
    if (two.size() < 5) continue;
    std::vector<Vec4> off;
    off.reserve(two.size());
    for (int j : two) off.push_back(mesh.vertices[j] - mesh.vertices[i]);
    std::vector<Vec4> ring_off;
    for (int j : ring[i]) ring_off.push_back(mesh.vertices[j] - mesh.vertices[i]);
    auto [t1, t2] = principal_plane(ring_off);

    double b2 = 0.0;
    for (int pass = 0; pass < 2; ++pass) {
      const auto [n1, n2] = normal_complement(t1, t2);
      // n_a = g1 x + g2 y + A x^2 / 2 + B x y + C y^2 / 2
      Eigen::MatrixXd design(off.size(), 5);
      Eigen::MatrixXd rhs(off.size(), 2);
      for (std::size_t k = 0; k < off.size(); ++k) {
        const double x = off[k].dot(t1), y = off[k].dot(t2);
        design.row(k) << x, y, 0.5 * x * x, x * y, 0.5 * y * y;
        rhs(k, 0) = off[k].dot(n1);
        rhs(k, 1) = off[k].dot(n2);
      }
      const Eigen::MatrixXd c = design.colPivHouseholderQr().solve(rhs);
      b2 = 0.0;
      for (int a = 0; a < 2; ++a) b2 += c(2, a) * c(2, a) + 2 * c(3, a) * c(3, a) + c(4, a) * c(4, a);
      // Tilt the tangent plane by the fitted gradient and refit once.
      const Vec4 nt1 = t1 + c(0, 0) * n1 + c(0, 1) * n2;
      const Vec4 nt2 = t2 + c(1, 0) * n1 + c(1, 1) * n2;
      t1 = nt1.normalized();
      t2 = (nt2 - nt2.dot(t1) * t1).normalized();
    }
    out[i] = std::sqrt(b2);
  }
  return out;
}

void write_off4(std::ostream& os, const SurfaceMesh& mesh) {
  char buf[128];
  os << "4OFF\n" << mesh.vertices.size() << ' ' << mesh.triangles.size() << " 0\n";
  for (const Vec4& v : mesh.vertices) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", v[0], v[1], v[2], v[3]);
    os << buf;
  }
  for (const auto& t : mesh.triangles) os << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

SurfaceMesh read_off4(std::istream& is) {
  auto next_line = [&is](std::string& line) {
    while (std::getline(is, line)) {
      const auto p = line.find_first_not_of(" \t\r");
      if (p != std::string::npos && line[p] != '#') return true;
    }
    return false;
  };
  std::string line;
  if (!next_line(line) || line.rfind("4OFF", 0) != 0) fail(ErrorKind::Io, "missing 4OFF header");
  if (!next_line(line)) fail(ErrorKind::Io, "missing OFF counts");
  std::size_t nv = 0, nf = 0;
  {
    std::istringstream ss(line);
    if (!(ss >> nv >> nf)) fail(ErrorKind::Io, "malformed OFF counts");
  }
  SurfaceMesh m;
  m.vertices.reserve(nv);
  for (std::size_t i = 0; i < nv; ++i) {
    if (!next_line(line)) fail(ErrorKind::Io, "truncated vertex list");
    std::istringstream ss(line);
    std::vector<double> vals;
    double x;
    while (ss >> x) vals.push_back(x);
    if (!ss.eof() || vals.size() != 4)
      fail(ErrorKind::Io, "vertex " + std::to_string(i) + " does not have exactly four coordinates");
    m.vertices.emplace_back(vals[0], vals[1], vals[2], vals[3]);
  }
  m.triangles.reserve(nf);
  for (std::size_t i = 0; i < nf; ++i) {
    if (!next_line(line)) fail(ErrorKind::Io, "truncated face list");
    std::istringstream ss(line);
    int k = 0;
    std::array<int, 3> t{};
    if (!(ss >> k >> t[0] >> t[1] >> t[2]) || k != 3) fail(ErrorKind::Io, "only triangular faces are supported");
    m.triangles.push_back(t);
  }
  m.finalize();
  return m;
}

void write_off4(const std::string& path, const SurfaceMesh& mesh) {
  std::ofstream os(path);
  if (!os) fail(ErrorKind::Io, "cannot open " + path);
  write_off4(os, mesh);
  if (!os) fail(ErrorKind::Io, "write failed for " + path);
}

SurfaceMesh read_off4(const std::string& path) {
  std::ifstream is(path);
  if (!is) fail(ErrorKind::Io, "cannot open " + path);
  return read_off4(is);
}

}  // namespace hkflow
