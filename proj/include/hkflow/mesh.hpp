#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "hkflow/families.hpp"

namespace hkflow {

/// Triangulated surface in R^4. Boundary flags come from topology: a vertex is
/// on the boundary when it touches an edge used by a single triangle.
struct SurfaceMesh {
  std::vector<Vec4> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<bool> boundary;

  /// Recomputes boundary flags and checks indices and triangle areas.
  /// Throws DegenerateTriangle / InvalidArgument.
  void finalize();
  std::size_t num_vertices() const { return vertices.size(); }
};

double triangle_area(const Vec4& a, const Vec4& b, const Vec4& c);
double total_area(const SurfaceMesh& mesh);
double min_edge_length(const SurfaceMesh& mesh);

/// Icosahedron refined `level` times and projected to the sphere of radius r in
/// {x4 = 0}; level 4 has 2562 vertices.
SurfaceMesh icosphere(int level, double radius = 1.0);

/// Flat square [-w, w]^2 x {0} x {0}, n x n quads split into triangles.
SurfaceMesh flat_square(int n, double half_width = 1.0);

/// Samples a family on an nu x nv grid; periodic directions are glued.
SurfaceMesh grid_mesh(const SurfaceFamily& family, int nu, int nv);

/// Mixed Voronoi areas (obtuse triangles split by halves and quarters).
std::vector<double> mixed_vertex_areas(const SurfaceMesh& mesh);

/// Symmetric cotangent stiffness matrix: L_ij = (cot a + cot b) / 2, L_ii = -sum_j L_ij.
Eigen::SparseMatrix<double> cotangent_matrix(const SurfaceMesh& mesh);

struct MeshCurvature {
  std::vector<Vec4> H;          ///< zero where not computed
  std::vector<bool> computed;   ///< false at boundary vertices
};

/// Discrete mean curvature vector (L X)_i / A_i at interior vertices.
MeshCurvature mesh_mean_curvature(const SurfaceMesh& mesh);

/// Per-vertex |B| from a least-squares quadratic fit of the two normal
/// coordinates over the 2-ring, with one tangent-plane correction pass.
std::vector<double> mesh_second_fundamental_norm(const SurfaceMesh& mesh);

/// 4-D OFF: header "4OFF", counts line, one "x1 x2 x3 x4" line per vertex and
/// "3 i j k" per face. The reader rejects vertex rows without exactly four numbers.
void write_off4(std::ostream& os, const SurfaceMesh& mesh);
SurfaceMesh read_off4(std::istream& is);
void write_off4(const std::string& path, const SurfaceMesh& mesh);
SurfaceMesh read_off4(const std::string& path);

}  // namespace hkflow
