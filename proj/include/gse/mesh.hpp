#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <string>
#include <vector>

namespace gse {

enum class CellKind { Tri, Quad };
enum class BoundaryTag { Dirichlet, Neumann };

using TagRule = std::function<BoundaryTag(const Eigen::Vector2d& midpoint)>;

inline TagRule all_dirichlet() {
  return [](const Eigen::Vector2d&) { return BoundaryTag::Dirichlet; };
}
/// Neumann on the top side y = 1, Dirichlet elsewhere.
inline TagRule top_neumann() {
  return [](const Eigen::Vector2d& m) {
    return m.y() > 1.0 - 1e-12 ? BoundaryTag::Neumann : BoundaryTag::Dirichlet;
  };
}

/// 2D mesh of triangles or quadrilaterals with tagged boundary edges.
/// Immutable after construction; validate() enforces the structural
/// invariants (positive cell areas, exact boundary cover, nonempty
/// Dirichlet part).
struct Mesh {
  struct BEdge {
    int v0 = -1, v1 = -1;
    BoundaryTag tag = BoundaryTag::Dirichlet;
  };

  CellKind kind = CellKind::Tri;
  std::vector<Eigen::Vector2d> vertices;
  std::vector<std::array<int, 4>> cells;  // [3] == -1 for triangles
  std::vector<BEdge> boundary_edges;

  int cell_size() const { return kind == CellKind::Tri ? 3 : 4; }
  int num_vertices() const { return static_cast<int>(vertices.size()); }
  int num_cells() const { return static_cast<int>(cells.size()); }

  double cell_area(int c) const;
  Eigen::Vector2d cell_centroid(int c) const;
  double domain_area() const;

  /// Longest edge over all cells.
  double mesh_size() const;

  bool vertex_on_dirichlet(int v) const;
  /// Outward unit normal of boundary edge e (points away from the adjacent cell).
  Eigen::Vector2d edge_outward_normal(int e) const;
  double edge_length(int e) const {
    return (vertices[boundary_edges[e].v1] - vertices[boundary_edges[e].v0]).norm();
  }

  /// True when every quad cell is a parallelogram (opposite edge vectors equal
  /// within 1e-12). Required by the Hu-Washizu back-end.
  bool all_parallelograms(double tol = 1e-12) const;

  void validate() const;  // throws std::runtime_error with a diagnostic
};

/// Uniform n x n grid on the unit square; tri kind splits each square into two
/// triangles along the diagonal.
Mesh generate_unit_square(int n, CellKind kind, const TagRule& tag = all_dirichlet());

Mesh read_mesh(const std::string& path);
void write_mesh(const Mesh& mesh, const std::string& path);

/// Barycentric dual mesh: one dual volume per vertex, built cellwise from
/// (vertex, adjacent edge midpoints, cell barycenter) quadrilateral fragments.
struct DualMesh {
  struct Fragment {
    int cell = -1;
    int vertex = -1;                     // owning dual volume
    std::array<Eigen::Vector2d, 4> quad; // vertex, mid(next edge), barycenter, mid(prev edge)
    double area = 0.0;
  };

  std::vector<Fragment> fragments;      // grouped by cell
  std::vector<double> volume_area;      // per vertex
  std::vector<std::vector<int>> fragments_of_vertex;

  int num_volumes() const { return static_cast<int>(volume_area.size()); }
};

DualMesh build_dual(const Mesh& mesh);

double polygon_area(const std::vector<Eigen::Vector2d>& pts);

}  // namespace gse
