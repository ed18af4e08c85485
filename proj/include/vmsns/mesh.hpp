#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

namespace vmsns {

using Point = std::array<double, 3>;
/// Simplex vertex indices; only the first dim+1 entries are meaningful.
using Cell = std::array<int, 4>;

struct Box {
  Point lower{0.0, 0.0, 0.0};
  Point upper{1.0, 1.0, 1.0};

  static Box unit() { return {}; }
};

/// Boundary facet: dim vertex indices (a segment in 2D, a triangle in 3D).
/// Tag 2*axis + side for facets lying on a face of the bounding box, 0 otherwise.
struct BoundaryFacet {
  std::array<int, 3> vertices{-1, -1, -1};
  int tag = 0;
};

/// Affine geometry of one simplex.
struct CellGeometry {
  double signed_volume = 0.0;
  double volume = 0.0;
  double diameter = 0.0;
  double inradius = 0.0;
  /// Gradients of the barycentric coordinates, grad_lambda[i][d].
  std::array<std::array<double, 3>, 4> grad_lambda{};
};

struct QualityReport {
  double h_max = 0.0;
  double h_min = 0.0;
  double min_shape_ratio = 0.0;  // min over cells of inradius / diameter
  double quasi_uniformity = 0.0; // h_max / h_min
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

/// Conforming simplicial mesh. Immutable after construction.
class Mesh {
public:
  /// Regular subdivision of a box: n^2 squares split along the (+1,+1)
  /// diagonal in 2D, n^3 cubes split into 6 Kuhn tetrahedra in 3D.
  static Mesh structured(int dim, int n, const Box& box = Box::unit());

  /// Mesh from raw arrays. Topology is derived, invariants are not enforced;
  /// call validate() or mesh_quality() to inspect them.
  static Mesh from_cells(int dim, std::vector<Point> vertices, std::vector<Cell> cells);

  int dim() const noexcept { return dim_; }
  int n_vertices() const noexcept { return static_cast<int>(vertices_.size()); }
  int n_cells() const noexcept { return static_cast<int>(cells_.size()); }
  int n_edges() const noexcept { return static_cast<int>(edges_.size()); }
  int vertices_per_cell() const noexcept { return dim_ + 1; }
  int edges_per_cell() const noexcept { return dim_ == 2 ? 3 : 6; }

  const std::vector<Point>& vertices() const noexcept { return vertices_; }
  const std::vector<Cell>& cells() const noexcept { return cells_; }
  const std::vector<BoundaryFacet>& boundary_facets() const noexcept { return boundary_facets_; }
  const std::vector<std::array<int, 2>>& edges() const noexcept { return edges_; }
  const Box& bounding_box() const noexcept { return bbox_; }

  /// Global edge indices of a cell in local order (0,1),(0,2),(1,2) in 2D and
  /// (0,1),(0,2),(0,3),(1,2),(1,3),(2,3) in 3D.
  std::span<const int> cell_edges(int cell) const;
  const CellGeometry& geometry(int cell) const { return geometry_[cell]; }

  bool vertex_on_boundary(int v) const { return boundary_vertex_[v] != 0; }
  bool edge_on_boundary(int e) const { return boundary_edge_[e] != 0; }

  double h_max() const noexcept { return h_max_; }
  double h_min() const noexcept { return h_min_; }
  double total_volume() const;

  /// Invariant violations (nonpositive volume, nonconforming facets).
  std::vector<std::string> validate() const;

private:
  Mesh() = default;
  void build_topology();

  int dim_ = 2;
  std::vector<Point> vertices_;
  std::vector<Cell> cells_;
  std::vector<BoundaryFacet> boundary_facets_;
  std::vector<std::array<int, 2>> edges_;
  std::vector<int> cell_edges_;
  std::vector<CellGeometry> geometry_;
  std::vector<char> boundary_vertex_;
  std::vector<char> boundary_edge_;
  std::vector<std::string> facet_violations_;
  Box bbox_;
  double h_max_ = 0.0;
  double h_min_ = 0.0;
};

/// Local vertex pairs of the edges of a simplex, see Mesh::cell_edges.
std::span<const std::array<int, 2>> local_edges(int dim);

/// Splits every cell into 2^dim children (red refinement in 2D, Bey's
/// octahedron split along its shortest diagonal in 3D).
Mesh refine_uniform(const Mesh& mesh);

/// Quasi-uniformity bound used when judging a mesh.
inline constexpr double kDefaultQuasiUniformityBound = 4.0;

QualityReport mesh_quality(const Mesh& mesh, double quasi_uniformity_bound = kDefaultQuasiUniformityBound);

CellGeometry compute_geometry(int dim, std::span<const Point> corners);

}  // namespace vmsns
