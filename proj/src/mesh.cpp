#include "vmsns/mesh.hpp"

#include "vmsns/errors.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <unordered_map>

namespace vmsns {

namespace {

constexpr std::array<std::array<int, 2>, 3> kEdges2{{{0, 1}, {0, 2}, {1, 2}}};
constexpr std::array<std::array<int, 2>, 6> kEdges3{{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

double distance(const Point& a, const Point& b) {
  double s = 0.0;
  for (int d = 0; d < 3; ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
  return std::sqrt(s);
}

Point midpoint(const Point& a, const Point& b) {
  return {0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])};
}

std::int64_t edge_key(int a, int b, int nv) {
  if (a > b) std::swap(a, b);
  return static_cast<std::int64_t>(a) * nv + b;
}

void orient_positive(int dim, const std::vector<Point>& vertices, Cell& cell) {
  std::array<Point, 4> corners{};
  for (int i = 0; i <= dim; ++i) corners[i] = vertices[cell[i]];
  if (compute_geometry(dim, std::span(corners.data(), dim + 1)).signed_volume < 0.0) {
    std::swap(cell[dim - 1], cell[dim]);
  }
}

}  // namespace

std::span<const std::array<int, 2>> local_edges(int dim) {
  if (dim == 2) return kEdges2;
  return kEdges3;
}

CellGeometry compute_geometry(int dim, std::span<const Point> corners) {
  CellGeometry g;
  Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
  for (int c = 0; c < dim; ++c)
    for (int r = 0; r < dim; ++r) jac(r, c) = corners[c + 1][r] - corners[0][r];

  const double det = jac.topLeftCorner(dim, dim).determinant();
  const double factorial = dim == 2 ? 2.0 : 6.0;
  g.signed_volume = det / factorial;
  g.volume = std::abs(g.signed_volume);

  for (int i = 0; i <= dim; ++i)
    for (int j = i + 1; j <= dim; ++j) g.diameter = std::max(g.diameter, distance(corners[i], corners[j]));

  double facet_measure = 0.0;
  if (dim == 2) {
    for (const auto& e : kEdges2) facet_measure += distance(corners[e[0]], corners[e[1]]);
  } else {
    for (int skip = 0; skip < 4; ++skip) {
      std::array<Eigen::Vector3d, 3> p;
      int k = 0;
      for (int i = 0; i < 4; ++i)
        if (i != skip) p[k++] = Eigen::Vector3d(corners[i][0], corners[i][1], corners[i][2]);
      facet_measure += 0.5 * (p[1] - p[0]).cross(p[2] - p[0]).norm();
    }
  }
  g.inradius = facet_measure > 0.0 ? dim * g.volume / facet_measure : 0.0;

  const double scale = std::pow(std::max(g.diameter, std::numeric_limits<double>::min()), dim);
  if (std::abs(det) > 1e-14 * scale) {
    Eigen::MatrixXd inv = jac.topLeftCorner(dim, dim).inverse();
    for (int i = 1; i <= dim; ++i)
      for (int d = 0; d < dim; ++d) g.grad_lambda[i][d] = inv(i - 1, d);
    for (int d = 0; d < dim; ++d) {
      double s = 0.0;
      for (int i = 1; i <= dim; ++i) s += g.grad_lambda[i][d];
      g.grad_lambda[0][d] = -s;
    }
  }
  return g;
}

Mesh Mesh::structured(int dim, int n, const Box& box) {
  if (dim != 2 && dim != 3) throw ConfigError("mesh.dim must be 2 or 3, got " + std::to_string(dim));
  if (n < 1) throw ConfigError("mesh.n must be at least 1, got " + std::to_string(n));
  for (int d = 0; d < dim; ++d) {
    if (!(box.upper[d] > box.lower[d]))
      throw ConfigError("mesh.box has a nonpositive side along axis " + std::to_string(d));
  }

  Mesh m;
  m.dim_ = dim;
  const int np = n + 1;
  auto coord = [&](int d, int i) {
    return i == n ? box.upper[d] : box.lower[d] + (box.upper[d] - box.lower[d]) * i / n;
  };

  if (dim == 2) {
    m.vertices_.reserve(static_cast<size_t>(np) * np);
    for (int j = 0; j < np; ++j)
      for (int i = 0; i < np; ++i) m.vertices_.push_back({coord(0, i), coord(1, j), 0.0});
    auto vid = [np](int i, int j) { return j * np + i; };
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
        m.cells_.push_back({v00, v10, v11, -1});
        m.cells_.push_back({v00, v11, v01, -1});
      }
    }
  } else {
    m.vertices_.reserve(static_cast<size_t>(np) * np * np);
    for (int k = 0; k < np; ++k)
      for (int j = 0; j < np; ++j)
        for (int i = 0; i < np; ++i) m.vertices_.push_back({coord(0, i), coord(1, j), coord(2, k)});
    auto vid = [np](int i, int j, int k) { return (k * np + j) * np + i; };
    std::array<int, 3> perm{0, 1, 2};
    std::vector<std::array<int, 3>> perms;
    do {
      perms.push_back(perm);
    } while (std::next_permutation(perm.begin(), perm.end()));
    for (int k = 0; k < n; ++k) {
      for (int j = 0; j < n; ++j) {
        for (int i = 0; i < n; ++i) {
          for (const auto& p : perms) {
            std::array<int, 3> at{i, j, k};
            Cell c{};
            c[0] = vid(at[0], at[1], at[2]);
            for (int step = 0; step < 3; ++step) {
              ++at[p[step]];
              c[step + 1] = vid(at[0], at[1], at[2]);
            }
            orient_positive(3, m.vertices_, c);
            m.cells_.push_back(c);
          }
        }
      }
    }
  }
  m.build_topology();
  return m;
}

Mesh Mesh::from_cells(int dim, std::vector<Point> vertices, std::vector<Cell> cells) {
  if (dim != 2 && dim != 3) throw ConfigError("mesh dimension must be 2 or 3");
  for (const auto& c : cells)
    for (int i = 0; i <= dim; ++i)
      if (c[i] < 0 || c[i] >= static_cast<int>(vertices.size()))
        throw ConfigError("cell references vertex index out of range");
  Mesh m;
  m.dim_ = dim;
  m.vertices_ = std::move(vertices);
  m.cells_ = std::move(cells);
  m.build_topology();
  return m;
}

void Mesh::build_topology() {
  const int nv = n_vertices();
  const int nvc = dim_ + 1;

  bbox_.lower = {0.0, 0.0, 0.0};
  bbox_.upper = {0.0, 0.0, 0.0};
  if (nv > 0) {
    bbox_.lower = bbox_.upper = vertices_[0];
    for (const auto& v : vertices_)
      for (int d = 0; d < dim_; ++d) {
        bbox_.lower[d] = std::min(bbox_.lower[d], v[d]);
        bbox_.upper[d] = std::max(bbox_.upper[d], v[d]);
      }
  }

  geometry_.resize(cells_.size());
  h_max_ = 0.0;
  h_min_ = cells_.empty() ? 0.0 : std::numeric_limits<double>::max();
  for (size_t c = 0; c < cells_.size(); ++c) {
    std::array<Point, 4> corners{};
    for (int i = 0; i < nvc; ++i) corners[i] = vertices_[cells_[c][i]];
    geometry_[c] = compute_geometry(dim_, std::span(corners.data(), nvc));
    h_max_ = std::max(h_max_, geometry_[c].diameter);
    h_min_ = std::min(h_min_, geometry_[c].diameter);
  }

  // Edges.
  std::unordered_map<std::int64_t, int> edge_index;
  const auto ledges = local_edges(dim_);
  cell_edges_.assign(cells_.size() * ledges.size(), -1);
  for (size_t c = 0; c < cells_.size(); ++c) {
    for (size_t le = 0; le < ledges.size(); ++le) {
      int a = cells_[c][ledges[le][0]], b = cells_[c][ledges[le][1]];
      auto [it, inserted] = edge_index.try_emplace(edge_key(a, b, nv), static_cast<int>(edges_.size()));
      if (inserted) edges_.push_back({std::min(a, b), std::max(a, b)});
      cell_edges_[c * ledges.size() + le] = it->second;
    }
  }

  // Facets: sorted vertex tuples -> incident cell count.
  std::map<std::array<int, 3>, int> facet_count;
  for (const auto& cell : cells_) {
    for (int skip = 0; skip < nvc; ++skip) {
      std::array<int, 3> f{-1, -1, -1};
      int k = 0;
      for (int i = 0; i < nvc; ++i)
        if (i != skip) f[k++] = cell[i];
      std::sort(f.begin(), f.begin() + dim_);
      ++facet_count[f];
    }
  }

  boundary_vertex_.assign(nv, 0);
  boundary_edge_.assign(edges_.size(), 0);
  boundary_facets_.clear();
  facet_violations_.clear();
  for (const auto& [f, count] : facet_count) {
    if (count > 2) {
      facet_violations_.push_back("facet shared by " + std::to_string(count) + " cells");
      continue;
    }
    if (count != 1) continue;
    BoundaryFacet bf;
    bf.vertices = f;
    for (int d = 0; d < dim_ && bf.tag == 0; ++d) {
      const double tol = 1e-12 * std::max(1.0, bbox_.upper[d] - bbox_.lower[d]);
      for (int side = 0; side < 2; ++side) {
        const double plane = side == 0 ? bbox_.lower[d] : bbox_.upper[d];
        bool on = true;
        for (int i = 0; i < dim_; ++i) on = on && std::abs(vertices_[f[i]][d] - plane) <= tol;
        if (on) {
          bf.tag = 2 * d + side + 1;
          break;
        }
      }
    }
    for (int i = 0; i < dim_; ++i) boundary_vertex_[f[i]] = 1;
    for (int i = 0; i < dim_; ++i)
      for (int j = i + 1; j < dim_; ++j) boundary_edge_[edge_index.at(edge_key(f[i], f[j], nv))] = 1;
    boundary_facets_.push_back(bf);
  }
}

std::span<const int> Mesh::cell_edges(int cell) const {
  const size_t ne = static_cast<size_t>(edges_per_cell());
  return std::span(cell_edges_).subspan(static_cast<size_t>(cell) * ne, ne);
}

double Mesh::total_volume() const {
  double v = 0.0;
  for (const auto& g : geometry_) v += g.volume;
  return v;
}

std::vector<std::string> Mesh::validate() const {
  std::vector<std::string> out = facet_violations_;
  for (int c = 0; c < n_cells(); ++c) {
    const auto& g = geometry_[c];
    if (!(g.signed_volume > 1e-14 * std::pow(std::max(g.diameter, 1e-300), dim_))) {
      out.push_back("cell " + std::to_string(c) + " has nonpositive signed volume " +
                    std::to_string(g.signed_volume));
    }
  }
  return out;
}

Mesh refine_uniform(const Mesh& mesh) {
  const int dim = mesh.dim();
  const int nv = mesh.n_vertices();
  std::vector<Point> vertices = mesh.vertices();
  vertices.reserve(static_cast<size_t>(nv) + mesh.n_edges());
  for (const auto& e : mesh.edges()) vertices.push_back(midpoint(mesh.vertices()[e[0]], mesh.vertices()[e[1]]));

  std::vector<Cell> cells;
  cells.reserve(static_cast<size_t>(mesh.n_cells()) * (dim == 2 ? 4 : 8));
  const auto ledges = local_edges(dim);

  for (int c = 0; c < mesh.n_cells(); ++c) {
    const Cell& v = mesh.cells()[c];
    const auto ce = mesh.cell_edges(c);
    // mid[i][j]: vertex index of the midpoint of local edge (i, j).
    std::array<std::array<int, 4>, 4> mid{};
    for (size_t le = 0; le < ledges.size(); ++le) {
      const auto [a, b] = ledges[le];
      mid[a][b] = mid[b][a] = nv + ce[le];
    }
    std::vector<Cell> children;
    if (dim == 2) {
      children = {{v[0], mid[0][1], mid[0][2], -1},
                  {mid[0][1], v[1], mid[1][2], -1},
                  {mid[0][2], mid[1][2], v[2], -1},
                  {mid[0][1], mid[1][2], mid[0][2], -1}};
    } else {
      children = {{v[0], mid[0][1], mid[0][2], mid[0][3]},
                  {mid[0][1], v[1], mid[1][2], mid[1][3]},
                  {mid[0][2], mid[1][2], v[2], mid[2][3]},
                  {mid[0][3], mid[1][3], mid[2][3], v[3]}};
      // Inner octahedron, split along its shortest diagonal.
      const std::array<std::array<std::array<int, 2>, 2>, 3> diagonals{{
          {{{0, 1}, {2, 3}}}, {{{0, 2}, {1, 3}}}, {{{0, 3}, {1, 2}}}}};
      int best = 0;
      double best_len = std::numeric_limits<double>::max();
      for (int k = 0; k < 3; ++k) {
        const auto& d = diagonals[k];
        const double len = distance(vertices[mid[d[0][0]][d[0][1]]], vertices[mid[d[1][0]][d[1][1]]]);
        if (len < best_len - 1e-14 * len) {
          best_len = len;
          best = k;
        }
      }
      const int a = mid[diagonals[best][0][0]][diagonals[best][0][1]];
      const int b = mid[diagonals[best][1][0]][diagonals[best][1][1]];
      // Equator: the remaining two diagonals' endpoints, ordered so that
      // opposite (disjoint) pairs sit two apart.
      const auto& d1 = diagonals[(best + 1) % 3];
      const auto& d2 = diagonals[(best + 2) % 3];
      const std::array<int, 4> ring{mid[d1[0][0]][d1[0][1]], mid[d2[0][0]][d2[0][1]],
                                    mid[d1[1][0]][d1[1][1]], mid[d2[1][0]][d2[1][1]]};
      for (int k = 0; k < 4; ++k) children.push_back({a, b, ring[k], ring[(k + 1) % 4]});
    }
    for (auto& child : children) {
      orient_positive(dim, vertices, child);
      cells.push_back(child);
    }
  }
  return Mesh::from_cells(dim, std::move(vertices), std::move(cells));
}

QualityReport mesh_quality(const Mesh& mesh, double quasi_uniformity_bound) {
  QualityReport r;
  r.h_max = mesh.h_max();
  r.h_min = mesh.h_min();
  r.min_shape_ratio = std::numeric_limits<double>::max();
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const auto& g = mesh.geometry(c);
    const double ratio = g.diameter > 0.0 ? g.inradius / g.diameter : 0.0;
    r.min_shape_ratio = std::min(r.min_shape_ratio, ratio);
  }
  if (mesh.n_cells() == 0) r.min_shape_ratio = 0.0;
  r.quasi_uniformity = r.h_min > 0.0 ? r.h_max / r.h_min : std::numeric_limits<double>::infinity();
  r.violations = mesh.validate();
  if (!(r.quasi_uniformity <= quasi_uniformity_bound)) {
    r.violations.push_back("quasi-uniformity ratio " + std::to_string(r.quasi_uniformity) + " exceeds bound " +
                           std::to_string(quasi_uniformity_bound));
  }
  return r;
}

}  // namespace vmsns
