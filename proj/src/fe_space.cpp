#include "vmsns/fe_space.hpp"

#include "vmsns/errors.hpp"

namespace vmsns {

int lagrange_nodes_per_cell(int dim, int degree) {
  const int nv = dim + 1;
  const int ne = dim == 2 ? 3 : 6;
  return degree == 1 ? nv : nv + ne;
}

FeSpace::FeSpace(std::shared_ptr<const Mesh> mesh, int degree, int components, Constraint constraint)
    : mesh_(std::move(mesh)), degree_(degree), components_(components), constraint_(constraint) {
  if (!mesh_) throw ConfigError("FeSpace requires a mesh");
  if (degree_ < 1 || degree_ > 2)
    throw ConfigError("unsupported polynomial degree " + std::to_string(degree_) + " (supported: 1, 2)");
  if (components_ != 1 && components_ != mesh_->dim())
    throw ConfigError("components must be 1 or the mesh dimension");

  const Mesh& m = *mesh_;
  const int nv = m.n_vertices();
  const int n_nodes = degree_ == 1 ? nv : nv + m.n_edges();
  nodes_per_cell_ = lagrange_nodes_per_cell(m.dim(), degree_);

  node_points_ = m.vertices();
  if (degree_ == 2) {
    for (const auto& e : m.edges()) {
      const auto& a = m.vertices()[e[0]];
      const auto& b = m.vertices()[e[1]];
      node_points_.push_back({0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])});
    }
  }

  node_dof_.assign(n_nodes, -1);
  for (int node = 0; node < n_nodes; ++node) {
    bool eliminated = false;
    if (constraint_ == Constraint::zero_trace) {
      eliminated = node < nv ? m.vertex_on_boundary(node) : m.edge_on_boundary(node - nv);
    }
    if (!eliminated) {
      node_dof_[node] = n_free_++;
      free_nodes_.push_back(node);
    }
  }

  cell_dofs_.assign(static_cast<size_t>(m.n_cells()) * nodes_per_cell_, -1);
  for (int c = 0; c < m.n_cells(); ++c) {
    auto* out = cell_dofs_.data() + static_cast<size_t>(c) * nodes_per_cell_;
    for (int i = 0; i <= m.dim(); ++i) out[i] = node_dof_[m.cells()[c][i]];
    if (degree_ == 2) {
      const auto ce = m.cell_edges(c);
      for (size_t le = 0; le < ce.size(); ++le) out[m.dim() + 1 + le] = node_dof_[nv + ce[le]];
    }
  }
}

Eigen::VectorXd FeSpace::mean_weights() const {
  const Mesh& m = *mesh_;
  const auto rule = QuadratureRule::simplex(m.dim(), degree_);
  ShapeTable table(m.dim(), degree_, rule);
  Eigen::VectorXd w = Eigen::VectorXd::Zero(n_scalar_dofs());
  for (int c = 0; c < m.n_cells(); ++c) {
    const double vol = m.geometry(c).volume;
    const auto dofs = cell_dofs(c);
    for (int q = 0; q < rule.size(); ++q)
      for (int i = 0; i < nodes_per_cell_; ++i)
        if (dofs[i] >= 0) w[dofs[i]] += rule.weights[q] * vol * table.value(q, i);
  }
  return w;
}

Eigen::VectorXd FeSpace::remove_mean(const Eigen::VectorXd& coeffs) const {
  if (components_ != 1) throw DimensionError("remove_mean expects a scalar space");
  if (constraint_ == Constraint::zero_trace)
    throw ConfigError("remove_mean is undefined on a zero-trace space");
  const Eigen::VectorXd w = mean_weights();
  const double mean = w.dot(coeffs) / w.sum();
  return coeffs - Eigen::VectorXd::Constant(coeffs.size(), mean);
}

void shape_values(int dim, int degree, const std::array<double, 4>& l, std::span<double> out) {
  const int nv = dim + 1;
  if (degree == 1) {
    for (int i = 0; i < nv; ++i) out[i] = l[i];
    return;
  }
  for (int i = 0; i < nv; ++i) out[i] = l[i] * (2.0 * l[i] - 1.0);
  const auto edges = local_edges(dim);
  for (size_t e = 0; e < edges.size(); ++e) out[nv + e] = 4.0 * l[edges[e][0]] * l[edges[e][1]];
}

void shape_barycentric_derivatives(int dim, int degree, const std::array<double, 4>& l, std::span<double> out) {
  const int nv = dim + 1;
  const int ns = lagrange_nodes_per_cell(dim, degree);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(ns) * nv, 0.0);
  if (degree == 1) {
    for (int i = 0; i < nv; ++i) out[i * nv + i] = 1.0;
    return;
  }
  for (int i = 0; i < nv; ++i) out[i * nv + i] = 4.0 * l[i] - 1.0;
  const auto edges = local_edges(dim);
  for (size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    out[(nv + e) * nv + a] = 4.0 * l[b];
    out[(nv + e) * nv + b] = 4.0 * l[a];
  }
}

ShapeTable::ShapeTable(int dim, int degree, const QuadratureRule& rule)
    : dim_(dim), n_points_(rule.size()), n_shapes_(lagrange_nodes_per_cell(dim, degree)) {
  const int nv = dim + 1;
  values_.resize(static_cast<size_t>(n_points_) * n_shapes_);
  dlambda_.resize(static_cast<size_t>(n_points_) * n_shapes_ * nv);
  for (int q = 0; q < n_points_; ++q) {
    shape_values(dim, degree, rule.points[q], std::span(values_).subspan(static_cast<size_t>(q) * n_shapes_));
    shape_barycentric_derivatives(dim, degree, rule.points[q],
                                  std::span(dlambda_).subspan(static_cast<size_t>(q) * n_shapes_ * nv));
  }
}

std::array<double, 3> ShapeTable::gradient(int q, int i, const CellGeometry& g) const {
  const int nv = dim_ + 1;
  const double* d = dlambda_.data() + (static_cast<size_t>(q) * n_shapes_ + i) * nv;
  std::array<double, 3> out{0.0, 0.0, 0.0};
  for (int j = 0; j < nv; ++j) {
    if (d[j] == 0.0) continue;
    for (int k = 0; k < dim_; ++k) out[k] += d[j] * g.grad_lambda[j][k];
  }
  return out;
}

Point cell_point(const Mesh& mesh, int cell, const std::array<double, 4>& lambda) {
  Point x{0.0, 0.0, 0.0};
  for (int i = 0; i <= mesh.dim(); ++i) {
    const auto& v = mesh.vertices()[mesh.cells()[cell][i]];
    for (int d = 0; d < 3; ++d) x[d] += lambda[i] * v[d];
  }
  return x;
}

}  // namespace vmsns
