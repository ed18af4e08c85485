#pragma once

#include "vmsns/mesh.hpp"
#include "vmsns/quadrature.hpp"

#include <Eigen/Core>

#include <array>
#include <memory>
#include <span>
#include <type_traits>
#include <vector>

namespace vmsns {

enum class Constraint { none, zero_trace, zero_mean };

/// Continuous Lagrange space of degree 1 or 2 on a simplicial mesh.
///
/// Nodes are mesh vertices followed (for degree 2) by edge midpoints. Under
/// zero_trace the boundary nodes are eliminated; the remaining "free" nodes
/// are numbered consecutively. Vector spaces block their DOFs by component:
/// global dof = component * n_scalar_dofs() + free node.
///
/// zero_mean keeps every node; the mean constraint is imposed by the caller
/// (see mean_weights()).
class FeSpace {
public:
  FeSpace(std::shared_ptr<const Mesh> mesh, int degree, int components, Constraint constraint);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  int degree() const noexcept { return degree_; }
  int components() const noexcept { return components_; }
  Constraint constraint() const noexcept { return constraint_; }
  int dim() const noexcept { return mesh_->dim(); }

  int n_scalar_dofs() const noexcept { return n_free_; }
  int n_dofs() const noexcept { return n_free_ * components_; }
  int n_nodes() const noexcept { return static_cast<int>(node_points_.size()); }
  int nodes_per_cell() const noexcept { return nodes_per_cell_; }

  /// Scalar free-node index per local node of `cell`; -1 marks an eliminated node.
  std::span<const int> cell_dofs(int cell) const {
    return std::span(cell_dofs_).subspan(static_cast<size_t>(cell) * nodes_per_cell_, nodes_per_cell_);
  }
  int global_dof(int scalar_dof, int component) const { return component * n_free_ + scalar_dof; }

  /// Node of every free scalar dof.
  const std::vector<int>& free_nodes() const noexcept { return free_nodes_; }
  const Point& node_point(int node) const { return node_points_[node]; }
  /// Node -> free scalar dof or -1.
  int node_dof(int node) const { return node_dof_[node]; }

  /// Coefficients of the nodal interpolant of f (component c of f(x)).
  template <class F>
  Eigen::VectorXd interpolate(F&& f) const {
    Eigen::VectorXd out(n_dofs());
    for (int k = 0; k < n_free_; ++k) {
      const auto value = f(node_points_[free_nodes_[k]]);
      for (int c = 0; c < components_; ++c) out[global_dof(k, c)] = component_of(value, c);
    }
    return out;
  }

  /// Integrals of the scalar basis functions (only meaningful for scalar spaces).
  Eigen::VectorXd mean_weights() const;
  /// Subtracts the mean of a scalar field given by coefficients.
  Eigen::VectorXd remove_mean(const Eigen::VectorXd& coeffs) const;

private:
  template <class V>
  static double component_of(const V& v, int c) {
    if constexpr (std::is_arithmetic_v<V>) {
      return static_cast<double>(v);
    } else {
      return v[c];
    }
  }

  std::shared_ptr<const Mesh> mesh_;
  int degree_;
  int components_;
  Constraint constraint_;
  int nodes_per_cell_ = 0;
  int n_free_ = 0;
  std::vector<int> cell_dofs_;
  std::vector<int> node_dof_;
  std::vector<int> free_nodes_;
  std::vector<Point> node_points_;
};

/// Number of Lagrange nodes on a simplex.
int lagrange_nodes_per_cell(int dim, int degree);

/// Shape values at barycentric point `lambda`, local node order = vertices
/// then local edges.
void shape_values(int dim, int degree, const std::array<double, 4>& lambda, std::span<double> out);

/// Derivatives of the shape functions w.r.t. the barycentric coordinates:
/// out[i * (dim+1) + j] = d phi_i / d lambda_j.
void shape_barycentric_derivatives(int dim, int degree, const std::array<double, 4>& lambda, std::span<double> out);

/// Shape values and physical gradients tabulated on a rule, per cell.
/// Gradients are computed on the fly from the cell's barycentric gradients.
class ShapeTable {
public:
  ShapeTable(int dim, int degree, const QuadratureRule& rule);

  int n_points() const noexcept { return n_points_; }
  int n_shapes() const noexcept { return n_shapes_; }
  double value(int q, int i) const { return values_[static_cast<size_t>(q) * n_shapes_ + i]; }

  /// Physical gradient of shape i at point q on a cell with the given geometry.
  std::array<double, 3> gradient(int q, int i, const CellGeometry& g) const;

private:
  int dim_;
  int n_points_;
  int n_shapes_;
  std::vector<double> values_;
  std::vector<double> dlambda_;
};

/// Physical coordinates of a barycentric point on a cell.
Point cell_point(const Mesh& mesh, int cell, const std::array<double, 4>& lambda);

}  // namespace vmsns
