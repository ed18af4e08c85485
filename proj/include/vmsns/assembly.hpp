#pragma once

#include "vmsns/fe_space.hpp"

#include <Eigen/Sparse>

#include <array>
#include <functional>
#include <memory>

namespace vmsns {

using SparseMatrix = Eigen::SparseMatrix<double>;
using Vec3 = std::array<double, 3>;
/// Vector-valued field of space. Scalar spaces read component 0.
using VectorField = std::function<Vec3(const Point&)>;

/// Exactness degree used for every operator built on a space of `degree`.
inline constexpr int assembly_quadrature_order(int degree) { return 2 * degree + 1; }

/// Largest relative asymmetry |A - A^T|_max / |A|_max.
double symmetry_defect(const SparseMatrix& a);

/// (phi_j, phi_i), block diagonal over components.
SparseMatrix assemble_mass(const FeSpace& space);

/// (grad phi_j, grad phi_i), block diagonal over components.
SparseMatrix assemble_stiffness(const FeSpace& space);

/// G(i, j) = (phi_i, grad psi_j) for vector phi_i in `velocity` and scalar
/// psi_j in `pressure`. G^T u realizes (u_h, grad q_h); G p realizes (grad p_h, v_h).
SparseMatrix assemble_gradient_coupling(const FeSpace& velocity, const FeSpace& pressure);

/// C(a)(i, j) = b(a, phi_j, phi_i) with the skew-symmetric convective form
/// N(a, v) = (a . grad) v + 1/2 (div a) v. `advection` holds coefficients of `space`.
SparseMatrix assemble_convection(const FeSpace& space, const Eigen::VectorXd& advection);

/// Entry i = integral of f . phi_i.
Eigen::VectorXd assemble_load(const FeSpace& space, const VectorField& f);
/// Load of a field already given by coefficients in `space` (= M c).
Eigen::VectorXd assemble_load(const FeSpace& space, const Eigen::VectorXd& coefficients);

/// L2-orthogonal projection onto the space: solves M c = load(f).
Eigen::VectorXd l2_project(const VectorField& f, const FeSpace& space);

/// Max over the domain of the pointwise (Euclidean) magnitude. Exact for
/// degree 1 (vertex max); degree 2 samples a fixed barycentric lattice per cell.
double linf_norm(const FeSpace& space, const Eigen::VectorXd& coefficients);

/// Value of a finite element function at a barycentric point of a cell.
Vec3 evaluate(const FeSpace& space, const Eigen::VectorXd& coefficients, int cell,
              const std::array<double, 4>& lambda);
/// Gradient (row c = component, column d = derivative) at a barycentric point.
std::array<Vec3, 3> evaluate_gradient(const FeSpace& space, const Eigen::VectorXd& coefficients, int cell,
                                      const std::array<double, 4>& lambda);

/// Quadrature points of a mesh with their weights |K| w_q. Fields sampled on
/// the points are flat vectors laid out as [(cell * n_qp + q) * components + c].
class QuadratureSpace {
public:
  QuadratureSpace(std::shared_ptr<const Mesh> mesh, QuadratureRule rule);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const QuadratureRule& rule() const noexcept { return rule_; }
  int n_cells() const noexcept { return mesh_->n_cells(); }
  int points_per_cell() const noexcept { return rule_.size(); }
  int n_points() const noexcept { return n_cells() * points_per_cell(); }
  int point_index(int cell, int q) const noexcept { return cell * points_per_cell() + q; }
  const Eigen::VectorXd& weights() const noexcept { return weights_; }
  const std::vector<Point>& points() const noexcept { return points_; }

  /// Per-entry weights for a field with `components` entries per point.
  Eigen::VectorXd field_weights(int components) const;
  /// Weighted inner product of two fields.
  double inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b, int components) const;
  Eigen::VectorXd sample(const VectorField& f, int components) const;

private:
  std::shared_ptr<const Mesh> mesh_;
  QuadratureRule rule_;
  Eigen::VectorXd weights_;
  std::vector<Point> points_;
};

/// Point values of FE functions: (n_points * components) x n_dofs.
SparseMatrix evaluation_operator(const FeSpace& space, const QuadratureSpace& qs);
/// Gradient of a scalar FE function at the points: (n_points * dim) x n_dofs.
SparseMatrix gradient_operator(const FeSpace& scalar_space, const QuadratureSpace& qs);
/// N(a, v) evaluated at the points as a linear map of v: (n_points * dim) x n_dofs.
SparseMatrix convection_operator(const FeSpace& space, const QuadratureSpace& qs, const Eigen::VectorXd& advection);

}  // namespace vmsns
