#pragma once

#include "vmsns/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <memory>

namespace vmsns {

/// Equal-order velocity/pressure pair on one mesh together with the
/// operators shared by the subgrid model, the solver and the diagnostics.
///
/// Velocity: zero-trace vector Lagrange space W_h. Pressure: scalar Lagrange
/// space Q_h of the same degree whose mean is removed through a multiplier.
/// Subscales live at the points of `quadrature()`, which integrates every
/// bilinear form of the scheme exactly for the default degree.
class Discretization {
public:
  explicit Discretization(std::shared_ptr<const Mesh> mesh, int degree = 1);

  const Mesh& mesh() const noexcept { return *mesh_; }
  const std::shared_ptr<const Mesh>& mesh_ptr() const noexcept { return mesh_; }
  int dim() const noexcept { return mesh_->dim(); }
  /// Global mesh size h = max cell diameter.
  double h() const noexcept { return mesh_->h_max(); }

  const FeSpace& velocity() const noexcept { return velocity_; }
  const FeSpace& pressure() const noexcept { return pressure_; }
  const QuadratureSpace& quadrature() const noexcept { return quadrature_; }

  const SparseMatrix& mass() const noexcept { return mass_; }
  const SparseMatrix& stiffness() const noexcept { return stiffness_; }
  /// G(i, j) = (phi_i, grad psi_j).
  const SparseMatrix& coupling() const noexcept { return coupling_; }
  /// Velocity values at the quadrature points.
  const SparseMatrix& evaluation() const noexcept { return evaluation_; }
  /// Pressure gradients at the quadrature points.
  const SparseMatrix& pressure_gradient() const noexcept { return pressure_gradient_; }
  /// Weights of a velocity-shaped quadrature field.
  const Eigen::VectorXd& field_weights() const noexcept { return field_weights_; }
  /// Integrals of the pressure basis functions.
  const Eigen::VectorXd& pressure_mean() const noexcept { return pressure_mean_; }

  int n_velocity() const noexcept { return velocity_.n_dofs(); }
  int n_pressure() const noexcept { return pressure_.n_dofs(); }
  Eigen::Index field_size() const noexcept { return field_weights_.size(); }

  Eigen::VectorXd solve_mass(const Eigen::VectorXd& rhs) const;
  /// Coefficients of the L2 projection onto W_h of a quadrature field.
  Eigen::VectorXd project_to_velocity(const Eigen::VectorXd& field) const;
  /// Weighted L2 inner product / norm of quadrature fields.
  double field_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
  double field_norm(const Eigen::VectorXd& a) const;
  /// L2 norm of a velocity coefficient vector.
  double velocity_norm(const Eigen::VectorXd& u) const;

private:
  std::shared_ptr<const Mesh> mesh_;
  FeSpace velocity_;
  FeSpace pressure_;
  QuadratureSpace quadrature_;
  SparseMatrix mass_;
  SparseMatrix stiffness_;
  SparseMatrix coupling_;
  SparseMatrix evaluation_;
  SparseMatrix pressure_gradient_;
  Eigen::VectorXd field_weights_;
  Eigen::VectorXd pressure_mean_;
  std::shared_ptr<Eigen::SimplicialLDLT<SparseMatrix>> mass_solver_;
};

}  // namespace vmsns
