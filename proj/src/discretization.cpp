#include "vmsns/discretization.hpp"

#include "vmsns/errors.hpp"

#include <cmath>

namespace vmsns {

Discretization::Discretization(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)),
      velocity_(mesh_, degree, mesh_->dim(), Constraint::zero_trace),
      pressure_(mesh_, degree, 1, Constraint::zero_mean),
      quadrature_(mesh_, QuadratureRule::simplex(mesh_->dim(), assembly_quadrature_order(degree))) {
  mass_ = assemble_mass(velocity_);
  stiffness_ = assemble_stiffness(velocity_);
  coupling_ = assemble_gradient_coupling(velocity_, pressure_);
  evaluation_ = evaluation_operator(velocity_, quadrature_);
  pressure_gradient_ = gradient_operator(pressure_, quadrature_);
  field_weights_ = quadrature_.field_weights(dim());
  pressure_mean_ = pressure_.mean_weights();
  mass_solver_ = std::make_shared<Eigen::SimplicialLDLT<SparseMatrix>>();
  if (velocity_.n_dofs() > 0) {
    mass_solver_->compute(mass_);
    if (mass_solver_->info() != Eigen::Success) throw SolverError("velocity mass matrix is not positive definite");
  }
}

Eigen::VectorXd Discretization::solve_mass(const Eigen::VectorXd& rhs) const {
  if (rhs.size() == 0) return rhs;
  Eigen::VectorXd x = mass_solver_->solve(rhs);
  if (mass_solver_->info() != Eigen::Success) throw SolverError("velocity mass solve failed");
  return x;
}

Eigen::VectorXd Discretization::project_to_velocity(const Eigen::VectorXd& field) const {
  return solve_mass(evaluation_.transpose() * field_weights_.cwiseProduct(field));
}

double Discretization::field_inner(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const {
  return a.dot(field_weights_.cwiseProduct(b));
}

double Discretization::field_norm(const Eigen::VectorXd& a) const { return std::sqrt(std::max(0.0, field_inner(a, a))); }

double Discretization::velocity_norm(const Eigen::VectorXd& u) const {
  return std::sqrt(std::max(0.0, u.dot(mass_ * u)));
}

}  // namespace vmsns
