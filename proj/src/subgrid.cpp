#include "vmsns/subgrid.hpp"

#include "vmsns/errors.hpp"

#include <cmath>
#include <limits>

namespace vmsns {

void StabParams::validate() const {
  std::vector<std::string> errors;
  if (!(nu > 0.0) || !std::isfinite(nu)) errors.push_back("physics.nu must be positive");
  if (!(C_s > 0.0) || !std::isfinite(C_s)) errors.push_back("stab.C_s must be positive");
  if (!(C_c >= 0.0) || !std::isfinite(C_c)) errors.push_back("stab.C_c must be nonnegative");
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

double compute_tau(const StabParams& params, double h, double u_linf) {
  if (!(h > 0.0)) throw ConfigError("mesh size h must be positive");
  if (!(u_linf >= 0.0)) throw ConfigError("velocity bound must be nonnegative");
  return h * h / (params.C_s * params.nu + params.C_c * h * u_linf);
}

Eigen::VectorXd residual_field(const Discretization& disc, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                               const std::optional<Eigen::VectorXd>& advection, bool convection) {
  Eigen::VectorXd res = disc.pressure_gradient() * p;
  if (convection) {
    const SparseMatrix n = convection_operator(disc.velocity(), disc.quadrature(), advection ? *advection : u);
    res += n * u;
  }
  return res;
}

Eigen::VectorXd project_orthogonal(const Discretization& disc, const Eigen::VectorXd& field) {
  if (field.size() != disc.field_size()) throw DimensionError("quadrature field has the wrong size");
  return field - disc.evaluation() * disc.project_to_velocity(field);
}

double orthogonality_defect(const Discretization& disc, const Eigen::VectorXd& field) {
  const Eigen::VectorXd c = disc.project_to_velocity(field);
  const double along = disc.velocity_norm(c);
  return along / std::max(disc.field_norm(field), 1e-300);
}

SubscaleField advance_subscale(const Discretization& disc, const SubscaleField& old, const Eigen::VectorXd& residual,
                               double tau, double dt) {
  if (!(tau > 0.0)) throw ConfigError("tau must be positive");
  if (!(dt > 0.0)) throw ConfigError("time step must be positive");
  const double inv_dt = std::isinf(dt) ? 0.0 : 1.0 / dt;
  const double gamma = 1.0 / (inv_dt + 1.0 / tau);
  Eigen::VectorXd next = gamma * (inv_dt * old.values - project_orthogonal(disc, residual));
  return {project_orthogonal(disc, next)};
}

CrossTerms cross_terms(const Discretization& disc, const Eigen::VectorXd& u, const SubscaleField& tilde) {
  const Eigen::VectorXd weighted = disc.field_weights().cwiseProduct(tilde.values);
  const SparseMatrix n = convection_operator(disc.velocity(), disc.quadrature(), u);
  return {n.transpose() * weighted, disc.pressure_gradient().transpose() * weighted};
}

}  // namespace vmsns
