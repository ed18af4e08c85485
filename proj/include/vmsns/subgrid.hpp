#pragma once

#include "vmsns/discretization.hpp"

#include <optional>

namespace vmsns {

/// Physical and stabilization parameters of the scheme.
struct StabParams {
  double nu = 0.01;   ///< kinematic viscosity
  double C_s = 4.0;   ///< viscous constant in tau
  double C_c = 2.0;   ///< convective constant in tau
  bool convection = true;  ///< false: Stokes regime, N(., .) and its tau contribution dropped

  /// Throws ConfigError when nu <= 0, C_s <= 0 or C_c < 0.
  void validate() const;
};

/// tau = h^2 / (C_s nu + C_c h |u|_inf). Global for the whole mesh.
double compute_tau(const StabParams& params, double h, double u_linf);

/// Dynamic orthogonal subscale, stored per quadrature point of the
/// discretization (dim components per point). Kept L2-orthogonal to W_h.
struct SubscaleField {
  Eigen::VectorXd values;

  static SubscaleField zero(const Discretization& disc) {
    return {Eigen::VectorXd::Zero(disc.field_size())};
  }
  bool finite() const { return values.allFinite(); }
};

/// N(a, u) + grad p at every quadrature point; `advection` defaults to u.
/// Without convection only grad p remains.
Eigen::VectorXd residual_field(const Discretization& disc, const Eigen::VectorXd& u, const Eigen::VectorXd& p,
                               const std::optional<Eigen::VectorXd>& advection = std::nullopt,
                               bool convection = true);

/// f - pi_{W_h} f evaluated back at the quadrature points.
Eigen::VectorXd project_orthogonal(const Discretization& disc, const Eigen::VectorXd& field);

/// |pi_{W_h} u~| / max(|u~|, 1e-300).
double orthogonality_defect(const Discretization& disc, const Eigen::VectorXd& field);

/// Backward-Euler update of the subscale equation, pointwise in the
/// orthogonal complement:
///   u~_new = (u~_old / dt - pi_perp(res)) / (1/dt + 1/tau),
/// followed by a re-projection. dt = +inf gives the quasi-static subscale.
SubscaleField advance_subscale(const Discretization& disc, const SubscaleField& old, const Eigen::VectorXd& residual,
                               double tau, double dt);

struct CrossTerms {
  Eigen::VectorXd momentum;    ///< entry i: b(u_h, phi_i, u~)
  Eigen::VectorXd continuity;  ///< entry j: (u~, grad psi_j)
};

CrossTerms cross_terms(const Discretization& disc, const Eigen::VectorXd& u, const SubscaleField& tilde);

}  // namespace vmsns
