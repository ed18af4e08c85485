#pragma once

#include "vmsns/subgrid.hpp"

namespace vmsns {

/// Composite unknown u_* = u_h + u~ together with the pressure.
struct StarState {
  Eigen::VectorXd u;
  Eigen::VectorXd p;
  SubscaleField tilde;
  double t = 0.0;

  static StarState zero(const Discretization& disc) {
    return {Eigen::VectorXd::Zero(disc.n_velocity()), Eigen::VectorXd::Zero(disc.n_pressure()),
            SubscaleField::zero(disc), 0.0};
  }
};

/// One row of the energy ledger.
struct EnergyRecord {
  double t = 0.0;
  double ke_fe = 0.0;       ///< 1/2 |u_h|^2
  double ke_sub = 0.0;      ///< 1/2 |u~|^2
  double visc_diss = 0.0;   ///< nu |grad u_h|^2
  double sub_diss = 0.0;    ///< |u~|^2 / tau
  double power_in = 0.0;    ///< (f, u_h)
  double jump_terms = 0.0;  ///< 1/2 |du_h|^2 + 1/2 |du~|^2
  double imbalance = 0.0;   ///< LHS - RHS of the step identity
};

/// Scale used to judge an imbalance: max(ke_fe, dt visc, |dt power|, 1e-30).
inline double imbalance_scale(const EnergyRecord& r, double dt) {
  double s = 1e-30;
  s = std::max(s, r.ke_fe);
  s = std::max(s, dt * r.visc_diss);
  s = std::max(s, std::abs(dt * r.power_in));
  return s;
}

}  // namespace vmsns
