#pragma once

#include "vmsns/state.hpp"

#include <vector>

namespace vmsns {

struct SolveConfig {
  double dt = 0.01;
  double T = 0.1;
  double picard_tol = 1e-10;
  int picard_max = 50;
  double linear_tol = 1e-12;

  /// dt > 0, T >= 0, tolerances in (0, 1), picard_max >= 1.
  void validate() const;
};

struct StepInfo {
  int picard_iterations = 0;
  double increment = 0.0;  ///< last relative Picard increment
  double tau = 0.0;        ///< tau of the accepted iterate
  double linear_residual = 0.0;
  double divergence = 0.0;     ///< filled by run()
  double orthogonality = 0.0;  ///< filled by run()
};

/// Initial projection: finds (u_0h, u~_0, xi) with u_0h + u~_0 = u0 - grad xi at
/// the quadrature points, u~_0 orthogonal to W_h and the composite field
/// discretely divergence free. `xi` receives the multiplier when non-null.
StarState initialize(const Discretization& disc, const VectorField& u0, Eigen::VectorXd* xi = nullptr);
/// Same with u0 already sampled at the quadrature points.
StarState initialize_from_samples(const Discretization& disc, const Eigen::VectorXd& u0_samples,
                                  Eigen::VectorXd* xi = nullptr);

/// One backward-Euler step with Picard iteration. `load` is the assembled
/// forcing (f, phi_i). Without convection a single linear solve is done.
StarState step(const Discretization& disc, const StarState& state, const Eigen::VectorXd& load,
               const SolveConfig& cfg, const StabParams& params, StepInfo* info = nullptr);

/// tau used by `step` for an advection velocity (|u|_inf = 0 without convection).
double step_tau(const Discretization& disc, const Eigen::VectorXd& advection, const StabParams& params);

struct RunSpec {
  std::shared_ptr<const Discretization> disc;
  StabParams params;
  SolveConfig solve;
  VectorField initial;  ///< empty: zero initial velocity
  VectorField forcing;  ///< empty: no forcing
  int snapshot_every = 1;  ///< 0 disables snapshots after the initial one
};

struct RunResult {
  StarState initial;
  StarState final_state;
  std::vector<StarState> snapshots;  ///< initial state first
  std::vector<EnergyRecord> ledger;
  std::vector<StepInfo> steps;
  Eigen::VectorXd load;
  double dt = 0.0;
};

/// Number of steps for a final time: ceil(T / dt), ignoring roundoff in the ratio.
int step_count(double T, double dt);

/// initialize + step_count(T, dt) steps. Solver errors are rethrown with the
/// step index prepended.
RunResult run(const RunSpec& spec);

}  // namespace vmsns
