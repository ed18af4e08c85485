#pragma once

#include "vmsns/state.hpp"

#include <functional>
#include <string>
#include <vector>

namespace vmsns {

/// Step ledger row. `tau` is the relaxation time of the accepted iterate.
EnergyRecord energy_ledger_entry(const Discretization& disc, const StarState& prev, const StarState& next,
                                 const Eigen::VectorXd& load, double dt, double tau, double nu);

/// Signed imbalance recomputed from the columns of two consecutive rows.
double recompute_imbalance(double ke_fe_prev, double ke_sub_prev, const EnergyRecord& row, double dt);

/// max_j |(u_h, grad psi_j) + (u~, grad psi_j)|.
double divergence_residual(const Discretization& disc, const StarState& state);

/// Sum over steps of dt (visc + sub) + final energy minus initial energy and
/// supplied work; <= 0 up to roundoff for the scheme.
double integrated_energy_excess(const std::vector<EnergyRecord>& ledger, double initial_energy, double dt);

/// 1/2 |u_h|^2 + 1/2 |u~|^2.
double total_energy(const Discretization& disc, const StarState& state);

struct AprioriBound {
  double data_bound = 0.0;    ///< 1/2|u_0h|^2 + 1/2|u~_0|^2 + nu^-1 sum dt |F|_*^2
  double ledger_total = 0.0;  ///< max_n E^n + sum_{k<=n} dt (visc/2 + sub)
  double forcing_dual = 0.0;  ///< |F|_* = sqrt(F^T K^-1 F)
};

AprioriBound apriori_bound(const Discretization& disc, const StarState& initial, const Eigen::VectorXd& load,
                           const std::vector<EnergyRecord>& ledger, double dt, double nu);

struct InterpolatedNorm {
  double r = 0.0;  ///< time exponent, +inf allowed
  double k = 0.0;  ///< space exponent
  double value = 0.0;  ///< |u_h|_{L^r(0,T; L^k)}
  double bound = 0.0;  ///< sup_t |u_h|^{1 - 2/r} (int |grad u_h|^2)^{1/r}
};

/// Exponent pairs on the scaling line: 2D (inf,2), (4,4), (3,6); 3D (inf,2), (2,6), (4,3).
std::vector<std::pair<double, double>> interpolation_pairs(int dim);

/// Mixed norms of u_h over snapshot history (trapezoid in time).
std::vector<InterpolatedNorm> interpolated_norm_report(const Discretization& disc, const std::vector<StarState>& history);

/// Spatial L^k norm of u_h (k finite), exact-enough high-order quadrature.
double velocity_lk_norm(const Discretization& disc, const Eigen::VectorXd& u, double k);

/// Smooth nonnegative space-time bump b((t - t_c)/T_w) prod_d b((x_d - c_d)/R),
/// b(s) = (1 - s^2)^3 on |s| < 1.
struct BumpTest {
  Point center{0.5, 0.5, 0.5};
  double radius = 0.25;
  double t_center = 0.1;
  double half_window = 0.08;
  int quadrature_order = 14;

  double value(const Point& x, double t, int dim) const;
  double time_derivative(const Point& x, double t, int dim) const;
  Vec3 gradient(const Point& x, double t, int dim) const;
  double laplacian(const Point& x, double t, int dim) const;
};

/// Minimum number of snapshots inside the bump window.
inline constexpr int kMinBumpSnapshots = 16;

/// Distributional pairing of the local energy inequality with the bump,
/// trapezoid in time over the snapshots. `forcing` may be empty.
double local_energy_residual(const Discretization& disc, const std::vector<StarState>& history, const BumpTest& bump,
                             double nu, const VectorField& forcing = {});

struct ExactSolution {
  VectorField velocity;
  std::function<std::array<Vec3, 3>(const Point&)> gradient;  ///< [c][d] = d u_c / d x_d
  std::function<double(const Point&)> pressure;
};

struct ErrorNorms {
  double velocity_l2 = 0.0;
  double velocity_h1 = 0.0;  ///< gradient seminorm
  double pressure_l2 = 0.0;  ///< means removed
};

ErrorNorms error_norms(const Discretization& disc, const StarState& state, const ExactSolution& exact,
                       int quadrature_order = 8);

/// Least-squares slope of log(error) against log(h).
double observed_rate(const std::vector<double>& h, const std::vector<double>& error);

}  // namespace vmsns
