#include "vmsns/solver.hpp"

#include "vmsns/diagnostics.hpp"
#include "vmsns/errors.hpp"

#include <Eigen/SparseLU>

#include <cmath>

namespace vmsns {

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

void append(Triplets& out, const SparseMatrix& block, Eigen::Index row0, Eigen::Index col0, double scale = 1.0) {
  for (int k = 0; k < block.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(block, k); it; ++it)
      out.emplace_back(row0 + it.row(), col0 + it.col(), scale * it.value());
}

void append_vector(Triplets& out, const Eigen::VectorXd& v, Eigen::Index row0, Eigen::Index col, bool as_row) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] == 0.0) continue;
    if (as_row)
      out.emplace_back(col, row0 + i, v[i]);
    else
      out.emplace_back(row0 + i, col, v[i]);
  }
}

Eigen::VectorXd solve_sparse(const SparseMatrix& a, const Eigen::VectorXd& b, double tol, double* residual) {
  const double scale = b.lpNorm<Eigen::Infinity>();
  if (scale == 0.0) {
    if (residual) *residual = 0.0;
    return Eigen::VectorXd::Zero(a.cols());
  }
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(a);
  lu.factorize(a);
  if (lu.info() != Eigen::Success) throw SolverError("sparse factorization failed: " + lu.lastErrorMessage());
  Eigen::VectorXd x = lu.solve(b);
  double rel = 0.0;
  for (int pass = 0; pass < 4; ++pass) {
    if (!x.allFinite()) throw DivergenceError("non-finite values in the linear solve");
    const Eigen::VectorXd r = b - a * x;
    rel = r.lpNorm<Eigen::Infinity>() / scale;
    if (rel <= tol) break;
    x += lu.solve(r);
  }
  if (residual) *residual = rel;
  return x;
}

}  // namespace

void SolveConfig::validate() const {
  std::vector<std::string> errors;
  if (!(dt > 0.0) || !std::isfinite(dt)) errors.push_back("time.dt must be positive");
  if (!(T >= 0.0) || !std::isfinite(T)) errors.push_back("time.T must be nonnegative");
  if (!(picard_tol > 0.0 && picard_tol < 1.0)) errors.push_back("solver.picard_tol must lie in (0, 1)");
  if (picard_max < 1) errors.push_back("solver.picard_max must be at least 1");
  if (!(linear_tol > 0.0 && linear_tol < 1.0)) errors.push_back("solver.linear_tol must lie in (0, 1)");
  if (!errors.empty()) throw ConfigError(std::move(errors));
}

StarState initialize_from_samples(const Discretization& disc, const Eigen::VectorXd& u0q, Eigen::VectorXd* xi_out) {
  if (u0q.size() != disc.field_size()) throw DimensionError("initial field has the wrong size");
  const Eigen::Index np = disc.n_pressure();
  const Eigen::VectorXd& w = disc.field_weights();
  const SparseMatrix& gq = disc.pressure_gradient();

  // Neumann problem (grad xi, grad q) = (u0, grad q) with zero mean.
  const SparseMatrix wg = w.asDiagonal() * gq;
  const SparseMatrix kp = SparseMatrix(gq.transpose() * wg);
  Triplets trip;
  append(trip, kp, 0, 0);
  append_vector(trip, disc.pressure_mean(), 0, np, false);
  append_vector(trip, disc.pressure_mean(), 0, np, true);
  SparseMatrix a(np + 1, np + 1);
  a.setFromTriplets(trip.begin(), trip.end());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(np + 1);
  rhs.head(np) = wg.transpose() * u0q;
  const Eigen::VectorXd sol = solve_sparse(a, rhs, 1e-14, nullptr);
  const Eigen::VectorXd xi = sol.head(np);

  const Eigen::VectorXd corrected = u0q - gq * xi;
  StarState state;
  state.u = disc.project_to_velocity(corrected);
  state.tilde.values = corrected - disc.evaluation() * state.u;
  state.p = Eigen::VectorXd::Zero(np);
  state.t = 0.0;
  if (xi_out) *xi_out = xi;
  return state;
}

StarState initialize(const Discretization& disc, const VectorField& u0, Eigen::VectorXd* xi) {
  return initialize_from_samples(disc, disc.quadrature().sample(u0, disc.dim()), xi);
}

double step_tau(const Discretization& disc, const Eigen::VectorXd& advection, const StabParams& params) {
  const double speed = params.convection ? linf_norm(disc.velocity(), advection) : 0.0;
  return compute_tau(params, disc.h(), speed);
}

StarState step(const Discretization& disc, const StarState& state, const Eigen::VectorXd& load,
               const SolveConfig& cfg, const StabParams& params, StepInfo* info) {
  if (!(cfg.dt > 0.0)) throw ConfigError("time step must be positive");
  const Eigen::Index nv = disc.n_velocity();
  const Eigen::Index np = disc.n_pressure();
  const Eigen::Index nf = disc.field_size();
  if (state.u.size() != nv || state.p.size() != np || state.tilde.values.size() != nf)
    throw DimensionError("state does not match the discretization");
  if (load.size() != nv) throw DimensionError("load vector does not match the velocity space");
  if (!state.u.allFinite() || !state.p.allFinite() || !state.tilde.finite())
    throw DivergenceError("non-finite state entering the step");

  const double dt = cfg.dt;
  const Eigen::VectorXd& w = disc.field_weights();
  const SparseMatrix& e = disc.evaluation();
  const SparseMatrix& gq = disc.pressure_gradient();
  const SparseMatrix we = w.asDiagonal() * e;
  const SparseMatrix wg = w.asDiagonal() * gq;
  const SparseMatrix gwg = SparseMatrix(gq.transpose() * wg);
  const SparseMatrix gwe = SparseMatrix(gq.transpose() * we);
  const SparseMatrix ewg = SparseMatrix(e.transpose() * wg);
  const Eigen::VectorXd w_tilde_old = w.cwiseProduct(state.tilde.values);

  const Eigen::Index off_p = nv;
  const Eigen::Index off_z = nv + np;
  const Eigen::Index off_l = nv + np + nv;
  const Eigen::Index n = off_l + 1;

  Eigen::VectorXd advection = state.u;
  StepInfo local;
  double increment = 0.0;
  for (int k = 1; k <= cfg.picard_max; ++k) {
    const double tau = step_tau(disc, advection, params);
    const double gamma = 1.0 / (1.0 / dt + 1.0 / tau);

    SparseMatrix conv(nf, nv);
    if (params.convection) conv = convection_operator(disc.velocity(), disc.quadrature(), advection);
    const SparseMatrix wn = w.asDiagonal() * conv;
    const SparseMatrix c = SparseMatrix(e.transpose() * wn);

    Triplets trip;
    trip.reserve(static_cast<size_t>(disc.mass().nonZeros()) * 12);
    append(trip, disc.mass(), 0, 0, 1.0 / dt);
    append(trip, c, 0, 0);
    append(trip, disc.stiffness(), 0, 0, params.nu);
    append(trip, disc.coupling(), 0, off_p);
    append(trip, disc.coupling().transpose(), off_p, 0);
    append(trip, gwg, off_p, off_p, -gamma);
    append(trip, gwe, off_p, off_z, gamma);
    append(trip, disc.mass(), off_z, off_z);
    append(trip, ewg, off_z, off_p, -1.0);
    append_vector(trip, disc.pressure_mean(), off_p, off_l, false);
    append_vector(trip, disc.pressure_mean(), off_p, off_l, true);
    if (params.convection) {
      const SparseMatrix nwn = SparseMatrix(conv.transpose() * wn);
      const SparseMatrix nwg = SparseMatrix(conv.transpose() * wg);
      const SparseMatrix nwe = SparseMatrix(conv.transpose() * we);
      append(trip, nwn, 0, 0, gamma);
      append(trip, nwg, 0, off_p, gamma);
      append(trip, nwe, 0, off_z, -gamma);
      append(trip, nwg.transpose(), off_p, 0, -gamma);
      append(trip, c, off_z, 0, -1.0);
    }
    SparseMatrix a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());

    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    rhs.head(nv) = load + disc.mass() * state.u / dt;
    if (params.convection) rhs.head(nv) += (gamma / dt) * (conv.transpose() * w_tilde_old);
    rhs.segment(off_p, np) = -(gamma / dt) * (gq.transpose() * w_tilde_old);

    double linear_residual = 0.0;
    const Eigen::VectorXd x = solve_sparse(a, rhs, cfg.linear_tol, &linear_residual);

    StarState next;
    next.u = x.head(nv);
    next.p = x.segment(off_p, np);
    next.t = state.t + dt;
    Eigen::VectorXd residual = gq * next.p;
    if (params.convection) residual += conv * next.u;
    next.tilde = advance_subscale(disc, state.tilde, residual, tau, dt);
    if (!next.u.allFinite() || !next.p.allFinite() || !next.tilde.finite())
      throw DivergenceError("non-finite state after Picard iteration " + std::to_string(k));

    const double norm = disc.velocity_norm(next.u);
    const double diff = disc.velocity_norm(next.u - advection);
    increment = diff == 0.0 ? 0.0 : diff / std::max(norm, 1e-300);
    if (!std::isfinite(increment)) throw DivergenceError("non-finite Picard increment");
    local = {k, increment, tau, linear_residual};
    if (!params.convection || increment <= cfg.picard_tol) {
      if (info) *info = local;
      return next;
    }
    advection = next.u;
  }
  throw NonconvergenceError("Picard iteration did not converge in " + std::to_string(cfg.picard_max) +
                                " iterations (last increment " + std::to_string(increment) + ")",
                            increment);
}

int step_count(double T, double dt) {
  if (!(T > 0.0)) return 0;
  return static_cast<int>(std::ceil(T / dt - 1e-9));
}

RunResult run(const RunSpec& spec) {
  if (!spec.disc) throw ConfigError("run needs a discretization");
  spec.params.validate();
  spec.solve.validate();
  if (spec.snapshot_every < 0) throw ConfigError("time.snapshot_every must be nonnegative");
  const Discretization& disc = *spec.disc;

  RunResult out;
  out.dt = spec.solve.dt;
  out.initial = spec.initial ? initialize(disc, spec.initial) : StarState::zero(disc);
  out.load = spec.forcing ? assemble_load(disc.velocity(), spec.forcing) : Eigen::VectorXd::Zero(disc.n_velocity());
  out.snapshots.push_back(out.initial);

  const int steps = step_count(spec.solve.T, spec.solve.dt);
  out.ledger.reserve(steps);
  out.steps.reserve(steps);
  StarState current = out.initial;
  for (int k = 1; k <= steps; ++k) {
    StepInfo info;
    StarState next;
    const std::string where = "step " + std::to_string(k) + ": ";
    try {
      next = step(disc, current, out.load, spec.solve, spec.params, &info);
    } catch (const NonconvergenceError& e) {
      throw NonconvergenceError(where + e.what(), e.last_increment());
    } catch (const DivergenceError& e) {
      throw DivergenceError(where + e.what());
    } catch (const SolverError& e) {
      throw SolverError(where + e.what());
    }
    next.t = k * spec.solve.dt;
    info.divergence = divergence_residual(disc, next);
    info.orthogonality = orthogonality_defect(disc, next.tilde.values);
    out.ledger.push_back(energy_ledger_entry(disc, current, next, out.load, spec.solve.dt, info.tau, spec.params.nu));
    out.steps.push_back(info);
    if (spec.snapshot_every > 0 && k % spec.snapshot_every == 0) out.snapshots.push_back(next);
    current = std::move(next);
  }
  out.final_state = std::move(current);
  return out;
}

}  // namespace vmsns
