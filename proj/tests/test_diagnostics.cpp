#include "oracle.hpp"

#include "vmsns/errors.hpp"
#include "vmsns/scenario.hpp"
#include "vmsns/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace vmsns;

namespace {

std::shared_ptr<const Discretization> make_disc(int dim, int n) {
  return std::make_shared<const Discretization>(std::make_shared<const Mesh>(Mesh::structured(dim, n)));
}

StarState random_state(const Discretization& d, unsigned seed) {
  StarState s;
  s.u = oracle::random_vector(d.n_velocity(), seed);
  s.p = oracle::random_vector(d.n_pressure(), seed + 1);
  s.tilde.values = project_orthogonal(d, oracle::random_vector(d.field_size(), seed + 2));
  return s;
}

}  // namespace

TEST(Ledger, EntryMatchesOracleIntegrals) {
  auto d = make_disc(2, 3);
  const StarState a = random_state(*d, 51), b = random_state(*d, 61);
  const Eigen::VectorXd load = oracle::random_vector(d->n_velocity(), 71);
  const double dt = 0.1, tau = 0.2, nu = 0.3;
  const EnergyRecord r = energy_ledger_entry(*d, a, b, load, dt, tau, nu);

  const auto& v = d->velocity();
  const auto sq = [&](const Eigen::VectorXd& u) {
    return oracle::integrate(d->mesh(), [&](const oracle::Cell& k, const auto& l) {
      const auto x = oracle::value(v, u, k, l);
      return x[0] * x[0] + x[1] * x[1];
    });
  };
  const double grad_sq = oracle::integrate(d->mesh(), [&](const oracle::Cell& k, const auto&) {
    const auto g = oracle::gradient(v, b.u, k);
    return g[0][0] * g[0][0] + g[0][1] * g[0][1] + g[1][0] * g[1][0] + g[1][1] * g[1][1];
  });
  const Eigen::VectorXd w = d->field_weights();
  const double sub_sq = (w.cwiseProduct(b.tilde.values)).dot(b.tilde.values);
  const Eigen::VectorXd dz = b.tilde.values - a.tilde.values;
  EXPECT_NEAR(r.ke_fe, 0.5 * sq(b.u), 1e-12);
  EXPECT_NEAR(r.ke_sub, 0.5 * sub_sq, 1e-12);
  EXPECT_NEAR(r.visc_diss, nu * grad_sq, 1e-11);
  EXPECT_NEAR(r.sub_diss, sub_sq / tau, 1e-12);
  EXPECT_NEAR(r.power_in, load.dot(b.u), 1e-12);
  EXPECT_NEAR(r.jump_terms, 0.5 * sq(b.u - a.u) + 0.5 * (w.cwiseProduct(dz)).dot(dz), 1e-12);
  const double ke_prev = 0.5 * sq(a.u), ks_prev = 0.5 * (w.cwiseProduct(a.tilde.values)).dot(a.tilde.values);
  EXPECT_NEAR(r.imbalance, recompute_imbalance(ke_prev, ks_prev, r, dt), 1e-11);
}

TEST(Ledger, RecomputeImbalanceClosedForm) {
  EnergyRecord r;
  r.ke_fe = 1.0;
  r.ke_sub = 0.25;
  r.visc_diss = 2.0;
  r.sub_diss = 3.0;
  r.power_in = 4.0;
  r.jump_terms = 0.5;
  EXPECT_DOUBLE_EQ(recompute_imbalance(1.5, 0.5, r, 0.1), -0.5 - 0.25 + 0.5 + 0.5 - 0.4);
  EXPECT_DOUBLE_EQ(imbalance_scale(r, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(imbalance_scale(EnergyRecord{}, 0.1), 1e-30);
}

TEST(Ledger, SchemeBalancesEnergy) {
  RunSpec spec;
  spec.disc = make_disc(2, 6);
  spec.params.nu = 0.02;
  spec.solve.dt = 0.02;
  spec.solve.T = 0.1;
  spec.solve.picard_tol = 1e-12;
  spec.initial = vortex_velocity(2, 1.0);
  spec.forcing = [](const Point& x) { return Vec3{std::sin(x[1]), 0.3, 0.0}; };
  const RunResult r = run(spec);
  double jumps = 0.0;
  for (const auto& row : r.ledger) {
    EXPECT_LT(std::abs(row.imbalance), 1e-10 * imbalance_scale(row, spec.solve.dt));
    jumps += row.jump_terms;
  }
  const double e0 = total_energy(*spec.disc, r.initial);
  EXPECT_NEAR(integrated_energy_excess(r.ledger, e0, spec.solve.dt), -jumps, 1e-10);
  EXPECT_LT(integrated_energy_excess(r.ledger, e0, spec.solve.dt), 0.0);
  EXPECT_EQ(integrated_energy_excess({}, e0, spec.solve.dt), 0.0);
}

TEST(Ledger, AprioriBoundOracle) {
  auto d = make_disc(2, 4);
  const StarState s0 = random_state(*d, 81);
  const Eigen::VectorXd load = oracle::random_vector(d->n_velocity(), 91);
  std::vector<EnergyRecord> ledger(3);
  for (int i = 0; i < 3; ++i) {
    ledger[i].ke_fe = 0.1 * (i + 1);
    ledger[i].ke_sub = 0.01;
    ledger[i].visc_diss = 2.0;
    ledger[i].sub_diss = 1.0;
  }
  const double dt = 0.1, nu = 0.5;
  const AprioriBound b = apriori_bound(*d, s0, load, ledger, dt, nu);
  const Eigen::MatrixXd k = Eigen::MatrixXd(d->stiffness());
  const double dual = std::sqrt(load.dot(k.ldlt().solve(load)));
  EXPECT_NEAR(b.forcing_dual, dual, 1e-10 * dual);
  const double e0 = total_energy(*d, s0);
  EXPECT_NEAR(b.data_bound, e0 + 3 * dt * dual * dual / nu, 1e-9 * b.data_bound);
  EXPECT_NEAR(b.ledger_total, std::max(e0, 0.31 + 3 * dt * 2.0), 1e-12);
  EXPECT_EQ(apriori_bound(*d, s0, Eigen::VectorXd::Zero(d->n_velocity()), {}, dt, nu).forcing_dual, 0.0);
}

TEST(Ledger, DivergenceResidual) {
  auto d = make_disc(2, 3);
  EXPECT_EQ(divergence_residual(*d, StarState::zero(*d)), 0.0);
  const StarState s = random_state(*d, 101);
  const Eigen::VectorXd q = oracle::random_vector(d->n_pressure(), 102);
  const Eigen::VectorXd w = d->field_weights();
  const Eigen::VectorXd gq = d->pressure_gradient() * q;
  const double pairing = oracle::integrate(d->mesh(), [&](const oracle::Cell& k, const auto& l) {
    const auto u = oracle::value(d->velocity(), s.u, k, l);
    const auto g = oracle::gradient(d->pressure(), q, k);
    return u[0] * g[0][0] + u[1] * g[0][1];
  }) + (w.cwiseProduct(gq)).dot(s.tilde.values);
  const Eigen::VectorXd r = d->coupling().transpose() * s.u +
                            d->pressure_gradient().transpose() * w.cwiseProduct(s.tilde.values);
  EXPECT_NEAR(r.dot(q), pairing, 1e-11);
  EXPECT_DOUBLE_EQ(divergence_residual(*d, s), r.lpNorm<Eigen::Infinity>());
}

TEST(Interpolation, PairsAndL2Row) {
  EXPECT_EQ(interpolation_pairs(2).size(), 3u);
  EXPECT_EQ(interpolation_pairs(3)[1], std::make_pair(2.0, 6.0));
  auto d = make_disc(2, 4);
  const StarState s = random_state(*d, 111);
  EXPECT_NEAR(velocity_lk_norm(*d, s.u, 2.0), std::sqrt(s.u.dot(d->mass() * s.u)), 1e-12);
  StarState s1 = s;
  s1.t = 1.0;
  s1.u *= 2.0;
  const auto rows = interpolated_norm_report(*d, {s, s1});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].value, velocity_lk_norm(*d, s1.u, 2.0), 1e-12);
  EXPECT_NEAR(rows[0].bound, rows[0].value, 1e-12);
  // L^4(0,1; L^4) of a field scaling linearly in time: |u|_4^4 * int_0^1 (1 + t)^4 by the trapezoid rule.
  const double l4 = velocity_lk_norm(*d, s.u, 4.0);
  EXPECT_NEAR(rows[1].value, std::pow(std::pow(l4, 4) * 0.5 * (1.0 + 16.0), 0.25), 1e-10);
  for (const auto& row : rows) EXPECT_GT(row.bound, 0.0);
}

TEST(Bump, DerivativesMatchFiniteDifferences) {
  BumpTest b;
  const Point x{0.55, 0.42, 0.5};
  const double t = 0.12, h = 1e-5;
  EXPECT_NEAR(b.time_derivative(x, t, 2), (b.value(x, t + h, 2) - b.value(x, t - h, 2)) / (2 * h), 1e-5);
  const Vec3 g = b.gradient(x, t, 2);
  double lap = 0.0;
  for (int d = 0; d < 2; ++d) {
    Point xp = x, xm = x;
    xp[d] += h;
    xm[d] -= h;
    EXPECT_NEAR(g[d], (b.value(xp, t, 2) - b.value(xm, t, 2)) / (2 * h), 1e-5);
    lap += (b.value(xp, t, 2) - 2 * b.value(x, t, 2) + b.value(xm, t, 2)) / (h * h);
  }
  EXPECT_NEAR(b.laplacian(x, t, 2), lap, 1e-3);
  EXPECT_EQ(b.value({0.8, 0.5, 0.5}, t, 2), 0.0);
  EXPECT_EQ(b.value(x, 0.3, 2), 0.0);
  EXPECT_DOUBLE_EQ(b.value({0.5, 0.5, 0.5}, 0.1, 3), 1.0);
}

TEST(Bump, RejectsBadSupport) {
  auto d = make_disc(2, 4);
  std::vector<StarState> history;
  for (int k = 0; k <= 40; ++k) {
    StarState s = StarState::zero(*d);
    s.t = 0.005 * k;
    history.push_back(s);
  }
  BumpTest b;
  EXPECT_NO_THROW(local_energy_residual(*d, history, b, 0.1));
  BumpTest outside = b;
  outside.radius = 0.6;
  EXPECT_THROW(local_energy_residual(*d, history, outside, 0.1), ConfigError);
  BumpTest late = b;
  late.t_center = 0.19;
  EXPECT_THROW(local_energy_residual(*d, history, late, 0.1), ConfigError);
  std::vector<StarState> sparse;
  for (int k = 0; k <= 10; ++k) sparse.push_back(history[4 * k]);
  EXPECT_THROW(local_energy_residual(*d, sparse, b, 0.1), ConfigError);
}

TEST(Bump, LocalEnergyConstantFieldOracle) {
  // u_h equals the constant c on the bump support, p = x; every term integrates in closed form.
  auto d = make_disc(2, 8);
  const double c0 = 0.7, c1 = -0.4, f0 = 1.3;
  StarState s = StarState::zero(*d);
  s.u = d->velocity().interpolate([&](const Point&) { return Vec3{c0, c1, 0.0}; });
  s.p = d->pressure().interpolate([](const Point& x) { return x[0]; });
  std::vector<StarState> history;
  std::vector<double> times, bt;
  BumpTest b;
  for (int k = 0; k <= 40; ++k) {
    s.t = 0.005 * k;
    history.push_back(s);
    times.push_back(s.t);
    bt.push_back(b.value({0.5, 0.5, 0.5}, s.t, 2));
  }
  double trap = 0.0;
  for (size_t i = 1; i < times.size(); ++i) trap += 0.5 * (times[i] - times[i - 1]) * (bt[i] + bt[i - 1]);
  const double space = std::pow(b.radius * 32.0 / 35.0, 2);
  const VectorField f = [&](const Point&) { return Vec3{f0, 0.0, 0.0}; };
  const double expected = (c0 - f0 * c0) * trap * space;
  EXPECT_NEAR(local_energy_residual(*d, history, b, 0.05, f), expected, 1e-12);
}

TEST(Errors, NormsAgainstZeroSolution) {
  auto d = make_disc(2, 4);
  const StarState s = random_state(*d, 121);
  ExactSolution zero{[](const Point&) { return Vec3{0, 0, 0}; },
                     [](const Point&) { return std::array<Vec3, 3>{}; },
                     [](const Point&) { return 0.0; }};
  const ErrorNorms e = error_norms(*d, s, zero);
  EXPECT_NEAR(e.velocity_l2, std::sqrt(s.u.dot(d->mass() * s.u)), 1e-12);
  EXPECT_NEAR(e.velocity_h1, std::sqrt(s.u.dot(d->stiffness() * s.u)), 1e-12);
  const Eigen::VectorXd mean = d->pressure_mean();
  const SparseMatrix mp = assemble_mass(d->pressure());
  const double p_sq = s.p.dot(mp * s.p) - std::pow(mean.dot(s.p), 2) / mean.sum();
  EXPECT_NEAR(e.pressure_l2, std::sqrt(p_sq), 1e-12);
  // Pressures differing by a constant have the same error.
  StarState shifted = s;
  shifted.p.array() += 3.0;
  EXPECT_NEAR(error_norms(*d, shifted, zero).pressure_l2, e.pressure_l2, 1e-12);
}

TEST(Errors, ObservedRate) {
  EXPECT_NEAR(observed_rate({0.1, 0.05, 0.025}, {2e-2, 5e-3, 1.25e-3}), 2.0, 1e-12);
  EXPECT_THROW(observed_rate({0.1}, {1.0}), InputError);
}

TEST(Scenario, ManufacturedFieldsAreConsistent) {
  for (int dim : {2, 3}) {
    const ManufacturedSolution ms(dim, 1.0, 2.0, 0.1, true);
    const Point x{0.3, 0.6, 0.45};
    const auto g = ms.gradient(x);
    double div = 0.0;
    for (int a = 0; a < dim; ++a) div += g[a][a];
    EXPECT_NEAR(div, 0.0, 1e-14);
    const double h = 1e-5;
    Vec3 lap{0, 0, 0};
    for (int dd = 0; dd < dim; ++dd) {
      Point xp = x, xm = x;
      xp[dd] += h;
      xm[dd] -= h;
      const Vec3 up = ms.velocity(xp), um = ms.velocity(xm), u0 = ms.velocity(x);
      for (int a = 0; a < dim; ++a) {
        EXPECT_NEAR(g[a][dd], (up[a] - um[a]) / (2 * h), 1e-8);
        lap[a] += (up[a] - 2 * u0[a] + um[a]) / (h * h);
      }
      EXPECT_NEAR(ms.pressure_gradient(x)[dd], (ms.pressure(xp) - ms.pressure(xm)) / (2 * h), 1e-8);
    }
    const Vec3 u = ms.velocity(x), f = ms.forcing(x), gp = ms.pressure_gradient(x);
    for (int a = 0; a < dim; ++a) {
      double conv = 0.0;
      for (int b = 0; b < dim; ++b) conv += u[b] * g[a][b];
      EXPECT_NEAR(ms.laplacian(x)[a], lap[a], 1e-4);
      EXPECT_NEAR(f[a], -0.1 * ms.laplacian(x)[a] + conv + gp[a], 1e-12);
    }
    EXPECT_NEAR(ms.velocity({0.0, 0.3, 0.4})[1], 0.0, 1e-15);
  }
}

TEST(Scenario, VortexIsDivergenceFreeWithZeroTrace) {
  const VectorField v = vortex_velocity(2, 1.0);
  const Point x{0.3, 0.7, 0.0};
  const double h = 1e-6;
  const double div = (v({x[0] + h, x[1], 0})[0] - v({x[0] - h, x[1], 0})[0]) / (2 * h) +
                     (v({x[0], x[1] + h, 0})[1] - v({x[0], x[1] - h, 0})[1]) / (2 * h);
  EXPECT_NEAR(div, 0.0, 1e-8);
  EXPECT_NEAR(v({0.0, 0.4, 0.0})[0], 0.0, 1e-15);
  EXPECT_NEAR(v({1.0, 0.4, 0.0})[1], 0.0, 1e-15);
}
