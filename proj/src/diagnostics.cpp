#include "vmsns/diagnostics.hpp"

#include "vmsns/errors.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>

namespace vmsns {

namespace {

double quad_form(const SparseMatrix& a, const Eigen::VectorXd& x) { return x.dot(a * x); }

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return q * q * q;
}
double bump_d1(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return -6.0 * s * q * q;
}
double bump_d2(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  const double q = 1.0 - s * s;
  return -6.0 * q * q + 24.0 * s * s * q;
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& f) {
  double s = 0.0;
  for (size_t i = 1; i < t.size(); ++i) s += 0.5 * (t[i] - t[i - 1]) * (f[i] + f[i - 1]);
  return s;
}

}  // namespace

EnergyRecord energy_ledger_entry(const Discretization& disc, const StarState& prev, const StarState& next,
                                 const Eigen::VectorXd& load, double dt, double tau, double nu) {
  EnergyRecord r;
  r.t = next.t;
  const double ke_prev = 0.5 * quad_form(disc.mass(), prev.u);
  const double ks_prev = 0.5 * disc.field_inner(prev.tilde.values, prev.tilde.values);
  r.ke_fe = 0.5 * quad_form(disc.mass(), next.u);
  const double sub_sq = disc.field_inner(next.tilde.values, next.tilde.values);
  r.ke_sub = 0.5 * sub_sq;
  r.visc_diss = nu * quad_form(disc.stiffness(), next.u);
  r.sub_diss = sub_sq / tau;
  r.power_in = load.dot(next.u);
  const Eigen::VectorXd du = next.u - prev.u;
  const Eigen::VectorXd dtilde = next.tilde.values - prev.tilde.values;
  r.jump_terms = 0.5 * quad_form(disc.mass(), du) + 0.5 * disc.field_inner(dtilde, dtilde);
  r.imbalance = recompute_imbalance(ke_prev, ks_prev, r, dt);
  return r;
}

double recompute_imbalance(double ke_fe_prev, double ke_sub_prev, const EnergyRecord& row, double dt) {
  return (row.ke_fe - ke_fe_prev) + (row.ke_sub - ke_sub_prev) + row.jump_terms +
         dt * (row.visc_diss + row.sub_diss) - dt * row.power_in;
}

double divergence_residual(const Discretization& disc, const StarState& state) {
  const Eigen::VectorXd r = disc.coupling().transpose() * state.u +
                            disc.pressure_gradient().transpose() * disc.field_weights().cwiseProduct(state.tilde.values);
  return r.size() == 0 ? 0.0 : r.lpNorm<Eigen::Infinity>();
}

double total_energy(const Discretization& disc, const StarState& state) {
  return 0.5 * quad_form(disc.mass(), state.u) + 0.5 * disc.field_inner(state.tilde.values, state.tilde.values);
}

double integrated_energy_excess(const std::vector<EnergyRecord>& ledger, double initial_energy, double dt) {
  if (ledger.empty()) return 0.0;
  double dissipated = 0.0;
  double supplied = 0.0;
  for (const auto& r : ledger) {
    dissipated += dt * (r.visc_diss + r.sub_diss);
    supplied += dt * r.power_in;
  }
  const auto& last = ledger.back();
  return last.ke_fe + last.ke_sub + dissipated - initial_energy - supplied;
}

AprioriBound apriori_bound(const Discretization& disc, const StarState& initial, const Eigen::VectorXd& load,
                           const std::vector<EnergyRecord>& ledger, double dt, double nu) {
  AprioriBound b;
  if (load.size() > 0 && load.squaredNorm() > 0.0) {
    Eigen::SimplicialLDLT<SparseMatrix> k(disc.stiffness());
    if (k.info() != Eigen::Success) throw SolverError("stiffness factorization failed");
    b.forcing_dual = std::sqrt(std::max(0.0, load.dot(k.solve(load))));
  }
  const double e0 = total_energy(disc, initial);
  b.data_bound = e0 + static_cast<double>(ledger.size()) * dt * b.forcing_dual * b.forcing_dual / nu;
  double running = 0.0;
  b.ledger_total = e0;
  for (const auto& r : ledger) {
    running += dt * (0.5 * r.visc_diss + r.sub_diss);
    b.ledger_total = std::max(b.ledger_total, r.ke_fe + r.ke_sub + running);
  }
  return b;
}

std::vector<std::pair<double, double>> interpolation_pairs(int dim) {
  const double inf = std::numeric_limits<double>::infinity();
  if (dim == 2) return {{inf, 2.0}, {4.0, 4.0}, {3.0, 6.0}};
  return {{inf, 2.0}, {2.0, 6.0}, {4.0, 3.0}};
}

double velocity_lk_norm(const Discretization& disc, const Eigen::VectorXd& u, double k) {
  const QuadratureSpace qs(disc.mesh_ptr(), QuadratureRule::simplex(disc.dim(), 8));
  const Eigen::VectorXd values = evaluation_operator(disc.velocity(), qs) * u;
  const int d = disc.dim();
  double s = 0.0;
  for (int p = 0; p < qs.n_points(); ++p) {
    const double mag = values.segment(static_cast<Eigen::Index>(p) * d, d).norm();
    s += qs.weights()[p] * std::pow(mag, k);
  }
  return std::pow(s, 1.0 / k);
}

std::vector<InterpolatedNorm> interpolated_norm_report(const Discretization& disc, const std::vector<StarState>& history) {
  const auto pairs = interpolation_pairs(disc.dim());
  std::vector<InterpolatedNorm> out;
  if (history.empty()) {
    for (auto [r, k] : pairs) out.push_back({r, k, 0.0, 0.0});
    return out;
  }
  const QuadratureSpace qs(disc.mesh_ptr(), QuadratureRule::simplex(disc.dim(), 8));
  const SparseMatrix e = evaluation_operator(disc.velocity(), qs);
  const int d = disc.dim();
  std::vector<double> times, l2, grad_sq;
  std::vector<std::vector<double>> lk(pairs.size());
  for (const auto& s : history) {
    times.push_back(s.t);
    l2.push_back(disc.velocity_norm(s.u));
    grad_sq.push_back(std::max(0.0, quad_form(disc.stiffness(), s.u)));
    const Eigen::VectorXd values = e * s.u;
    for (size_t i = 0; i < pairs.size(); ++i) {
      const double k = pairs[i].second;
      double acc = 0.0;
      for (int p = 0; p < qs.n_points(); ++p)
        acc += qs.weights()[p] * std::pow(values.segment(static_cast<Eigen::Index>(p) * d, d).norm(), k);
      lk[i].push_back(std::pow(acc, 1.0 / k));
    }
  }
  const double sup_l2 = *std::max_element(l2.begin(), l2.end());
  const double int_grad = trapezoid(times, grad_sq);
  for (size_t i = 0; i < pairs.size(); ++i) {
    const auto [r, k] = pairs[i];
    InterpolatedNorm row{r, k, 0.0, 0.0};
    if (std::isinf(r)) {
      row.value = *std::max_element(lk[i].begin(), lk[i].end());
      row.bound = sup_l2;
    } else {
      std::vector<double> powered(lk[i].size());
      for (size_t j = 0; j < powered.size(); ++j) powered[j] = std::pow(lk[i][j], r);
      row.value = std::pow(std::max(0.0, trapezoid(times, powered)), 1.0 / r);
      row.bound = std::pow(sup_l2, 1.0 - 2.0 / r) * std::pow(int_grad, 1.0 / r);
    }
    out.push_back(row);
  }
  return out;
}

double BumpTest::value(const Point& x, double t, int dim) const {
  double v = bump((t - t_center) / half_window);
  for (int d = 0; d < dim; ++d) v *= bump((x[d] - center[d]) / radius);
  return v;
}

double BumpTest::time_derivative(const Point& x, double t, int dim) const {
  double v = bump_d1((t - t_center) / half_window) / half_window;
  for (int d = 0; d < dim; ++d) v *= bump((x[d] - center[d]) / radius);
  return v;
}

Vec3 BumpTest::gradient(const Point& x, double t, int dim) const {
  const double bt = bump((t - t_center) / half_window);
  Vec3 g{0.0, 0.0, 0.0};
  for (int d = 0; d < dim; ++d) {
    double v = bt * bump_d1((x[d] - center[d]) / radius) / radius;
    for (int e = 0; e < dim; ++e)
      if (e != d) v *= bump((x[e] - center[e]) / radius);
    g[d] = v;
  }
  return g;
}

double BumpTest::laplacian(const Point& x, double t, int dim) const {
  const double bt = bump((t - t_center) / half_window);
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    double v = bump_d2((x[d] - center[d]) / radius) / (radius * radius);
    for (int e = 0; e < dim; ++e)
      if (e != d) v *= bump((x[e] - center[e]) / radius);
    s += v;
  }
  return bt * s;
}

double local_energy_residual(const Discretization& disc, const std::vector<StarState>& history, const BumpTest& bump_test,
                             double nu, const VectorField& forcing) {
  const int dim = disc.dim();
  const Mesh& mesh = disc.mesh();
  std::vector<std::string> errors;
  if (!(bump_test.radius > 0.0)) errors.push_back("bump radius must be positive");
  if (!(bump_test.half_window > 0.0)) errors.push_back("bump time window must be positive");
  const Box& box = mesh.bounding_box();
  for (int d = 0; d < dim; ++d) {
    if (!(bump_test.center[d] - bump_test.radius > box.lower[d] && bump_test.center[d] + bump_test.radius < box.upper[d]))
      errors.push_back("bump support leaves the domain along axis " + std::to_string(d));
  }
  const double t0 = bump_test.t_center - bump_test.half_window;
  const double t1 = bump_test.t_center + bump_test.half_window;
  if (history.empty() || !(t0 > history.front().t && t1 < history.back().t)) {
    errors.push_back("bump time window is not inside the snapshot window");
  } else {
    int inside = 0;
    for (const auto& s : history)
      if (s.t > t0 && s.t < t1) ++inside;
    if (inside < kMinBumpSnapshots)
      errors.push_back("bump time window holds " + std::to_string(inside) + " snapshots, at least " +
                       std::to_string(kMinBumpSnapshots) + " are needed");
  }
  if (!errors.empty()) throw ConfigError(std::move(errors));

  const QuadratureRule rule = QuadratureRule::simplex(dim, bump_test.quadrature_order);
  std::vector<int> cells;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    bool hit = true;
    for (int d = 0; d < dim && hit; ++d) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (int v = 0; v <= dim; ++v) {
        const double x = mesh.vertices()[mesh.cells()[c][v]][d];
        lo = std::min(lo, x);
        hi = std::max(hi, x);
      }
      hit = hi > bump_test.center[d] - bump_test.radius && lo < bump_test.center[d] + bump_test.radius;
    }
    if (hit) cells.push_back(c);
  }
  // Points and forcing do not depend on time.
  std::vector<Point> points;
  std::vector<double> weights;
  std::vector<Vec3> f_values;
  for (int c : cells)
    for (int q = 0; q < rule.size(); ++q) {
      points.push_back(cell_point(mesh, c, rule.points[q]));
      weights.push_back(rule.weights[q] * mesh.geometry(c).volume);
      f_values.push_back(forcing ? forcing(points.back()) : Vec3{0.0, 0.0, 0.0});
    }

  std::vector<double> times, integrand;
  for (const auto& s : history) {
    times.push_back(s.t);
    if (!(s.t > t0 && s.t < t1)) {
      integrand.push_back(0.0);
      continue;
    }
    double acc = 0.0;
    size_t idx = 0;
    for (int c : cells) {
      for (int q = 0; q < rule.size(); ++q, ++idx) {
        const Point& x = points[idx];
        const double phi = bump_test.value(x, s.t, dim);
        const double phi_t = bump_test.time_derivative(x, s.t, dim);
        const Vec3 grad_phi = bump_test.gradient(x, s.t, dim);
        const double lap_phi = bump_test.laplacian(x, s.t, dim);
        if (phi == 0.0 && phi_t == 0.0 && lap_phi == 0.0) continue;
        const Vec3 u = evaluate(disc.velocity(), s.u, c, rule.points[q]);
        const auto gu = evaluate_gradient(disc.velocity(), s.u, c, rule.points[q]);
        const double p = evaluate(disc.pressure(), s.p, c, rule.points[q])[0];
        double u2 = 0.0, u_dot_grad = 0.0, grad2 = 0.0, fu = 0.0;
        for (int a = 0; a < dim; ++a) {
          u2 += u[a] * u[a];
          u_dot_grad += u[a] * grad_phi[a];
          fu += f_values[idx][a] * u[a];
          for (int b = 0; b < dim; ++b) grad2 += gu[a][b] * gu[a][b];
        }
        const double val = -0.5 * u2 * phi_t - (0.5 * u2 + p) * u_dot_grad - nu * 0.5 * u2 * lap_phi +
                           nu * grad2 * phi - fu * phi;
        acc += weights[idx] * val;
      }
    }
    integrand.push_back(acc);
  }
  return trapezoid(times, integrand);
}

ErrorNorms error_norms(const Discretization& disc, const StarState& state, const ExactSolution& exact,
                       int quadrature_order) {
  const Mesh& mesh = disc.mesh();
  const int dim = disc.dim();
  const QuadratureRule rule = QuadratureRule::simplex(dim, quadrature_order);
  double el2 = 0.0, eh1 = 0.0, ep = 0.0, ep_mean = 0.0, volume = 0.0;
  for (int c = 0; c < mesh.n_cells(); ++c) {
    const double vol = mesh.geometry(c).volume;
    for (int q = 0; q < rule.size(); ++q) {
      const double w = rule.weights[q] * vol;
      const Point x = cell_point(mesh, c, rule.points[q]);
      const Vec3 uh = evaluate(disc.velocity(), state.u, c, rule.points[q]);
      const auto gh = evaluate_gradient(disc.velocity(), state.u, c, rule.points[q]);
      const Vec3 ue = exact.velocity(x);
      const auto ge = exact.gradient(x);
      for (int a = 0; a < dim; ++a) {
        el2 += w * (uh[a] - ue[a]) * (uh[a] - ue[a]);
        for (int b = 0; b < dim; ++b) eh1 += w * (gh[a][b] - ge[a][b]) * (gh[a][b] - ge[a][b]);
      }
      if (exact.pressure) {
        const double e = evaluate(disc.pressure(), state.p, c, rule.points[q])[0] - exact.pressure(x);
        ep += w * e * e;
        ep_mean += w * e;
      }
      volume += w;
    }
  }
  return {std::sqrt(el2), std::sqrt(eh1), std::sqrt(std::max(0.0, ep - ep_mean * ep_mean / volume))};
}

double observed_rate(const std::vector<double>& h, const std::vector<double>& error) {
  if (h.size() != error.size() || h.size() < 2) throw InputError("rate needs at least two matching samples");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(h.size());
  for (size_t i = 0; i < h.size(); ++i) {
    const double x = std::log(h[i]), y = std::log(error[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace vmsns
