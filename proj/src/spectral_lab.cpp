#include "vmsns/spectral_lab.hpp"

#include "vmsns/errors.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

namespace vmsns {

namespace {

void check_cap(Eigen::Index n, int cap, const char* what) {
  if (n > cap)
    throw SizeError(std::string(what) + " has " + std::to_string(n) + " dofs, above the dense cap of " +
                    std::to_string(cap));
}

SparseMatrix build_injection(const FeSpace& fe, const FeSpace& enriched) {
  const Mesh& m = fe.mesh();
  const int nv = m.n_vertices();
  std::vector<Eigen::Triplet<double>> t;
  for (int node : enriched.free_nodes()) {
    const int row = enriched.node_dof(node);
    if (node < nv) {
      const int col = fe.node_dof(node);
      if (col >= 0)
        for (int c = 0; c < fe.components(); ++c) t.emplace_back(enriched.global_dof(row, c), fe.global_dof(col, c), 1.0);
    } else {
      for (int end : m.edges()[node - nv]) {
        const int col = fe.node_dof(end);
        if (col >= 0)
          for (int c = 0; c < fe.components(); ++c) t.emplace_back(enriched.global_dof(row, c), fe.global_dof(col, c), 0.5);
      }
    }
  }
  SparseMatrix j(enriched.n_dofs(), fe.n_dofs());
  j.setFromTriplets(t.begin(), t.end());
  return j;
}

Eigen::MatrixXd solve_columns(const Eigen::SimplicialLDLT<SparseMatrix>& solver, const SparseMatrix& rhs) {
  Eigen::MatrixXd dense = Eigen::MatrixXd(rhs);
  Eigen::MatrixXd out(dense.rows(), dense.cols());
  for (Eigen::Index c = 0; c < dense.cols(); ++c) out.col(c) = solver.solve(dense.col(c));
  return out;
}

Eigen::VectorXd powered(const Eigen::VectorXd& lambda, double s) {
  return lambda.array().pow(s).matrix();
}

}  // namespace

Spectrum spectral_decompose(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m, std::string tag, int cap) {
  if (k.rows() != k.cols() || m.rows() != m.cols() || k.rows() != m.rows())
    throw DimensionError("eigenproblem matrices must be square and of equal size");
  check_cap(k.rows(), cap, "eigenproblem");
  Spectrum out;
  out.tag = std::move(tag);
  if (k.rows() == 0) return out;
  const double scale = std::max(k.cwiseAbs().maxCoeff(), 1e-300);
  if ((k - k.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) throw InputError("stiffness operator is not symmetric");
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw InputError("mass operator is not positive definite");
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(k, m, Eigen::ComputeEigenvectors | Eigen::Ax_lBx);
  if (es.info() != Eigen::Success) throw SolverError("dense eigensolver failed");
  out.eigenvalues = es.eigenvalues();
  out.eigenvectors = es.eigenvectors();
  out.weighted = m * out.eigenvectors;
  return out;
}

Spectrum spectral_decompose(const SparseMatrix& k, const SparseMatrix& m, std::string tag, int cap) {
  check_cap(k.rows(), cap, "eigenproblem");
  return spectral_decompose(Eigen::MatrixXd(k), Eigen::MatrixXd(m), std::move(tag), cap);
}

double fractional_norm(const Eigen::VectorXd& w, double s, const Spectrum& spec) {
  if (w.size() != spec.weighted.rows()) throw DimensionError("vector does not match the spectrum");
  const Eigen::VectorXd c = spec.weighted.transpose() * w;
  return std::sqrt(c.cwiseAbs2().dot(powered(spec.eigenvalues, s)));
}

Eigen::MatrixXd fractional_gram(const Spectrum& spec, double s) {
  return spec.weighted * powered(spec.eigenvalues, s).asDiagonal() * spec.weighted.transpose();
}

double star_norm(const Eigen::VectorXd& w_fe, const Eigen::VectorXd& w_perp, double s, double h, const Spectrum& spec) {
  const double a = fractional_norm(w_fe, s, spec);
  return std::sqrt(a * a + std::pow(h, -2.0 * s) * w_perp.squaredNorm());
}

double inverse_inequality_constant(const Spectrum& spec, double s, double h) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < spec.size(); ++i) {
    const double l = spec.eigenvalues[i];
    best = std::max(best, std::sqrt(1.0 + l) * std::pow(l, -0.5 * s));
  }
  return best * std::pow(h, 1.0 - s);
}

StarSpaces::StarSpaces(std::shared_ptr<const Mesh> mesh, int cap)
    : mesh_(std::move(mesh)),
      cap_(cap),
      fe_(mesh_, 1, mesh_->dim(), Constraint::zero_trace),
      enriched_(mesh_, 2, mesh_->dim(), Constraint::zero_trace),
      pressure_(mesh_, 1, 1, Constraint::zero_mean) {
  injection_ = build_injection(fe_, enriched_);
  fe_mass_ = assemble_mass(fe_);
  fe_stiffness_ = assemble_stiffness(fe_);
  enriched_mass_ = assemble_mass(enriched_);
  enriched_coupling_ = assemble_gradient_coupling(enriched_, pressure_);
  fe_coupling_ = SparseMatrix(injection_.transpose() * enriched_coupling_);
  pressure_mass_ = assemble_mass(pressure_);
  pressure_stiffness_ = assemble_stiffness(pressure_);
  if (fe_.n_dofs() > 0) {
    fe_mass_solver_.compute(fe_mass_);
    if (fe_mass_solver_.info() != Eigen::Success) throw SolverError("W_h mass matrix factorization failed");
  }
  if (enriched_.n_dofs() > 0) {
    enriched_mass_solver_.compute(enriched_mass_);
    if (enriched_mass_solver_.info() != Eigen::Success) throw SolverError("enriched mass matrix factorization failed");
  }
}

const Spectrum& StarSpaces::fe_spectrum() const {
  std::lock_guard lock(cache_mutex_);
  if (!fe_spectrum_) fe_spectrum_ = spectral_decompose(fe_stiffness_, fe_mass_, "dirichlet_laplacian", cap_);
  return *fe_spectrum_;
}

const Spectrum& StarSpaces::pressure_spectrum() const {
  std::lock_guard lock(cache_mutex_);
  if (!pressure_spectrum_) {
    Spectrum full = spectral_decompose(pressure_stiffness_, pressure_mass_, "neumann_laplacian", cap_);
    const Eigen::Index n = full.size() - 1;
    if (n < 0) throw InputError("empty pressure space");
    Spectrum s;
    s.tag = full.tag;
    s.eigenvalues = full.eigenvalues.tail(n);
    s.eigenvectors = full.eigenvectors.rightCols(n);
    s.weighted = full.weighted.rightCols(n);
    pressure_spectrum_ = std::move(s);
  }
  return *pressure_spectrum_;
}

Eigen::VectorXd StarSpaces::solve_enriched_mass(const Eigen::VectorXd& rhs) const {
  return rhs.size() == 0 ? rhs : Eigen::VectorXd(enriched_mass_solver_.solve(rhs));
}

Eigen::VectorXd StarSpaces::solve_fe_mass(const Eigen::VectorXd& rhs) const {
  return rhs.size() == 0 ? rhs : Eigen::VectorXd(fe_mass_solver_.solve(rhs));
}

Eigen::VectorXd StarSpaces::project_fe(const Eigen::VectorXd& w) const {
  if (w.size() != enriched_.n_dofs()) throw DimensionError("composite vector has the wrong size");
  return solve_fe_mass(injection_.transpose() * (enriched_mass_ * w));
}

Eigen::VectorXd StarSpaces::complement(const Eigen::VectorXd& w) const { return w - injection_ * project_fe(w); }

double StarSpaces::star_norm(const Eigen::VectorXd& w, double s) const {
  const Eigen::VectorXd perp = complement(w);
  const double a = fractional_norm(project_fe(w), s, fe_spectrum());
  const double b = std::max(0.0, perp.dot(enriched_mass_ * perp));
  return std::sqrt(a * a + std::pow(h(), -2.0 * s) * b);
}

Eigen::MatrixXd StarSpaces::star_operator() const {
  check_cap(enriched_.n_dofs(), cap_, "composite operator");
  const Eigen::MatrixXd me = Eigen::MatrixXd(enriched_mass_);
  const Eigen::MatrixXd jt_me = Eigen::MatrixXd(SparseMatrix(injection_.transpose() * enriched_mass_));
  Eigen::MatrixXd p(jt_me.rows(), jt_me.cols());
  for (Eigen::Index c = 0; c < jt_me.cols(); ++c) p.col(c) = solve_fe_mass(jt_me.col(c));
  Eigen::MatrixXd k = p.transpose() * (fe_stiffness_ * p);
  k += std::pow(h(), -2.0) * (me - jt_me.transpose() * p);
  return 0.5 * (k + k.transpose());
}

const Eigen::MatrixXd& StarSpaces::complement_basis() const {
  std::lock_guard lock(cache_mutex_);
  if (!complement_basis_) {
    check_cap(enriched_.n_dofs(), cap_, "complement basis");
    const Eigen::MatrixXd me = Eigen::MatrixXd(enriched_mass_);
    Eigen::LLT<Eigen::MatrixXd> llt(me);
    if (llt.info() != Eigen::Success) throw InputError("enriched mass matrix is not positive definite");
    const Eigen::MatrixXd lt_j = llt.matrixU() * Eigen::MatrixXd(injection_);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(lt_j);
    const Eigen::MatrixXd q = qr.householderQ();
    const Eigen::Index rank = lt_j.cols();
    const Eigen::MatrixXd q2 = q.rightCols(q.cols() - rank);
    complement_basis_ = llt.matrixU().solve(q2);
  }
  return *complement_basis_;
}

double infsup_constant(const StarSpaces& spaces, double s, bool with_complement) {
  const Spectrum& w = spaces.fe_spectrum();
  const Spectrum& q = spaces.pressure_spectrum();
  if (q.size() == 0) return 0.0;
  const Eigen::MatrixXd bw = Eigen::MatrixXd(spaces.fe_coupling());
  const Eigen::MatrixXd t = w.eigenvectors.transpose() * bw;
  Eigen::MatrixXd sm = t.transpose() * powered(w.eigenvalues, s - 1.0).asDiagonal() * t;
  if (with_complement) {
    Eigen::MatrixXd be = Eigen::MatrixXd(spaces.enriched_coupling());
    Eigen::MatrixXd me_inv_be(be.rows(), be.cols());
    for (Eigen::Index c = 0; c < be.cols(); ++c) me_inv_be.col(c) = spaces.solve_enriched_mass(be.col(c));
    Eigen::MatrixXd mw_inv_bw(bw.rows(), bw.cols());
    for (Eigen::Index c = 0; c < bw.cols(); ++c) mw_inv_bw.col(c) = spaces.solve_fe_mass(bw.col(c));
    const Eigen::MatrixXd perp = be.transpose() * me_inv_be - bw.transpose() * mw_inv_bw;
    sm += std::pow(spaces.h(), 2.0 * (1.0 - s)) * perp;
  }
  const Eigen::VectorXd d = powered(q.eigenvalues, -0.5 * s);
  Eigen::MatrixXd r = d.asDiagonal() * (q.eigenvectors.transpose() * sm * q.eigenvectors) * d.asDiagonal();
  r = 0.5 * (r + r.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw SolverError("inf-sup eigensolve failed");
  return std::sqrt(std::max(0.0, es.eigenvalues()[0]));
}

namespace {

SparseMatrix constrained_system(const StarSpaces& spaces, const SparseMatrix& top_left) {
  const Eigen::Index ne = spaces.enriched().n_dofs();
  const Eigen::Index nq = spaces.pressure().n_dofs();
  std::vector<Eigen::Triplet<double>> t;
  auto add = [&](const SparseMatrix& a, Eigen::Index r0, Eigen::Index c0) {
    for (int k = 0; k < a.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(a, k); it; ++it) t.emplace_back(r0 + it.row(), c0 + it.col(), it.value());
  };
  add(top_left, 0, 0);
  add(spaces.enriched_coupling(), 0, ne);
  add(SparseMatrix(spaces.enriched_coupling().transpose()), ne, 0);
  const Eigen::VectorXd m = spaces.pressure_mean();
  for (Eigen::Index j = 0; j < nq; ++j) {
    t.emplace_back(ne + j, ne + nq, m[j]);
    t.emplace_back(ne + nq, ne + j, m[j]);
  }
  SparseMatrix a(ne + nq + 1, ne + nq + 1);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

}  // namespace

LerayProjection leray_star_projection(const StarSpaces& spaces, const Eigen::VectorXd& v) {
  const Eigen::Index ne = spaces.enriched().n_dofs();
  const Eigen::Index nq = spaces.pressure().n_dofs();
  if (v.size() != ne) throw DimensionError("composite vector has the wrong size");
  const SparseMatrix a = constrained_system(spaces, spaces.enriched_mass());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a.rows());
  rhs.head(ne) = spaces.enriched_mass() * v;
  Eigen::SparseLU<SparseMatrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) throw SolverError("Leray system factorization failed");
  const Eigen::VectorXd x = lu.solve(rhs);
  return {x.head(ne), x.segment(ne, nq)};
}

double leray_star_stability(const StarSpaces& spaces, const Eigen::VectorXd& v, double s) {
  const double denom = spaces.star_norm(v, s);
  if (denom == 0.0) return 0.0;
  return spaces.star_norm(leray_star_projection(spaces, v).projected, s) / denom;
}

double leray_max_ratio(const StarSpaces& spaces, double s, int random_probes, std::uint64_t seed) {
  const Eigen::Index ne = spaces.enriched().n_dofs();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double best = 0.0;
  for (int k = 0; k < random_probes; ++k) {
    Eigen::VectorXd v(ne);
    for (Eigen::Index i = 0; i < ne; ++i) v[i] = normal(rng);
    best = std::max(best, leray_star_stability(spaces, v, s));
  }
  constexpr double pi = std::numbers::pi;
  const Box& box = spaces.mesh().bounding_box();
  const int dim = spaces.mesh().dim();
  auto unit = [&](const Point& x, int d) { return (x[d] - box.lower[d]) / (box.upper[d] - box.lower[d]); };
  const Eigen::VectorXd smooth = spaces.enriched().interpolate([&](const Point& x) {
    const double sx = std::sin(pi * unit(x, 0)), sy = std::sin(pi * unit(x, 1));
    const double g = dim == 3 ? std::sin(pi * unit(x, 2)) : 1.0;
    return Vec3{sx * sx * std::sin(2 * pi * unit(x, 1)) * g, -std::sin(2 * pi * unit(x, 0)) * sy * sy * g, 0.0};
  });
  best = std::max(best, leray_star_stability(spaces, smooth, s));
  const Eigen::VectorXd q = spaces.pressure().interpolate(
      [&](const Point& x) { return std::cos(pi * unit(x, 0)) * std::cos(pi * unit(x, 1)); });
  const Eigen::VectorXd grad = spaces.solve_enriched_mass(spaces.enriched_coupling() * q);
  best = std::max(best, leray_star_stability(spaces, grad, s));
  return best;
}

Eigen::MatrixXd constraint_nullspace(const StarSpaces& spaces) {
  const Eigen::Index ne = spaces.enriched().n_dofs();
  check_cap(ne, spaces.cap(), "constraint nullspace");
  const Eigen::MatrixXd b = Eigen::MatrixXd(spaces.enriched_coupling());
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b);
  qr.setThreshold(1e-10);
  const Eigen::Index rank = qr.rank();
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(ne - rank);
}

std::vector<WvRatio> wv_equivalence(const StarSpaces& spaces, const std::vector<double>& grid) {
  const Eigen::MatrixXd n = constraint_nullspace(spaces);
  const Eigen::MatrixXd kstar = spaces.star_operator();
  const Eigen::MatrixXd me = Eigen::MatrixXd(spaces.enriched_mass());
  Eigen::MatrixXd a = n.transpose() * kstar * n;
  Eigen::MatrixXd mv = n.transpose() * me * n;
  a = 0.5 * (a + a.transpose());
  mv = 0.5 * (mv + mv.transpose());
  const Spectrum v_spec = spectral_decompose(a, mv, "constrained_operator", spaces.cap());

  // Block pieces of the W_*^s Gram on E.
  const Eigen::MatrixXd jt_me = Eigen::MatrixXd(SparseMatrix(spaces.injection().transpose() * spaces.enriched_mass()));
  Eigen::MatrixXd p(jt_me.rows(), jt_me.cols());
  for (Eigen::Index c = 0; c < jt_me.cols(); ++c) p.col(c) = spaces.solve_fe_mass(jt_me.col(c));
  const Eigen::MatrixXd perp_gram = me - jt_me.transpose() * p;
  const Eigen::MatrixXd pn = p * n;
  const Eigen::MatrixXd perp_n = n.transpose() * perp_gram * n;

  std::vector<WvRatio> out;
  for (double s : grid) {
    Eigen::MatrixXd gw = pn.transpose() * fractional_gram(spaces.fe_spectrum(), s) * pn +
                         std::pow(spaces.h(), -2.0 * s) * perp_n;
    Eigen::MatrixXd gv = fractional_gram(v_spec, s);
    gw = 0.5 * (gw + gw.transpose());
    gv = 0.5 * (gv + gv.transpose());
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(gv, gw, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw SolverError("norm-equivalence eigensolve failed");
    const Eigen::VectorXd& ev = es.eigenvalues();
    out.push_back({s, std::sqrt(std::max(0.0, ev[0])), std::sqrt(std::max(0.0, ev[ev.size() - 1]))});
  }
  return out;
}

RitzProjection ritz_star_projection(const StarSpaces& spaces, const Eigen::VectorXd& v) {
  const Eigen::Index ne = spaces.enriched().n_dofs();
  const Eigen::Index nq = spaces.pressure().n_dofs();
  if (v.size() != ne) throw DimensionError("composite vector has the wrong size");
  const Eigen::MatrixXd kstar = spaces.star_operator();
  Eigen::MatrixXd a = Eigen::MatrixXd(constrained_system(spaces, SparseMatrix(ne, ne)));
  a.topLeftCorner(ne, ne) = kstar;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a.rows());
  rhs.head(ne) = kstar * v;
  const Eigen::VectorXd x = a.fullPivLu().solve(rhs);
  return {x.head(ne), x.segment(ne, nq)};
}

std::vector<double> s_grid(double lo, double hi, bool open_lo, bool open_hi) {
  static const double base[] = {-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 0.75, 1.0, 1.5, 2.0};
  std::vector<double> out;
  for (double s : base) {
    if (s < lo || s > hi) continue;
    if (open_lo && s == lo) continue;
    if (open_hi && s == hi) continue;
    out.push_back(s);
  }
  return out;
}

void EquivalenceReport::finalize() {
  std::map<std::pair<std::string, double>, std::pair<double, double>> range;
  for (const auto& r : rows) {
    auto [it, fresh] = range.try_emplace({r.lemma, r.s}, r.value, r.value);
    if (!fresh) {
      it->second.first = std::min(it->second.first, r.value);
      it->second.second = std::max(it->second.second, r.value);
    }
  }
  for (auto& r : rows) std::tie(r.ratio_min, r.ratio_max) = range.at({r.lemma, r.s});
}

std::vector<double> EquivalenceReport::values(const std::string& lemma, double s) const {
  std::vector<double> out;
  for (const auto& r : rows)
    if (r.lemma == lemma && r.s == s) out.push_back(r.value);
  return out;
}

double EquivalenceReport::spread(const std::string& lemma, double s) const {
  const auto v = values(lemma, s);
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi == 0.0 ? 0.0 : *lo / *hi;
}

EquivalenceReport run_spectral_suite(const SpectraSuiteOptions& opt) {
  if (opt.levels < 1) throw ConfigError("levels must be at least 1");
  EquivalenceReport report;
  for (int level = 0; level < opt.levels; ++level) {
    const int n = opt.n0 << level;
    auto mesh = std::make_shared<const Mesh>(Mesh::structured(opt.dim, n, opt.box));
    const StarSpaces spaces(mesh);
    const double h = spaces.h();
    auto add = [&](const std::string& lemma, double s, double value) {
      report.rows.push_back({lemma, s, level, h, value, value, value});
    };

    if (spaces.enriched().n_dofs() <= opt.star_identity_cap) {
      const Eigen::MatrixXd kstar = spaces.star_operator();
      const Spectrum explicit_spec =
          spectral_decompose(kstar, Eigen::MatrixXd(spaces.enriched_mass()), "composite_laplacian", spaces.cap());
      std::mt19937_64 rng(opt.seed + static_cast<std::uint64_t>(level));
      std::normal_distribution<double> normal;
      for (double s : {-1.0, -0.5, 0.0, 0.5, 1.0, 2.0}) {
        double worst = 0.0;
        for (int k = 0; k < opt.random_probes; ++k) {
          Eigen::VectorXd w(spaces.enriched().n_dofs());
          for (Eigen::Index i = 0; i < w.size(); ++i) w[i] = normal(rng);
          const double block = spaces.star_norm(w, s);
          const double direct = fractional_norm(w, s, explicit_spec);
          worst = std::max(worst, std::abs(block - direct) / direct);
        }
        add("star_norm_identity", s, worst);
      }
    }
    for (double s : s_grid(0.0, 1.0)) {
      add("infsup", s, infsup_constant(spaces, s, true));
      add("infsup_plain", s, infsup_constant(spaces, s, false));
      add("inverse_inequality", s, inverse_inequality_constant(spaces.fe_spectrum(), s, h));
    }
    for (double s : s_grid(0.0, 0.5, false, true)) add("leray", s, leray_max_ratio(spaces, s, opt.random_probes, opt.seed));
    if (spaces.enriched().n_dofs() <= opt.wv_cap) {
      for (const auto& r : wv_equivalence(spaces, s_grid(-0.5, 2.0, true, true))) {
        add("wv_lower", r.s, r.ratio_min);
        add("wv_upper", r.s, r.ratio_max);
      }
    }
  }
  report.finalize();
  return report;
}

}  // namespace vmsns
