#include "oracle.hpp"

#include "vmsns/errors.hpp"
#include "vmsns/spectral_lab.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>

using namespace vmsns;

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

MatrixXd dense(const SparseMatrix& a) { return MatrixXd(a); }

struct GenEig {
  VectorXd values;
  MatrixXd vectors;  // M-orthonormal
};

GenEig gen_eig(const MatrixXd& k, const MatrixXd& m) {
  Eigen::GeneralizedSelfAdjointEigenSolver<MatrixXd> es(k, m);
  return {es.eigenvalues(), es.eigenvectors()};
}

// -Delta_* assembled from the defining formula with dense algebra.
MatrixXd explicit_star(const StarSpaces& sp) {
  const MatrixXd j = dense(sp.injection()), mw = dense(sp.fe_mass()), me = dense(sp.enriched_mass());
  const MatrixXd kw = dense(sp.fe_stiffness());
  const MatrixXd p = mw.ldlt().solve(j.transpose() * me);
  const double h = sp.h();
  return p.transpose() * kw * p + (me - me * j * p) / (h * h);
}

// Gram matrix of sum_i lambda_i^s (v_i^T M x)^2.
MatrixXd power_gram(const GenEig& e, const MatrixXd& m, double s) {
  VectorXd d(e.values.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::pow(e.values[i], s);
  return m * e.vectors * d.asDiagonal() * e.vectors.transpose() * m;
}

double oracle_infsup(const StarSpaces& sp, double s, bool complement) {
  MatrixXd b, g_inv;
  if (complement) {
    const MatrixXd me = dense(sp.enriched_mass());
    const GenEig e = gen_eig(explicit_star(sp), me);
    VectorXd d(e.values.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::pow(e.values[i], s - 1.0);
    g_inv = e.vectors * d.asDiagonal() * e.vectors.transpose();
    b = dense(sp.enriched_coupling());
  } else {
    const GenEig e = gen_eig(dense(sp.fe_stiffness()), dense(sp.fe_mass()));
    VectorXd d(e.values.size());
    for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = std::pow(e.values[i], s - 1.0);
    g_inv = e.vectors * d.asDiagonal() * e.vectors.transpose();
    b = dense(sp.fe_coupling());
  }
  const GenEig q = gen_eig(dense(sp.pressure_stiffness()), dense(sp.pressure_mass()));
  const Eigen::Index nq = q.values.size() - 1;
  const MatrixXd u = q.vectors.rightCols(nq);
  VectorXd scale(nq);
  for (Eigen::Index i = 0; i < nq; ++i) scale[i] = std::pow(q.values[i + 1], -0.5 * s);
  MatrixXd r = scale.asDiagonal() * u.transpose() * b.transpose() * g_inv * b * u * scale.asDiagonal();
  r = 0.5 * (r + r.transpose());
  return std::sqrt(std::max(0.0, Eigen::SelfAdjointEigenSolver<MatrixXd>(r).eigenvalues()[0]));
}

std::shared_ptr<const Mesh> square(int n) { return std::make_shared<const Mesh>(Mesh::structured(2, n)); }

}  // namespace

TEST(Spectral, DecomposeClosedForm) {
  MatrixXd k(2, 2), m(2, 2);
  k << 2, 1, 1, 2;
  m = MatrixXd::Identity(2, 2);
  const Spectrum s = spectral_decompose(k, m);
  EXPECT_NEAR(s.eigenvalues[0], 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[1], 3.0, 1e-14);
  m << 2, 0, 0, 2;
  const Spectrum t = spectral_decompose(k, m);
  EXPECT_NEAR(t.eigenvalues[1], 1.5, 1e-14);
  EXPECT_LT((t.eigenvectors.transpose() * m * t.eigenvectors - MatrixXd::Identity(2, 2)).norm(), 1e-14);
  EXPECT_LT((t.weighted - m * t.eigenvectors).norm(), 1e-14);
}

TEST(Spectral, DecomposeRejectsBadInput) {
  MatrixXd k = MatrixXd::Identity(3, 3), m = MatrixXd::Identity(3, 3);
  m(2, 2) = -1.0;
  EXPECT_THROW(spectral_decompose(k, m), InputError);
  m = MatrixXd::Identity(3, 3);
  k(0, 1) = 1.0;
  EXPECT_THROW(spectral_decompose(k, m), InputError);
  EXPECT_THROW(spectral_decompose(MatrixXd::Identity(3, 3), m, "big", 2), SizeError);
}

TEST(Spectral, FractionalNormEndpoints) {
  StarSpaces sp(square(4));
  const Spectrum& spec = sp.fe_spectrum();
  const VectorXd w = oracle::random_vector(sp.fe().n_dofs(), 201);
  EXPECT_NEAR(fractional_norm(w, 0.0, spec), std::sqrt(w.dot(sp.fe_mass() * w)), 1e-12);
  EXPECT_NEAR(fractional_norm(w, 1.0, spec), std::sqrt(w.dot(sp.fe_stiffness() * w)), 1e-10);
  EXPECT_NEAR(std::pow(fractional_norm(w, 0.5, spec), 2), w.dot(fractional_gram(spec, 0.5) * w), 1e-10);
  // Interpolation between the endpoints.
  const double a = fractional_norm(w, 0.0, spec), b = fractional_norm(w, 1.0, spec);
  EXPECT_LE(fractional_norm(w, 0.5, spec), std::sqrt(a * b) * (1 + 1e-12));
  EXPECT_EQ(star_norm(VectorXd::Zero(w.size()), VectorXd::Zero(0), 0.5, sp.h(), spec), 0.0);
  const VectorXd perp = oracle::random_vector(5, 202);
  EXPECT_NEAR(star_norm(VectorXd::Zero(w.size()), perp, 0.5, 0.25, spec), perp.norm() / 0.5, 1e-14);
}

TEST(Spectral, SpacesShape) {
  StarSpaces sp(square(2));
  EXPECT_EQ(sp.fe().n_dofs(), 2);
  EXPECT_EQ(sp.enriched().n_dofs(), 2 * 9);
  EXPECT_EQ(sp.pressure_spectrum().size(), 8);
  EXPECT_EQ(sp.complement_basis().cols(), 16);
  // Injection reproduces W_h functions exactly.
  const VectorXd w = oracle::random_vector(sp.fe().n_dofs(), 203);
  const VectorXd e = sp.injection() * w;
  EXPECT_NEAR(e.dot(sp.enriched_mass() * e), w.dot(sp.fe_mass() * w), 1e-13);
  EXPECT_LT((sp.project_fe(e) - w).lpNorm<Eigen::Infinity>(), 1e-12);
  EXPECT_LT(sp.complement(e).lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Spectral, StarOperatorMatchesExplicitOracle) {
  StarSpaces sp(square(3));
  const MatrixXd k = explicit_star(sp);
  EXPECT_LT((sp.star_operator() - k).norm(), 1e-9 * k.norm());
  const MatrixXd me = dense(sp.enriched_mass());
  const GenEig e = gen_eig(k, me);
  for (double s : {0.0, 0.25, 0.5, 1.0, 1.5}) {
    for (unsigned seed : {204u, 205u}) {
      const VectorXd w = oracle::random_vector(sp.enriched().n_dofs(), seed);
      const double expected = std::sqrt(w.dot(power_gram(e, me, s) * w));
      EXPECT_NEAR(sp.star_norm(w, s), expected, 1e-9 * expected) << s;
    }
  }
}

TEST(Spectral, ComplementBasisIsOrthonormal) {
  StarSpaces sp(square(3));
  const MatrixXd& c = sp.complement_basis();
  const MatrixXd me = dense(sp.enriched_mass());
  EXPECT_LT((c.transpose() * me * c - MatrixXd::Identity(c.cols(), c.cols())).norm(), 1e-10);
  EXPECT_LT((dense(sp.injection()).transpose() * me * c).norm(), 1e-10);
  EXPECT_EQ(c.cols(), sp.enriched().n_dofs() - sp.fe().n_dofs());
}

TEST(Spectral, InverseInequalityClosedForm) {
  StarSpaces sp(square(4));
  const Spectrum& spec = sp.fe_spectrum();
  const double h = sp.h();
  for (double s : {0.0, 0.5}) {
    double expected = 0.0;
    for (Eigen::Index i = 0; i < spec.size(); ++i) {
      const double l = spec.eigenvalues[i];
      expected = std::max(expected, std::sqrt(1 + l) * std::pow(l, -s / 2) * std::pow(h, 1 - s));
    }
    EXPECT_NEAR(inverse_inequality_constant(spec, s, h), expected, 1e-12 * expected);
  }
}

TEST(Spectral, InfSupMatchesDenseOracle) {
  StarSpaces sp(square(3));
  for (double s : {0.0, 0.5, 1.0}) {
    const double b = infsup_constant(sp, s);
    EXPECT_NEAR(b, oracle_infsup(sp, s, true), 1e-8) << s;
    EXPECT_GT(b, 0.1);
    EXPECT_NEAR(infsup_constant(sp, s, false), oracle_infsup(sp, s, false), 1e-8) << s;
  }
}

TEST(Spectral, LerayProjectionProperties) {
  StarSpaces sp(square(4));
  const VectorXd v = oracle::random_vector(sp.enriched().n_dofs(), 206);
  const LerayProjection p = leray_star_projection(sp, v);
  const MatrixXd b = dense(sp.enriched_coupling());
  EXPECT_LT((b.transpose() * p.projected).lpNorm<Eigen::Infinity>(), 1e-11);
  // v - Pv is a gradient: M_E (v - Pv) = B r.
  EXPECT_LT((sp.enriched_mass() * (v - p.projected) - b * p.multiplier).lpNorm<Eigen::Infinity>(), 1e-11);
  EXPECT_LT((leray_star_projection(sp, p.projected).projected - p.projected).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_LE(leray_star_stability(sp, v, 0.0), 1.0 + 1e-12);
  EXPECT_NEAR(leray_max_ratio(sp, 0.0, 5), 1.0, 1e-10);
  EXPECT_THROW(leray_star_projection(sp, VectorXd::Zero(3)), DimensionError);
}

TEST(Spectral, ConstraintNullspace) {
  StarSpaces sp(square(3));
  const MatrixXd n = constraint_nullspace(sp);
  const MatrixXd b = dense(sp.enriched_coupling());
  EXPECT_LT((b.transpose() * n).norm(), 1e-10);
  EXPECT_LT((n.transpose() * n - MatrixXd::Identity(n.cols(), n.cols())).norm(), 1e-10);
  Eigen::FullPivLU<MatrixXd> lu(b);
  lu.setThreshold(1e-10);
  EXPECT_EQ(n.cols(), b.rows() - lu.rank());
}

TEST(Spectral, WvEquivalenceEndpoints) {
  StarSpaces sp(square(3));
  for (const auto& r : wv_equivalence(sp, {0.0, 1.0})) {
    EXPECT_NEAR(r.ratio_min, 1.0, 1e-8) << r.s;
    EXPECT_NEAR(r.ratio_max, 1.0, 1e-8) << r.s;
  }
  const auto mid = wv_equivalence(sp, {0.5});
  EXPECT_LE(mid[0].ratio_min, mid[0].ratio_max);
  EXPECT_GT(mid[0].ratio_min, 0.0);
}

TEST(Spectral, RitzProjectionSolvesSaddleSystem) {
  StarSpaces sp(square(3));
  const VectorXd v = oracle::random_vector(sp.enriched().n_dofs(), 207);
  const RitzProjection r = ritz_star_projection(sp, v);
  const MatrixXd k = explicit_star(sp);
  const MatrixXd b = dense(sp.enriched_coupling());
  EXPECT_LT((b.transpose() * r.projected).lpNorm<Eigen::Infinity>(), 1e-10);
  EXPECT_LT((k * (r.projected - v) + b * r.multiplier).lpNorm<Eigen::Infinity>(), 1e-8 * k.norm());
  // Divergence-free input is reproduced.
  const VectorXd w = leray_star_projection(sp, v).projected;
  EXPECT_LT((ritz_star_projection(sp, w).projected - w).lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(Spectral, SGridAndReport) {
  EXPECT_EQ(s_grid(0.0, 1.0), (std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0}));
  EXPECT_EQ(s_grid(0.0, 0.5, false, true), (std::vector<double>{0.0, 0.25}));
  EquivalenceReport rep;
  rep.rows.push_back({"x", 0.5, 0, 0.1, 2.0});
  rep.rows.push_back({"x", 0.5, 1, 0.05, 4.0});
  rep.finalize();
  EXPECT_DOUBLE_EQ(rep.spread("x", 0.5), 0.5);
  EXPECT_DOUBLE_EQ(rep.rows[0].ratio_min, 2.0);
  EXPECT_DOUBLE_EQ(rep.rows[1].ratio_max, 4.0);
  EXPECT_EQ(rep.spread("y", 0.5), 0.0);
}

TEST(Spectral, SmallSuiteRuns) {
  SpectraSuiteOptions opt;
  opt.n0 = 2;
  opt.levels = 2;
  opt.random_probes = 3;
  const EquivalenceReport rep = run_spectral_suite(opt);
  for (double v : rep.values("star_norm_identity", 0.5)) EXPECT_LT(v, 1e-10);
  EXPECT_EQ(rep.values("infsup", 0.0).size(), 2u);
  EXPECT_EQ(rep.values("leray", 0.0).size(), 2u);
  EXPECT_FALSE(rep.values("wv_lower", 0.5).empty());
}
