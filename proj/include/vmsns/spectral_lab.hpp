#pragma once

#include "vmsns/assembly.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace vmsns {

inline constexpr int kDenseCap = 3000;

/// Generalized eigenpairs K v = lambda M v, ascending, columns M-orthonormal.
struct Spectrum {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;
  Eigen::MatrixXd weighted;  ///< M * eigenvectors; coefficient of w on mode i is weighted.col(i).dot(w)
  std::string tag;

  Eigen::Index size() const { return eigenvalues.size(); }
};

/// Dense generalized symmetric eigensolve. Throws SizeError above `cap` and
/// InputError when M is not positive definite or K is not symmetric.
Spectrum spectral_decompose(const Eigen::MatrixXd& k, const Eigen::MatrixXd& m, std::string tag = {},
                            int cap = kDenseCap);
Spectrum spectral_decompose(const SparseMatrix& k, const SparseMatrix& m, std::string tag = {}, int cap = kDenseCap);

/// (sum_i lambda_i^s (v_i^T M w)^2)^{1/2}.
double fractional_norm(const Eigen::VectorXd& w, double s, const Spectrum& spec);

/// Gram matrix of the W_h^s norm: M V diag(lambda^s) V^T M.
Eigen::MatrixXd fractional_gram(const Spectrum& spec, double s);

/// (|w_fe|_{W_h^s}^2 + h^{-2s} |w_perp|^2)^{1/2}, with w_perp given in an
/// L2-orthonormal complement basis.
double star_norm(const Eigen::VectorXd& w_fe, const Eigen::VectorXd& w_perp, double s, double h, const Spectrum& spec);

/// max_i (1 + lambda_i)^{1/2} lambda_i^{-s/2} h^{1-s}.
double inverse_inequality_constant(const Spectrum& spec, double s, double h);

/// Composite space W_* = W_h (+) complement, the complement being the L2-orthogonal
/// complement of W_h inside the zero-trace vector P2 space E on the same mesh.
/// Elements of W_* are stored as E coefficients. Pressure space: scalar P1
/// with the constant mode removed spectrally.
class StarSpaces {
public:
  explicit StarSpaces(std::shared_ptr<const Mesh> mesh, int cap = kDenseCap);
  StarSpaces(const StarSpaces&) = delete;
  StarSpaces& operator=(const StarSpaces&) = delete;

  const Mesh& mesh() const noexcept { return *mesh_; }
  double h() const noexcept { return mesh_->h_max(); }
  int cap() const noexcept { return cap_; }

  const FeSpace& fe() const noexcept { return fe_; }
  const FeSpace& enriched() const noexcept { return enriched_; }
  const FeSpace& pressure() const noexcept { return pressure_; }

  /// E coefficients of W_h functions: n_E x n_W.
  const SparseMatrix& injection() const noexcept { return injection_; }
  const SparseMatrix& fe_mass() const noexcept { return fe_mass_; }
  const SparseMatrix& fe_stiffness() const noexcept { return fe_stiffness_; }
  const SparseMatrix& enriched_mass() const noexcept { return enriched_mass_; }
  /// (e_i, grad psi_j), n_E x n_Q.
  const SparseMatrix& enriched_coupling() const noexcept { return enriched_coupling_; }
  /// (phi_i, grad psi_j), n_W x n_Q.
  const SparseMatrix& fe_coupling() const noexcept { return fe_coupling_; }
  const SparseMatrix& pressure_mass() const noexcept { return pressure_mass_; }
  const SparseMatrix& pressure_stiffness() const noexcept { return pressure_stiffness_; }
  Eigen::VectorXd pressure_mean() const { return pressure_.mean_weights(); }

  /// Dirichlet spectrum of -Delta_h on W_h (cached).
  const Spectrum& fe_spectrum() const;
  /// Neumann spectrum on Q_h without the constant mode (cached).
  const Spectrum& pressure_spectrum() const;

  /// W_h coefficients of pi_{W_h} w.
  Eigen::VectorXd project_fe(const Eigen::VectorXd& w) const;
  /// E coefficients of pi_perp w.
  Eigen::VectorXd complement(const Eigen::VectorXd& w) const;
  Eigen::VectorXd solve_enriched_mass(const Eigen::VectorXd& rhs) const;
  Eigen::VectorXd solve_fe_mass(const Eigen::VectorXd& rhs) const;

  /// Block evaluation of |w|_{W_*^s}.
  double star_norm(const Eigen::VectorXd& w, double s) const;

  /// Dense -Delta_* on E: P^T K_W P + h^-2 (M_E - M_E J M_W^-1 J^T M_E), P = pi_{W_h}.
  Eigen::MatrixXd star_operator() const;
  /// M_E-orthonormal basis of the complement (columns, E coefficients); dense, cached.
  const Eigen::MatrixXd& complement_basis() const;

private:
  std::shared_ptr<const Mesh> mesh_;
  int cap_;
  FeSpace fe_;
  FeSpace enriched_;
  FeSpace pressure_;
  SparseMatrix injection_;
  SparseMatrix fe_mass_;
  SparseMatrix fe_stiffness_;
  SparseMatrix enriched_mass_;
  SparseMatrix enriched_coupling_;
  SparseMatrix fe_coupling_;
  SparseMatrix pressure_mass_;
  SparseMatrix pressure_stiffness_;
  Eigen::SimplicialLDLT<SparseMatrix> fe_mass_solver_;
  Eigen::SimplicialLDLT<SparseMatrix> enriched_mass_solver_;

  mutable std::mutex cache_mutex_;
  mutable std::optional<Spectrum> fe_spectrum_;
  mutable std::optional<Spectrum> pressure_spectrum_;
  mutable std::optional<Eigen::MatrixXd> complement_basis_;
};

/// beta(h, s): smallest ratio sup_w (grad q, w) / |w|_{W_*^{1-s}} over |q|_{H^s}.
/// Without the complement the supremum runs over W_h only.
double infsup_constant(const StarSpaces& spaces, double s, bool with_complement = true);

struct LerayProjection {
  Eigen::VectorXd projected;   ///< E coefficients of P_* v
  Eigen::VectorXd multiplier;  ///< pressure-space r
};

/// L2 projection of v (E coefficients) onto {w in E : (w, grad q) = 0 for all q}.
LerayProjection leray_star_projection(const StarSpaces& spaces, const Eigen::VectorXd& v);

/// |P_* v|_{W_*^s} / |v|_{W_*^s}.
double leray_star_stability(const StarSpaces& spaces, const Eigen::VectorXd& v, double s);

/// Max ratio over a fixed probe set: `random_probes` Gaussian vectors (seeded)
/// plus a smooth vortex field and the projected gradient of a smooth pressure.
double leray_max_ratio(const StarSpaces& spaces, double s, int random_probes = 20, std::uint64_t seed = 1234);

/// Orthonormal basis (Euclidean) of the kernel of v -> ((v, grad psi_j))_j on E.
Eigen::MatrixXd constraint_nullspace(const StarSpaces& spaces);

struct WvRatio {
  double s = 0.0;
  double ratio_min = 0.0;  ///< min over V_* of |v|_{V^s} / |v|_{W^s}
  double ratio_max = 0.0;
};

/// Extremal ratios between the V_*^s norm (spectral powers of A_* restricted
/// to V_*) and the W_*^s norm on V_*.
std::vector<WvRatio> wv_equivalence(const StarSpaces& spaces, const std::vector<double>& s_grid);

struct RitzProjection {
  Eigen::VectorXd projected;   ///< E coefficients of R_* v
  Eigen::VectorXd multiplier;  ///< r
};

/// Stabilized Ritz projection: A_* (R v - v) + grad r = 0, R v in V_*.
RitzProjection ritz_star_projection(const StarSpaces& spaces, const Eigen::VectorXd& v);

/// Default s grid, clipped to [lo, hi] (open ends excluded when `open`).
std::vector<double> s_grid(double lo, double hi, bool open_lo = false, bool open_hi = false);

struct EquivalenceRow {
  std::string lemma;
  double s = 0.0;
  int level = 0;
  double h = 0.0;
  double value = 0.0;
  double ratio_min = 0.0;  ///< min of value across levels for (lemma, s)
  double ratio_max = 0.0;
};

struct EquivalenceReport {
  std::vector<EquivalenceRow> rows;

  /// Fills ratio_min / ratio_max per (lemma, s) group.
  void finalize();
  std::vector<double> values(const std::string& lemma, double s) const;
  /// min / max of the values of a group (0 when empty or max = 0).
  double spread(const std::string& lemma, double s) const;
};

struct SpectraSuiteOptions {
  int dim = 2;
  int n0 = 4;
  int levels = 3;
  Box box = Box::unit();
  int random_probes = 20;
  std::uint64_t seed = 1234;
  int star_identity_cap = 500;  ///< max E dofs for the explicit-operator comparison
  int wv_cap = 500;
};

EquivalenceReport run_spectral_suite(const SpectraSuiteOptions& options);

}  // namespace vmsns
