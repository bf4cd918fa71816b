#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "despeckle/patch_group.hpp"

namespace despeckle {

/// Left singular vectors of a patch-group matrix (the atoms) and the
/// matching singular values in non-increasing order.
struct Dictionary {
  Eigen::MatrixXd basis;            // p^2 x r, orthonormal columns
  Eigen::VectorXd singular_values;  // r, non-increasing, >= 0
  bool degenerate = false;          // all-zero group; basis is the canonical one

  Eigen::Index atoms() const noexcept { return basis.cols(); }
};

/// Thin SVD dictionary, r = min(p^2, k).
Dictionary svd_dictionary(const Eigen::MatrixXd& group_matrix);
Dictionary svd_dictionary(const PatchGroup& group);

/// Column weights w1 (inverse noise scale per patch) and row weights w2
/// (inverse normalized singular value per atom).
struct Weights {
  Eigen::VectorXd w1;  // k
  Eigen::VectorXd w2;  // r
};

inline constexpr double kDefaultSingularFloor = 1e-6;

/// w1_k = 1 / sigma_k; w2_i = 1 / max(S_i / S_1, s_floor), or 1 / s_floor for every atom when S_1 = 0.
Weights build_weights(std::span<const double> sigmas, const Dictionary& dict, double s_floor = kDefaultSingularFloor);

/// All-ones weights; reduces the weighted objective to the plain Lasso.
Weights unit_weights(std::size_t patches, std::size_t atoms);

struct AdmmControls {
  double rho = 1.0;
  int max_iters = 200;
  double tol_primal = 1e-8;
  double tol_dual = 1e-8;
};

struct AdmmReport {
  int iterations = 0;
  bool converged = false;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  std::vector<double> objective_history;  // objective at the sparse iterate, one entry per iteration
};

/// Coefficients alpha (atoms x patches).
struct SparseCode {
  Eigen::MatrixXd alpha;
};

struct LassoSolution {
  SparseCode code;
  AdmmReport report;
};

/// sum_k w1_k^2 ||y_k - D alpha_k||^2 + c * sum_{i,k} w2_i |alpha_ik|
double weighted_objective(const Eigen::MatrixXd& y, const Dictionary& dict, const Weights& w, double c,
                          const Eigen::MatrixXd& alpha);

/// Minimizes weighted_objective by ADMM on the splitting alpha = z. Each
/// column is scaled by 1 / w1_k^2 before splitting (same minimizer, better
/// conditioning), so `rho` is relative to a unit-weight data term. Works for
/// any full-column-rank dictionary. Non-convergence is reported, not thrown.
LassoSolution solve_weighted_lasso_admm(const Eigen::MatrixXd& y, const Dictionary& dict, const Weights& w, double c,
                                        const AdmmControls& ctrl = {});

/// Exact minimizer for an orthonormal dictionary: soft-thresholding of
/// D^T y at tau_ik = c * w2_i / (2 w1_k^2).
SparseCode closed_form_solution(const Eigen::MatrixXd& y, const Dictionary& dict, const Weights& w, double c);

Eigen::MatrixXd reconstruct(const Dictionary& dict, const SparseCode& code);

inline double soft_threshold(double b, double tau) {
  const double mag = (b < 0.0 ? -b : b) - tau;
  if (mag <= 0.0) return 0.0;
  return b < 0.0 ? -mag : mag;
}

}  // namespace despeckle
