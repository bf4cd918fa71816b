#include "despeckle/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include "despeckle/errors.hpp"

namespace despeckle {

namespace {

void check_shapes(const Eigen::MatrixXd& y, const Dictionary& dict, const Weights& w) {
  if (dict.basis.rows() != y.rows()) throw SizeError("dictionary rows do not match the patch length");
  if (w.w1.size() != y.cols()) throw SizeError("w1 length does not match the number of patches");
  if (w.w2.size() != dict.atoms()) throw SizeError("w2 length does not match the number of atoms");
}

void check_regularization(double c) {
  if (!(c >= 0.0) || !std::isfinite(c)) throw ParameterError("regularization c must be finite and >= 0");
}

}  // namespace

Dictionary svd_dictionary(const Eigen::MatrixXd& group_matrix) {
  if (group_matrix.size() == 0) throw ParameterError("svd_dictionary: empty group");
  const Eigen::Index n = group_matrix.rows();
  const Eigen::Index r = std::min(n, group_matrix.cols());

  Dictionary dict;
  if (group_matrix.cwiseAbs().maxCoeff() == 0.0) {
    dict.basis = Eigen::MatrixXd::Identity(n, r);
    dict.singular_values = Eigen::VectorXd::Zero(r);
    dict.degenerate = true;
    return dict;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(group_matrix, Eigen::ComputeThinU);
  dict.basis = svd.matrixU();
  dict.singular_values = svd.singularValues();
  return dict;
}

Dictionary svd_dictionary(const PatchGroup& group) { return svd_dictionary(group.patches); }

Weights build_weights(std::span<const double> sigmas, const Dictionary& dict, double s_floor) {
  if (!(s_floor > 0.0)) throw ParameterError("singular value floor must be positive");
  Weights w;
  w.w1.resize(static_cast<Eigen::Index>(sigmas.size()));
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    if (!(sigmas[k] > 0.0) || !std::isfinite(sigmas[k])) {
      throw ParameterError("noise scale " + std::to_string(k) + " must be positive and finite");
    }
    w.w1(static_cast<Eigen::Index>(k)) = 1.0 / sigmas[k];
  }
  const Eigen::Index r = dict.singular_values.size();
  w.w2.resize(r);
  const double top = r > 0 ? dict.singular_values(0) : 0.0;
  for (Eigen::Index i = 0; i < r; ++i) {
    const double scaled = top > 0.0 ? std::max(dict.singular_values(i) / top, s_floor) : s_floor;
    w.w2(i) = 1.0 / scaled;
  }
  return w;
}

Weights unit_weights(std::size_t patches, std::size_t atoms) {
  return {Eigen::VectorXd::Ones(static_cast<Eigen::Index>(patches)),
          Eigen::VectorXd::Ones(static_cast<Eigen::Index>(atoms))};
}

double weighted_objective(const Eigen::MatrixXd& y, const Dictionary& dict, const Weights& w, double c,
                          const Eigen::MatrixXd& alpha) {
  check_shapes(y, dict, w);
  const Eigen::MatrixXd residual = dict.basis * alpha - y;
  double data = 0.0;
  for (Eigen::Index k = 0; k < y.cols(); ++k) data += w.w1(k) * w.w1(k) * residual.col(k).squaredNorm();
  const double penalty = (w.w2.asDiagonal() * alpha.cwiseAbs()).sum();
  return data + c * penalty;
}

LassoSolution solve_weighted_lasso_admm(const Eigen::MatrixXd& y, const Dictionary& dict, const Weights& w, double c,
                                        const AdmmControls& ctrl) {
  check_shapes(y, dict, w);
  check_regularization(c);
  if (!(ctrl.rho > 0.0)) throw ParameterError("ADMM rho must be positive");
  if (ctrl.max_iters < 1) throw ParameterError("ADMM max_iters must be >= 1");

  const Eigen::Index r = dict.atoms();
  const Eigen::Index k = y.cols();
  const double rho = ctrl.rho;

  const Eigen::MatrixXd gram = dict.basis.transpose() * dict.basis;
  const Eigen::MatrixXd projected = dict.basis.transpose() * y;
  Eigen::VectorXd y_energy(k);
  for (Eigen::Index j = 0; j < k; ++j) y_energy(j) = y.col(j).squaredNorm();

  // Column j, divided by w1_j^2: ||D a - y_j||^2 + sum_i thresh(i, j) |a_i|.
  Eigen::MatrixXd thresh(r, k);
  for (Eigen::Index j = 0; j < k; ++j) {
    const double inv = 1.0 / (w.w1(j) * w.w1(j));
    for (Eigen::Index i = 0; i < r; ++i) thresh(i, j) = c * w.w2(i) * inv;
  }

  const Eigen::LLT<Eigen::MatrixXd> system(2.0 * gram + rho * Eigen::MatrixXd::Identity(r, r));
  if (system.info() != Eigen::Success) throw DomainError("ADMM: dictionary Gram matrix is not positive definite");
  const Eigen::MatrixXd rhs_data = 2.0 * projected;

  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(r, k);
  Eigen::MatrixXd z = Eigen::MatrixXd::Zero(r, k);
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(r, k);
  Eigen::MatrixXd z_prev(r, k);

  const auto objective_at = [&](const Eigen::MatrixXd& a) {
    double total = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const auto col = a.col(j);
      const double data = col.dot(gram * col) - 2.0 * col.dot(projected.col(j)) + y_energy(j);
      total += w.w1(j) * w.w1(j) * std::max(data, 0.0);
    }
    return total + c * (w.w2.asDiagonal() * a.cwiseAbs()).sum();
  };

  const double problem_scale = projected.norm();
  LassoSolution out;
  auto& report = out.report;
  report.objective_history.reserve(static_cast<std::size_t>(ctrl.max_iters));

  for (int it = 1; it <= ctrl.max_iters; ++it) {
    alpha = system.solve(rhs_data + rho * (z - u));
    z_prev = z;
    for (Eigen::Index j = 0; j < k; ++j) {
      for (Eigen::Index i = 0; i < r; ++i) z(i, j) = soft_threshold(alpha(i, j) + u(i, j), thresh(i, j) / rho);
    }
    u += alpha - z;

    report.iterations = it;
    report.primal_residual = (alpha - z).norm();
    report.dual_residual = rho * (z - z_prev).norm();
    report.objective_history.push_back(objective_at(z));

    const double primal_scale = std::max({alpha.norm(), z.norm(), problem_scale});
    const double dual_scale = std::max(rho * u.norm(), problem_scale);
    if (report.primal_residual <= ctrl.tol_primal * primal_scale &&
        report.dual_residual <= ctrl.tol_dual * dual_scale) {
      report.converged = true;
      break;
    }
  }
  out.code.alpha = std::move(z);
  return out;
}

SparseCode closed_form_solution(const Eigen::MatrixXd& y, const Dictionary& dict, const Weights& w, double c) {
  check_shapes(y, dict, w);
  check_regularization(c);
  const Eigen::Index r = dict.atoms();
  const Eigen::MatrixXd gram = dict.basis.transpose() * dict.basis;
  if ((gram - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() > 1e-8) {
    throw DomainError("closed_form_solution requires an orthonormal dictionary");
  }
  const Eigen::MatrixXd beta = dict.basis.transpose() * y;
  SparseCode code;
  code.alpha.resize(r, y.cols());
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    const double inv = 1.0 / (w.w1(j) * w.w1(j));
    for (Eigen::Index i = 0; i < r; ++i) code.alpha(i, j) = soft_threshold(beta(i, j), 0.5 * c * w.w2(i) * inv);
  }
  return code;
}

Eigen::MatrixXd reconstruct(const Dictionary& dict, const SparseCode& code) {
  if (dict.atoms() != code.alpha.rows()) throw SizeError("reconstruct: code rows do not match the number of atoms");
  return dict.basis * code.alpha;
}

}  // namespace despeckle
