#pragma once

// Closed-form penalized least-squares estimators: the uniform functional
// ridge estimator (FRE), the two-block full model (FRFM) and the relevant-only
// sub-model (FRSM), with the hat-matrix trace, conditioning and the exact
// bias/variance split of the integrated squared error.

#include "frr/design.hpp"

#include <Eigen/Cholesky>

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace frr {

enum class EstimatorKind { FRE, FRFM, FRSM };

std::string_view to_string(EstimatorKind kind);
/// Case-insensitive; throws ValidationError for unknown names.
EstimatorKind parse_estimator(std::string_view name);

/// Cholesky factorization of A = Z'Z + P, shared by solves, hat traces and
/// variance computations. Construction fails loudly (ConditioningError) when
/// A is not numerically positive definite; no pseudoinverse fallback.
class PenalizedSystem {
 public:
  PenalizedSystem(const Matrix& Z, const Matrix& P);

  /// A^{-1} rhs, iteratively refined while the residual keeps shrinking.
  Vector solve(const Vector& rhs) const;
  /// (Z'Z + P)^{-1} Z'y.
  Vector fit(const Vector& y) const;
  /// tr(Z A^{-1} Z') without forming the n x n smoother.
  double hat_trace() const;
  /// A^{-1} Z', the map from responses to coefficients.
  Matrix coefficient_map() const;

  const Matrix& design() const noexcept { return Z_; }
  const Matrix& cross_product() const noexcept { return ZtZ_; }
  const Matrix& system_matrix() const noexcept { return A_; }

 private:
  Matrix Z_;
  Matrix ZtZ_;
  Matrix A_;
  Vector scale_;  ///< diag(A)^{-1/2}
  Eigen::LLT<Matrix> llt_;

  Vector solve_once(const Vector& rhs) const;
};

struct FitResult {
  EstimatorKind kind = EstimatorKind::FRE;
  Vector b_hat;
  std::vector<Vector> b_blocks;  ///< per predictor; empty for excluded predictors
  Matrix beta_hat_grid;          ///< p x M, row j = basis_matrix * b_blocks[j]
  std::optional<double> lambda1, lambda2, lambda3;
  double edf = 0.0;
  double residual_ss = 0.0;
  double log10_condition = 0.0;
};

/// b = (Z'Z + P)^{-1} Z'y.
Vector solve_penalized(const Matrix& Z, const Vector& y, const Matrix& P);

/// ||(Z'Z + P) b - Z'y|| / ||Z'y||.
double normal_equation_residual(const Matrix& Z, const Vector& y, const Matrix& P, const Vector& b);

FitResult fit_fre(const DesignSystem& system, double lambda1);
/// `system` has a relevant block and optionally a nuisance block; lambda2 >= lambda1.
FitResult fit_frfm(const DesignSystem& system, double lambda1, double lambda2);
/// `system` is restricted to the relevant predictors.
FitResult fit_frsm(const DesignSystem& system, double lambda3);

/// Solve with an arbitrary penalty and package the result.
FitResult fit_with_penalty(const DesignSystem& system, const Matrix& P, EstimatorKind kind);

double hat_matrix_trace(const Matrix& Z, const Matrix& P);
/// Dense smoother S = Z (Z'Z + P)^{-1} Z'.
Matrix hat_matrix(const Matrix& Z, const Matrix& P);

/// lambda_max / lambda_min of Z'Z + P; +inf when lambda_min <= 0.
double condition_number(const Matrix& Z, const Matrix& P);

struct ImseDecomposition {
  double bias_sq = 0.0;
  double variance = 0.0;
  double total = 0.0;
};

/// Expected ||b_hat - b_true||_G^2 under y = Z b_true + eps, eps ~ N(0, sigma2 I).
ImseDecomposition imse_decomposition(const Matrix& Z, const Matrix& P, const Matrix& G,
                                     const Vector& b_true, double sigma2);

/// p x M matrix of coefficient functions on the system grid.
Matrix reconstruct_functions(const DesignSystem& system, const Vector& b);

}  // namespace frr
