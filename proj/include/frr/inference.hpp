#pragma once

// Plug-in variance and normal confidence intervals for linear functionals
// Psi(x) = sum_j integral x_j(s) beta_j(s) ds of the coefficient functions.

#include "frr/design.hpp"
#include "frr/estimators.hpp"

namespace frr {

struct InferenceResult {
  double psi_hat = 0.0;
  double variance_hat = 0.0;  ///< sigma2_hat * w' M^{-1} G_n M^{-1} w
  double sigma2_hat = 0.0;
  double edf = 0.0;
  double level = 0.95;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int n = 0;
};

/// Standard normal quantile: Acklam's rational approximation (relative error
/// below 1.2e-9) polished by one Halley step on erfc, giving close to full
/// double precision on (0, 1).
double normal_quantile(double prob);

/// ||y - Z b||^2 / (n - tr S). Throws DegenerateError when tr S >= n.
double sigma2_hat(const DesignSystem& system, const FitResult& fit);

/// Stacked quadrature inner products <x_j, psi_k> in the layout's column
/// order. `x` is p x M on the system grid.
Vector functional_weights(const Matrix& x, const DesignSystem& system);

/// sigma2 * w' V w with G_n = Z'Z/n, M = G_n + P/n, V = M^{-1} G_n M^{-1}.
double variance_of_functional(const Matrix& Z, const Matrix& P, double sigma2, const Vector& w);

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// psi_hat -/+ z sqrt(variance_hat / n), z the (1 + level)/2 normal quantile.
Interval confidence_interval(double psi_hat, double variance_hat, int n, double level);

/// Which blocks enter G_n and M_n for FRFM inference.
enum class InferenceMode {
  FullModel,      ///< every block of the fitted system
  RelevantBlock,  ///< strong-shrinkage regime: nuisance block dropped first
};

/// End-to-end inference for a fitted system and penalty.
InferenceResult infer_functional(const DesignSystem& system, const FitResult& fit, const Matrix& P,
                                 const Matrix& x, double level, InferenceMode mode = InferenceMode::FullModel);

}  // namespace frr
