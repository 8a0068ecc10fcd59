#pragma once

// Generalized cross-validation over a log-spaced penalty grid.

#include "frr/design.hpp"

#include <functional>
#include <vector>

namespace frr {

/// `count` log-equispaced values over [lo, hi].
struct LambdaGrid {
  double lo = 1e-4;
  double hi = 1e4;
  int count = 50;

  void validate() const;
  std::vector<double> values() const;
};

struct GcvPoint {
  double score = 0.0;  ///< +inf when the smoother is degenerate or the solve failed
  double edf = 0.0;
  double rss = 0.0;
};

struct GcvTrace {
  std::vector<double> grid;
  std::vector<double> scores;
  std::vector<double> edf;
  int chosen_index = -1;
  double chosen_lambda = 0.0;

  double chosen_score() const { return scores.at(static_cast<std::size_t>(chosen_index)); }
};

using PenaltyBuilder = std::function<Matrix(double)>;

/// (||y - S y||^2 / n) / (1 - tr(S)/n)^2 with tr(S) from the Cholesky factor.
GcvPoint gcv_score(const Matrix& Z, const Vector& y, const Matrix& P);

/// n ||y - S y||^2 / (n - tr S)^2 with S formed explicitly. Cross-check path.
GcvPoint gcv_score_dense(const Matrix& Z, const Vector& y, const Matrix& P);

/// Evaluates every grid point in order; the minimizer wins, ties go to the
/// smaller lambda. Throws SelectionError when no score is finite.
GcvTrace select_lambda(const Matrix& Z, const Vector& y, const PenaltyBuilder& penalty,
                       std::span<const double> grid);

/// Uniform penalty lambda * R over every block (FRE, and FRSM on a restricted system).
GcvTrace tune_uniform(const DesignSystem& system, const LambdaGrid& grid);

/// GCV over lambda1 with the nuisance block penalized by ratio_c * lambda1.
GcvTrace tune_frfm(const DesignSystem& system, double ratio_c, const LambdaGrid& grid);

}  // namespace frr
