#pragma once

// Applied fitting pipeline for user datasets: design construction, GCV
// tuning, the adaptive-ridge partition and the requested estimators.

#include "frr/design.hpp"
#include "frr/estimators.hpp"
#include "frr/inference.hpp"
#include "frr/partition.hpp"
#include "frr/tuning.hpp"

#include <optional>
#include <string>
#include <vector>

namespace frr {

/// Basis layout without a domain; the domain is taken from the data grid.
struct KnotLayout {
  int order = 4;
  int interior_knots = 7;

  BasisSpec on(double lo, double hi) const { return {lo, hi, order, interior_knots}; }
};

struct FitConfig {
  std::vector<EstimatorKind> estimators{EstimatorKind::FRE, EstimatorKind::FRFM, EstimatorKind::FRSM};
  KnotLayout fre_basis{4, 7};
  KnotLayout relevant_basis{4, 5};
  KnotLayout nuisance_basis{4, 3};
  KnotLayout frsm_basis{4, 5};
  double ratio_c = 25.0;
  LambdaGrid lambda_grid;
  PartitionOptions partition;
  /// Predictor indices treated as relevant by FRSM; the estimated partition
  /// is used when unset.
  std::optional<std::vector<int>> relevant;
  bool center_covariates = true;
  Quadrature rule = Quadrature::Trapezoid;

  // inference
  EstimatorKind inference_estimator = EstimatorKind::FRE;
  double level = 0.95;
  std::optional<double> fixed_lambda;  ///< skip GCV for the inference fit
  InferenceMode inference_mode = InferenceMode::FullModel;

  void validate() const;
};

struct EstimatorOutcome {
  EstimatorKind kind = EstimatorKind::FRE;
  DesignSystem system;
  Matrix penalty;
  GcvTrace trace;  ///< empty grid when lambda was fixed
  FitResult fit;
  double sigma2 = 0.0;  ///< NaN when tr S >= n
  std::vector<double> influence;  ///< integral of beta_hat_j^2 per predictor
};

struct FitOutcome {
  std::optional<PartitionResult> partition;
  std::vector<EstimatorOutcome> estimators;
};

FitOutcome run_fit(const FunctionalDataset& data, const FitConfig& config);

/// Fits `config.inference_estimator` and evaluates the functional given by
/// `x` (p x M on the data grid).
InferenceResult run_inference(const FunctionalDataset& data, const FitConfig& config, const Matrix& x);

}  // namespace frr
