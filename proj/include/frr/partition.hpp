#pragma once

// Adaptive-ridge reweighting that ranks predictors by coefficient magnitude
// and splits them into a relevant and a nuisance block.

#include "frr/design.hpp"

#include <vector>

namespace frr {

struct PartitionOptions {
  double epsilon = 1e-6;     ///< added to ||b_j||^2 before inversion
  double tolerance = 1e-4;   ///< relative weight change that stops the iteration
  int max_iter = 100;
  double threshold = 0.10;   ///< fraction of the largest relevance score

  void validate() const;
};

struct PartitionResult {
  std::vector<double> weights;  ///< final w_j
  std::vector<int> relevant;    ///< sorted, 0-based
  std::vector<int> nuisance;    ///< sorted, 0-based
  int iterations = 0;
  bool converged = false;
  std::vector<std::vector<double>> weight_history;  ///< w^(0), w^(1), ...
};

/// Iterates b^(t) = argmin ||y - Zb||^2 + lambda sum_j w_j b_j' R0 b_j and
/// w_j <- 1 / (||b_j||^2 + eps) from w = 1. Predictor j is relevant when
/// 1 / w_j exceeds `threshold` times the largest such score. The system must
/// include every predictor.
PartitionResult adaptive_ridge_partition(const DesignSystem& system, double lambda,
                                         const PartitionOptions& options = {});

/// Relevance classification from a weight vector.
void classify_weights(std::span<const double> weights, double threshold, std::vector<int>& relevant,
                      std::vector<int>& nuisance);

struct PartitionRates {
  double tpr = 0.0;
  double fpr = 0.0;
};

/// FPR is reported as 0 when every predictor is truly relevant.
PartitionRates partition_metrics(std::span<const int> selected, std::span<const int> true_relevant,
                                 int num_predictors);

}  // namespace frr
