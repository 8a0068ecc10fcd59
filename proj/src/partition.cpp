#include "frr/partition.hpp"

#include "frr/error.hpp"
#include "frr/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace frr {

void PartitionOptions::validate() const {
  if (!(epsilon > 0.0)) throw ValidationError("partition: epsilon must be > 0");
  if (!(tolerance > 0.0)) throw ValidationError("partition: tolerance must be > 0");
  if (max_iter < 1) throw ValidationError("partition: max_iter must be >= 1");
  if (!(threshold > 0.0 && threshold < 1.0)) throw ValidationError("partition: threshold must lie in (0, 1)");
}

void classify_weights(std::span<const double> weights, double threshold, std::vector<int>& relevant,
                      std::vector<int>& nuisance) {
  relevant.clear();
  nuisance.clear();
  double top = 0.0;
  for (double w : weights) top = std::max(top, 1.0 / w);
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double score = 1.0 / weights[j];
    // the maximum itself is always relevant, whatever rounding does to the product
    if (score > threshold * top || score == top)
      relevant.push_back(static_cast<int>(j));
    else
      nuisance.push_back(static_cast<int>(j));
  }
}

PartitionResult adaptive_ridge_partition(const DesignSystem& system, double lambda, const PartitionOptions& options) {
  options.validate();
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("partition: lambda must be finite and > 0");
  const BlockLayout& layout = system.layout;
  const int p = layout.num_predictors();
  for (int j = 0; j < p; ++j)
    if (!layout.included(j)) throw ValidationError("partition: predictor " + std::to_string(j) + " is not in the design");

  PartitionResult res;
  std::vector<double> w(static_cast<std::size_t>(p), 1.0);
  res.weight_history.push_back(w);
  std::vector<double> scale(static_cast<std::size_t>(p));

  for (int it = 0; it < options.max_iter; ++it) {
    for (int j = 0; j < p; ++j) scale[static_cast<std::size_t>(j)] = lambda * w[static_cast<std::size_t>(j)];
    const Vector b = solve_penalized(system.Z, system.y, weighted_penalty(system, scale));

    std::vector<double> next(static_cast<std::size_t>(p));
    double change = 0.0;
    for (int j = 0; j < p; ++j) {
      const double norm2 = coefficient_block(layout, b, j).squaredNorm();
      const double wj = w[static_cast<std::size_t>(j)];
      next[static_cast<std::size_t>(j)] = 1.0 / (norm2 + options.epsilon);
      change = std::max(change, std::abs(next[static_cast<std::size_t>(j)] - wj) / std::max(wj, options.epsilon));
    }
    w = std::move(next);
    res.weight_history.push_back(w);
    res.iterations = it + 1;
    if (change < options.tolerance) {
      res.converged = true;
      break;
    }
  }

  res.weights = w;
  classify_weights(res.weights, options.threshold, res.relevant, res.nuisance);
  return res;
}

PartitionRates partition_metrics(std::span<const int> selected, std::span<const int> true_relevant,
                                 int num_predictors) {
  if (true_relevant.empty()) throw ValidationError("partition metrics: true relevant set is empty");
  std::vector<bool> truth(static_cast<std::size_t>(num_predictors), false);
  for (int j : true_relevant) {
    if (j < 0 || j >= num_predictors) throw ValidationError("partition metrics: index out of range");
    truth[static_cast<std::size_t>(j)] = true;
  }
  int tp = 0, fp = 0;
  for (int j : selected) {
    if (j < 0 || j >= num_predictors) throw ValidationError("partition metrics: index out of range");
    (truth[static_cast<std::size_t>(j)] ? tp : fp) += 1;
  }
  const int positives = static_cast<int>(std::count(truth.begin(), truth.end(), true));
  const int negatives = num_predictors - positives;
  PartitionRates r;
  r.tpr = static_cast<double>(tp) / positives;
  r.fpr = negatives > 0 ? static_cast<double>(fp) / negatives : 0.0;
  return r;
}

}  // namespace frr
