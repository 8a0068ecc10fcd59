#include "frr/workflow.hpp"

#include "frr/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace frr {

void FitConfig::validate() const {
  if (estimators.empty()) throw ValidationError("fit: no estimators requested");
  for (const KnotLayout* k : {&fre_basis, &relevant_basis, &nuisance_basis, &frsm_basis})
    BasisSpec{0.0, 1.0, k->order, k->interior_knots}.validate();
  if (!(ratio_c > 1.0) || !std::isfinite(ratio_c)) throw ValidationError("fit: ratio_c must be > 1");
  lambda_grid.validate();
  partition.validate();
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("fit: level must lie in (0, 1)");
  if (fixed_lambda && (!(*fixed_lambda >= 0.0) || !std::isfinite(*fixed_lambda)))
    throw ValidationError("fit: lambda must be finite and nonnegative");
  if (relevant && relevant->empty()) throw ValidationError("fit: relevant set must not be empty");
}

namespace {

class Pipeline {
 public:
  Pipeline(const FunctionalDataset& data, const FitConfig& config) : data_(data), config_(config) {
    data_.validate();
    config_.validate();
    lo_ = data_.grid.front();
    hi_ = data_.grid.back();
    opts_ = DesignOptions{config_.center_covariates ? Centering::ResponseAndColumns : Centering::ResponseOnly,
                          config_.rule, 2};
    if (config_.relevant)
      for (int j : *config_.relevant)
        if (j < 0 || j >= data_.num_predictors()) throw ValidationError("fit: relevant predictor index out of range");
  }

  EstimatorOutcome run(EstimatorKind kind, std::optional<double> fixed_lambda) {
    EstimatorOutcome out;
    out.kind = kind;
    const int p = data_.num_predictors();
    double lambda = 0.0;
    switch (kind) {
      case EstimatorKind::FRE: {
        out.system = fre_system();
        if (fixed_lambda) {
          lambda = *fixed_lambda;
        } else {
          out.trace = fre_trace();
          lambda = out.trace.chosen_lambda;
        }
        out.fit = fit_fre(out.system, lambda);
        out.penalty = block_penalty(out.system, std::vector<double>(out.system.layout.blocks().size(), lambda));
        break;
      }
      case EstimatorKind::FRFM: {
        const PartitionResult& part = partition();
        out.system = build_design(data_, BlockLayout::partitioned(p, part.relevant, config_.relevant_basis.on(lo_, hi_),
                                                                  config_.nuisance_basis.on(lo_, hi_)),
                                  opts_);
        if (fixed_lambda) {
          lambda = *fixed_lambda;
        } else {
          out.trace = tune_frfm(out.system, config_.ratio_c, config_.lambda_grid);
          lambda = out.trace.chosen_lambda;
        }
        out.fit = fit_frfm(out.system, lambda, config_.ratio_c * lambda);
        std::vector<double> scales{lambda};
        if (out.system.layout.blocks().size() == 2) scales.push_back(config_.ratio_c * lambda);
        out.penalty = block_penalty(out.system, scales);
        break;
      }
      case EstimatorKind::FRSM: {
        std::vector<int> rel = config_.relevant ? *config_.relevant : partition().relevant;
        out.system = build_design(data_, BlockLayout::restricted(p, rel, config_.frsm_basis.on(lo_, hi_)), opts_);
        if (fixed_lambda) {
          lambda = *fixed_lambda;
        } else {
          out.trace = tune_uniform(out.system, config_.lambda_grid);
          lambda = out.trace.chosen_lambda;
        }
        out.fit = fit_frsm(out.system, lambda);
        out.penalty = block_penalty(out.system, std::vector<double>(out.system.layout.blocks().size(), lambda));
        break;
      }
    }
    try {
      out.sigma2 = sigma2_hat(out.system, out.fit);
    } catch (const DegenerateError&) {
      out.sigma2 = std::numeric_limits<double>::quiet_NaN();
    }
    for (int j = 0; j < p; ++j) {
      const Vector row = out.fit.beta_hat_grid.row(j).transpose();
      const std::span<const double> r(row.data(), static_cast<std::size_t>(row.size()));
      out.influence.push_back(integrate_product(r, r, data_.grid, config_.rule));
    }
    return out;
  }

  const std::optional<PartitionResult>& partition_if_run() const { return partition_; }

  const PartitionResult& partition() {
    if (!partition_) partition_ = adaptive_ridge_partition(fre_system(), fre_trace().chosen_lambda, config_.partition);
    return *partition_;
  }

 private:
  const DesignSystem& fre_system() {
    if (!fre_system_)
      fre_system_ = build_design(data_, BlockLayout::uniform(data_.num_predictors(), config_.fre_basis.on(lo_, hi_)),
                                 opts_);
    return *fre_system_;
  }

  const GcvTrace& fre_trace() {
    if (!fre_trace_) fre_trace_ = tune_uniform(fre_system(), config_.lambda_grid);
    return *fre_trace_;
  }

  const FunctionalDataset& data_;
  const FitConfig& config_;
  double lo_ = 0.0, hi_ = 1.0;
  DesignOptions opts_;
  std::optional<DesignSystem> fre_system_;
  std::optional<GcvTrace> fre_trace_;
  std::optional<PartitionResult> partition_;
};

}  // namespace

FitOutcome run_fit(const FunctionalDataset& data, const FitConfig& config) {
  Pipeline pipe(data, config);
  FitOutcome out;
  for (EstimatorKind kind : config.estimators) out.estimators.push_back(pipe.run(kind, std::nullopt));
  out.partition = pipe.partition_if_run();
  return out;
}

InferenceResult run_inference(const FunctionalDataset& data, const FitConfig& config, const Matrix& x) {
  Pipeline pipe(data, config);
  const EstimatorOutcome est = pipe.run(config.inference_estimator, config.fixed_lambda);
  return infer_functional(est.system, est.fit, est.penalty, x, config.level, config.inference_mode);
}

}  // namespace frr
