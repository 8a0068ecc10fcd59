#pragma once

// Text artifacts emitted by the command-line front end. All floating-point
// values are written with 17 significant digits.

#include "frr/io.hpp"
#include "frr/simulation.hpp"
#include "frr/workflow.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace frr {

/// report.json: resolved configuration, per-cell aggregates, pooled medians.
std::string render_report_json(const StudyPlan& plan, const std::vector<StudyReport>& cells);
/// One row per replication across all cells.
std::string render_replications_csv(const std::vector<StudyReport>& cells);
/// Mean IMSE per (n, estimator) row and (sigma2, rho) column.
std::string render_imse_table(const std::vector<StudyReport>& cells);
/// Mean TPR / FPR of the FRFM partition per (n, sigma2) row and rho column.
std::string render_partition_table(const std::vector<StudyReport>& cells);
/// Median log10 condition number per estimator, pooled over every replication.
std::string render_cn_table(const std::vector<StudyReport>& cells);

/// Pooled median log10 condition number per estimator.
std::array<double, 3> pooled_log10_cn(const std::vector<StudyReport>& cells);

/// Rebuilds per-cell reports from a replications.csv text (for checks).
std::vector<StudyReport> reports_from_replications_csv(std::string_view csv, const StudyPlan& plan);

std::string render_coefficients_csv(const LabeledDataset& ds, const FitOutcome& fit);
std::string render_gcv_trace_csv(const FitOutcome& fit);
std::string render_fit_json(const LabeledDataset& ds, const FitOutcome& fit);
std::string render_inference_json(const InferenceResult& res);

/// Tidy metrics: n,rho,sigma2,estimator,metric,value.
std::string render_tidy_metrics(std::string_view report_json);
/// Tidy partition rates: n,rho,sigma2,estimator,metric,value for FRFM TPR/FPR.
std::string render_tidy_partition(std::string_view report_json);
/// Tidy GCV curves from gcv_trace.csv: estimator,log10_lambda,gcv.
std::string render_tidy_gcv(std::string_view gcv_trace_csv);

std::string sha256_hex(std::string_view bytes);

}  // namespace frr
