#pragma once

// JSON run configurations. Every field is optional and defaults to the
// simulation protocol's constants; unknown keys are rejected.
//
// Study configuration:
//   {
//     "study": {"n": [25, 50, 100], "sigma2": [0.5, 1, 10], "rho": [0.5, 0.8, 0.99]},
//     "p": 10, "p1": 3, "grid_points": 100, "replications": 100, "seed": 20250101,
//     "ratio_c": 25, "quadrature": "trapezoid",
//     "lambda_grid": {"lo": 1e-4, "hi": 1e4, "count": 50},
//     "partition": {"epsilon": 1e-6, "tolerance": 1e-4, "max_iter": 100, "threshold": 0.1},
//     "bases": {"generation": {"order": 4, "interior_knots": 12}, "fre": {...},
//               "frfm_relevant": {...}, "frfm_nuisance": {...}, "frsm": {...}, "partition": {...}}
//   }
//
// Fit configuration:
//   {
//     "estimators": ["FRE", "FRFM", "FRSM"], "ratio_c": 25, "center_covariates": true,
//     "bases": {"fre": {...}, "relevant": {...}, "nuisance": {...}, "frsm": {...}},
//     "lambda_grid": {...}, "partition": {...}, "relevant": ["pred_a", ...],
//     "inference": {"estimator": "FRE", "level": 0.95, "lambda": 0.001, "mode": "full" | "relevant"}
//   }

#include "frr/simulation.hpp"
#include "frr/workflow.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace frr {

/// Parses a study configuration. Errors carry the line of the offending key.
StudyPlan parse_study_config(std::string_view json_text);
std::string study_config_to_json(const StudyPlan& plan);

/// `predictor_ids` maps names in "relevant" to predictor indices.
FitConfig parse_fit_config(std::string_view json_text, const std::vector<std::string>& predictor_ids);
std::string fit_config_to_json(const FitConfig& config, const std::vector<std::string>& predictor_ids);

std::string_view to_string(Quadrature rule);

}  // namespace frr
