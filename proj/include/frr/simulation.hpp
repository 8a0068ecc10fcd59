#pragma once

// Seeded Monte Carlo study: AR(1)-correlated spline covariates, a sparse set
// of smooth coefficient functions, and per-replication FRE / FRFM / FRSM fits.

#include "frr/basis.hpp"
#include "frr/design.hpp"
#include "frr/estimators.hpp"
#include "frr/partition.hpp"
#include "frr/tuning.hpp"

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace frr {

/// Deterministic normal and uniform draws on top of mt19937_64. Normals use
/// the Box-Muller transform so streams do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  double normal();

  /// Seed of the substream used by replication `index`.
  static std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// Bases per role; the defaults reproduce the knots/order/dimension table of
/// the study (generation K=16, FRE K=11, FRFM 9 + 7, FRSM 9).
struct BasisTable {
  BasisSpec generation{0.0, 1.0, 4, 12};
  BasisSpec fre{0.0, 1.0, 4, 7};
  BasisSpec frfm_relevant{0.0, 1.0, 4, 5};
  BasisSpec frfm_nuisance{0.0, 1.0, 4, 3};
  BasisSpec frsm{0.0, 1.0, 4, 5};
  BasisSpec partition{0.0, 1.0, 4, 7};
};

struct SimulationConfig {
  int n = 100;
  int p = 10;
  int p1 = 3;
  int grid_points = 100;
  double rho = 0.5;
  double sigma2 = 1.0;
  BasisTable bases;
  double ratio_c = 25.0;
  int replications = 100;
  std::uint64_t seed = 20250101;
  LambdaGrid lambda_grid;
  PartitionOptions partition;
  Quadrature rule = Quadrature::Trapezoid;

  void validate() const;
  std::vector<double> grid() const;
};

/// 2 sin(pi s) + s (1 - s) for the first p1 predictors (0-based j < p1), else 0.
double true_beta(double s, int j, int p1);

/// rho^{|j-k|}.
Matrix ar1_covariance(int dim, double rho);

struct SimulatedData {
  FunctionalDataset data;
  Matrix coefficients;  ///< n x (p K_gen) stacked spline coefficients
  Matrix beta_true;     ///< p x M true coefficient functions on the grid
};

/// Deterministic in (config.seed, index). Accepts sigma2 = 0 (noiseless).
SimulatedData generate_dataset(const SimulationConfig& config, int index);

/// Quadrature of (estimate - truth)^2 over the grid.
double imse_metric(std::span<const double> estimate, std::span<const double> truth, std::span<const double> grid,
                   Quadrature rule = Quadrature::Trapezoid);

constexpr std::array<EstimatorKind, 3> kEstimators{EstimatorKind::FRE, EstimatorKind::FRFM, EstimatorKind::FRSM};
constexpr std::size_t index_of(EstimatorKind k) { return static_cast<std::size_t>(k); }

struct ReplicationRecord {
  int index = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  std::array<double, 3> imse{};      ///< mean over the true relevant functions
  std::array<double, 3> log10_cn{};  ///< log10 kappa(Z'Z + P)
  std::array<double, 3> lambda{};    ///< chosen lambda1 / lambda1 / lambda3
  double tpr = 0.0;
  double fpr = 0.0;
  int selected = 0;
  int partition_iterations = 0;
  bool partition_converged = false;
};

ReplicationRecord run_replication(const SimulationConfig& config, int index);

struct EstimatorSummary {
  double imse_mean = 0.0;
  double imse_sd = 0.0;
  double log10_cn_median = 0.0;
};

struct StudyReport {
  SimulationConfig config;
  std::array<EstimatorSummary, 3> estimators{};
  double tpr_mean = 0.0;
  double fpr_mean = 0.0;
  int succeeded = 0;
  int failed = 0;
  std::vector<ReplicationRecord> records;  ///< in replication order
};

/// Recomputes every aggregate from `records` (failed records excluded).
StudyReport aggregate(const SimulationConfig& config, std::vector<ReplicationRecord> records);

/// Runs config.replications replications on `threads` workers. The result
/// does not depend on the thread count.
StudyReport run_study(const SimulationConfig& config, int threads = 1);

/// Cartesian design over (n, sigma2, rho); cells are ordered n-major, then
/// sigma2, then rho.
struct StudyPlan {
  SimulationConfig base;
  std::vector<int> n_values{25, 50, 100};
  std::vector<double> sigma2_values{0.5, 1.0, 10.0};
  std::vector<double> rho_values{0.5, 0.8, 0.99};

  std::vector<SimulationConfig> cells() const;
};

std::vector<StudyReport> run_plan(const StudyPlan& plan, int threads = 1);

double median(std::vector<double> values);

/// Thread count from FRR_THREADS when set, else `fallback`.
int threads_from_env(int fallback);

}  // namespace frr
