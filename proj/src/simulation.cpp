#include "frr/simulation.hpp"

#include "frr/error.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <numeric>
#include <string>
#include <thread>

namespace frr {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void validate_common(const SimulationConfig& c) {
  if (c.n < 2) throw ValidationError("simulation: n must be >= 2");
  if (c.p < 1) throw ValidationError("simulation: p must be >= 1");
  if (c.p1 < 1 || c.p1 > c.p) throw ValidationError("simulation: need 1 <= p1 <= p");
  if (c.grid_points < 2) throw ValidationError("simulation: grid_points must be >= 2");
  if (!(c.rho >= 0.0 && c.rho < 1.0)) throw ValidationError("simulation: rho must lie in [0, 1)");
  if (!(c.sigma2 >= 0.0) || !std::isfinite(c.sigma2)) throw ValidationError("simulation: sigma2 must be finite");
  for (const BasisSpec* b : {&c.bases.generation, &c.bases.fre, &c.bases.frfm_relevant, &c.bases.frfm_nuisance,
                             &c.bases.frsm, &c.bases.partition})
    b->validate();
}

/// Invariant per configuration: Cholesky factor of Sigma_Z and the
/// generation basis on the grid.
struct Generator {
  explicit Generator(const SimulationConfig& c) : grid(c.grid()) {
    const int dim = c.p * c.bases.generation.dim();
    Eigen::LLT<Matrix> llt(ar1_covariance(dim, c.rho));
    if (llt.info() != Eigen::Success) throw ConditioningError("simulation: AR(1) covariance is not positive definite", 0.0);
    chol = llt.matrixL();
    basis = basis_matrix(grid, c.bases.generation);
    weights = quadrature_weights(grid, c.rule);
    beta = Matrix::Zero(c.p, c.grid_points);
    for (int j = 0; j < c.p1; ++j)
      for (int l = 0; l < c.grid_points; ++l) beta(j, l) = true_beta(grid[static_cast<std::size_t>(l)], j, c.p1);
  }

  std::vector<double> grid;
  Matrix chol;
  Matrix basis;
  Vector weights;
  Matrix beta;
};

SimulatedData generate_with(const SimulationConfig& c, const Generator& gen, int index) {
  Rng rng(Rng::substream_seed(c.seed, static_cast<std::uint64_t>(index)));
  const int kg = c.bases.generation.dim();
  const int dim = c.p * kg;

  SimulatedData out;
  Matrix xi(c.n, dim);
  for (int i = 0; i < c.n; ++i)
    for (int k = 0; k < dim; ++k) xi(i, k) = rng.normal();
  out.coefficients = xi * gen.chol.transpose();

  FunctionalDataset& data = out.data;
  data.grid = gen.grid;
  data.curves.reserve(static_cast<std::size_t>(c.p));
  for (int j = 0; j < c.p; ++j)
    data.curves.push_back(out.coefficients.middleCols(j * kg, kg) * gen.basis.transpose());

  data.response = Vector::Zero(c.n);
  for (int j = 0; j < c.p1; ++j)
    data.response += data.curves[static_cast<std::size_t>(j)] * gen.weights.cwiseProduct(gen.beta.row(j).transpose());
  const double sd = std::sqrt(c.sigma2);
  for (int i = 0; i < c.n; ++i) data.response[i] += sd * rng.normal();
  out.beta_true = gen.beta;
  return out;
}

double relevant_imse(const FitResult& fit, const Matrix& beta, const SimulationConfig& c,
                     std::span<const double> grid) {
  double acc = 0.0;
  for (int j = 0; j < c.p1; ++j) {
    const Vector est = fit.beta_hat_grid.row(j).transpose();
    const Vector truth = beta.row(j).transpose();
    acc += imse_metric(std::span<const double>(est.data(), static_cast<std::size_t>(est.size())),
                       std::span<const double>(truth.data(), static_cast<std::size_t>(truth.size())), grid, c.rule);
  }
  return acc / c.p1;
}

ReplicationRecord replicate_with(const SimulationConfig& c, const Generator& gen, int index) {
  ReplicationRecord rec;
  rec.index = index;
  rec.seed = Rng::substream_seed(c.seed, static_cast<std::uint64_t>(index));
  try {
    const SimulatedData sim = generate_with(c, gen, index);
    const DesignOptions opts{Centering::ResponseOnly, c.rule, 2};
    std::vector<int> truth(static_cast<std::size_t>(c.p1));
    std::iota(truth.begin(), truth.end(), 0);

    // FRE
    const DesignSystem fre_sys = build_design(sim.data, BlockLayout::uniform(c.p, c.bases.fre), opts);
    const GcvTrace fre_trace = tune_uniform(fre_sys, c.lambda_grid);
    const FitResult fre = fit_fre(fre_sys, fre_trace.chosen_lambda);
    const auto ife = index_of(EstimatorKind::FRE);
    rec.imse[ife] = relevant_imse(fre, sim.beta_true, c, gen.grid);
    rec.log10_cn[ife] = fre.log10_condition;
    rec.lambda[ife] = fre_trace.chosen_lambda;

    // adaptive-ridge partition, lambda tuned once on the unweighted problem
    PartitionResult part;
    if (c.bases.partition == c.bases.fre) {
      part = adaptive_ridge_partition(fre_sys, fre_trace.chosen_lambda, c.partition);
    } else {
      const DesignSystem part_sys = build_design(sim.data, BlockLayout::uniform(c.p, c.bases.partition), opts);
      part = adaptive_ridge_partition(part_sys, tune_uniform(part_sys, c.lambda_grid).chosen_lambda, c.partition);
    }
    const PartitionRates rates = partition_metrics(part.relevant, truth, c.p);
    rec.tpr = rates.tpr;
    rec.fpr = rates.fpr;
    rec.selected = static_cast<int>(part.relevant.size());
    rec.partition_iterations = part.iterations;
    rec.partition_converged = part.converged;

    // FRFM on the estimated partition
    const DesignSystem frfm_sys = build_design(
        sim.data, BlockLayout::partitioned(c.p, part.relevant, c.bases.frfm_relevant, c.bases.frfm_nuisance), opts);
    const GcvTrace frfm_trace = tune_frfm(frfm_sys, c.ratio_c, c.lambda_grid);
    const FitResult frfm = fit_frfm(frfm_sys, frfm_trace.chosen_lambda, c.ratio_c * frfm_trace.chosen_lambda);
    const auto ifm = index_of(EstimatorKind::FRFM);
    rec.imse[ifm] = relevant_imse(frfm, sim.beta_true, c, gen.grid);
    rec.log10_cn[ifm] = frfm.log10_condition;
    rec.lambda[ifm] = frfm_trace.chosen_lambda;

    // FRSM on the true relevant set
    const DesignSystem frsm_sys = build_design(sim.data, BlockLayout::restricted(c.p, truth, c.bases.frsm), opts);
    const GcvTrace frsm_trace = tune_uniform(frsm_sys, c.lambda_grid);
    const FitResult frsm = fit_frsm(frsm_sys, frsm_trace.chosen_lambda);
    const auto ism = index_of(EstimatorKind::FRSM);
    rec.imse[ism] = relevant_imse(frsm, sim.beta_true, c, gen.grid);
    rec.log10_cn[ism] = frsm.log10_condition;
    rec.lambda[ism] = frsm_trace.chosen_lambda;

    bool finite = std::isfinite(rec.tpr) && std::isfinite(rec.fpr);
    for (std::size_t e = 0; e < 3; ++e) finite = finite && std::isfinite(rec.imse[e]) && std::isfinite(rec.log10_cn[e]);
    if (!finite) throw ConditioningError("replication produced non-finite metrics", 0.0);
    rec.ok = true;
  } catch (const Error& e) {
    rec.ok = false;
    rec.error = e.what();
  }
  return rec;
}

void parallel_for(int count, int threads, const std::function<void(int)>& body) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
    });
}

}  // namespace

Rng::Rng(std::uint64_t seed) : engine_(seed) {}

double Rng::uniform() {
  // 53-bit mantissa, shifted off zero
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::uint64_t Rng::substream_seed(std::uint64_t seed, std::uint64_t index) { return splitmix64(seed ^ index); }

void SimulationConfig::validate() const {
  validate_common(*this);
  if (!(sigma2 > 0.0)) throw ValidationError("simulation: sigma2 must be > 0");
  if (!(ratio_c > 1.0)) throw ValidationError("simulation: ratio_c must be > 1");
  if (replications < 1) throw ValidationError("simulation: replications must be >= 1");
  lambda_grid.validate();
  partition.validate();
}

std::vector<double> SimulationConfig::grid() const {
  return uniform_grid(bases.generation.domain_lo, bases.generation.domain_hi, grid_points);
}

double true_beta(double s, int j, int p1) {
  if (j >= p1) return 0.0;
  return 2.0 * std::sin(std::numbers::pi * s) + s * (1.0 - s);
}

Matrix ar1_covariance(int dim, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw ValidationError("ar1: rho must lie in [0, 1)");
  if (dim < 1) throw ValidationError("ar1: dimension must be >= 1");
  Matrix S(dim, dim);
  for (int j = 0; j < dim; ++j)
    for (int k = 0; k < dim; ++k) S(j, k) = std::pow(rho, std::abs(j - k));
  return S;
}

SimulatedData generate_dataset(const SimulationConfig& config, int index) {
  validate_common(config);
  return generate_with(config, Generator(config), index);
}

double imse_metric(std::span<const double> estimate, std::span<const double> truth, std::span<const double> grid,
                   Quadrature rule) {
  if (estimate.size() != truth.size() || estimate.size() != grid.size())
    throw ValidationError("imse: rows must have the grid's length");
  std::vector<double> diff(estimate.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = estimate[i] - truth[i];
  return integrate_product(diff, diff, grid, rule);
}

ReplicationRecord run_replication(const SimulationConfig& config, int index) {
  config.validate();
  return replicate_with(config, Generator(config), index);
}

double median(std::vector<double> values) {
  if (values.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  return values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
}

StudyReport aggregate(const SimulationConfig& config, std::vector<ReplicationRecord> records) {
  StudyReport rep;
  rep.config = config;
  rep.records = std::move(records);
  std::array<std::vector<double>, 3> imse, cn;
  double tpr = 0.0, fpr = 0.0;
  for (const ReplicationRecord& r : rep.records) {
    if (!r.ok) {
      ++rep.failed;
      continue;
    }
    ++rep.succeeded;
    for (std::size_t e = 0; e < 3; ++e) {
      imse[e].push_back(r.imse[e]);
      cn[e].push_back(r.log10_cn[e]);
    }
    tpr += r.tpr;
    fpr += r.fpr;
  }
  if (rep.succeeded == 0) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (auto& s : rep.estimators) s = {nan, nan, nan};
    rep.tpr_mean = rep.fpr_mean = nan;
    return rep;
  }
  const double count = rep.succeeded;
  for (std::size_t e = 0; e < 3; ++e) {
    double mean = 0.0;
    for (double v : imse[e]) mean += v;
    mean /= count;
    double ss = 0.0;
    for (double v : imse[e]) ss += (v - mean) * (v - mean);
    rep.estimators[e].imse_mean = mean;
    rep.estimators[e].imse_sd = rep.succeeded > 1 ? std::sqrt(ss / (count - 1.0)) : 0.0;
    rep.estimators[e].log10_cn_median = median(cn[e]);
  }
  rep.tpr_mean = tpr / count;
  rep.fpr_mean = fpr / count;
  return rep;
}

StudyReport run_study(const SimulationConfig& config, int threads) {
  config.validate();
  const Generator gen(config);
  std::vector<ReplicationRecord> records(static_cast<std::size_t>(config.replications));
  parallel_for(config.replications, threads,
               [&](int i) { records[static_cast<std::size_t>(i)] = replicate_with(config, gen, i); });
  return aggregate(config, std::move(records));
}

std::vector<SimulationConfig> StudyPlan::cells() const {
  if (n_values.empty() || sigma2_values.empty() || rho_values.empty())
    throw ValidationError("study plan: every factor needs at least one level");
  std::vector<SimulationConfig> out;
  for (int n : n_values)
    for (double s2 : sigma2_values)
      for (double rho : rho_values) {
        SimulationConfig c = base;
        c.n = n;
        c.sigma2 = s2;
        c.rho = rho;
        c.validate();
        out.push_back(c);
      }
  return out;
}

std::vector<StudyReport> run_plan(const StudyPlan& plan, int threads) {
  const std::vector<SimulationConfig> cells = plan.cells();
  std::vector<Generator> gens;
  gens.reserve(cells.size());
  for (const auto& c : cells) gens.emplace_back(c);

  // flatten (cell, replication) so workers stay busy across cells
  std::vector<std::pair<int, int>> jobs;
  std::vector<std::vector<ReplicationRecord>> records(cells.size());
  for (std::size_t k = 0; k < cells.size(); ++k) {
    records[k].resize(static_cast<std::size_t>(cells[k].replications));
    for (int r = 0; r < cells[k].replications; ++r) jobs.emplace_back(static_cast<int>(k), r);
  }
  parallel_for(static_cast<int>(jobs.size()), threads, [&](int i) {
    const auto [k, r] = jobs[static_cast<std::size_t>(i)];
    records[static_cast<std::size_t>(k)][static_cast<std::size_t>(r)] =
        replicate_with(cells[static_cast<std::size_t>(k)], gens[static_cast<std::size_t>(k)], r);
  });

  std::vector<StudyReport> out;
  for (std::size_t k = 0; k < cells.size(); ++k) out.push_back(aggregate(cells[k], std::move(records[k])));
  return out;
}

int threads_from_env(int fallback) {
  if (const char* v = std::getenv("FRR_THREADS")) {
    char* end = nullptr;
    const long t = std::strtol(v, &end, 10);
    if (end != v && *end == '\0' && t >= 1 && t <= 1024) return static_cast<int>(t);
  }
  return fallback;
}

}  // namespace frr
