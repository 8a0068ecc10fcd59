// Acceptance harness: one PASS/FAIL line per criterion, exit status 1 when any
// criterion fails.

#include "frr/basis.hpp"
#include "frr/design.hpp"
#include "frr/error.hpp"
#include "frr/estimators.hpp"
#include "frr/inference.hpp"
#include "frr/report.hpp"
#include "frr/simulation.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <thread>
#include <vector>

using namespace frr;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

int default_threads() {
  const unsigned hw = std::thread::hardware_concurrency();
  return threads_from_env(hw == 0 ? 1 : static_cast<int>(hw));
}

/// Random functional instance through the real design path: white-noise
/// curves, p predictors with K = order 4 + interior knots each.
struct Instance {
  FunctionalDataset data;
  BasisSpec spec;
  std::vector<int> relevant;
};

Instance random_instance(std::mt19937_64& rng, int n, int p, int k) {
  std::normal_distribution<double> nd;
  Instance in;
  in.spec = {0.0, 1.0, 4, k - 4};
  const int m = 2 * k + 10;
  in.data.grid = uniform_grid(0.0, 1.0, m);
  for (int j = 0; j < p; ++j) {
    Matrix c(n, m);
    for (int l = 0; l < m; ++l)
      for (int i = 0; i < n; ++i) c(i, l) = nd(rng);
    in.data.curves.push_back(std::move(c));
  }
  in.data.response.resize(n);
  for (int i = 0; i < n; ++i) in.data.response[i] = nd(rng);
  std::vector<int> order(static_cast<std::size_t>(p));
  for (int j = 0; j < p; ++j) order[static_cast<std::size_t>(j)] = j;
  std::shuffle(order.begin(), order.end(), rng);
  const int p1 = std::uniform_int_distribution<int>(1, p)(rng);
  in.relevant.assign(order.begin(), order.begin() + p1);
  std::sort(in.relevant.begin(), in.relevant.end());
  return in;
}

/// n in [10, 100], total columns in [5, 120], lambda log-uniform on [1e-4, 1e4].
/// The number of predictors keeps 2p < n, so the difference penalty's null
/// space is identified and Z'Z + P is positive definite.
Instance draw_instance(std::mt19937_64& rng, double& lambda) {
  const int n = std::uniform_int_distribution<int>(10, 100)(rng);
  const int cols = std::uniform_int_distribution<int>(5, 120)(rng);
  const int p_max = std::max(1, std::min((n - 1) / 2, cols / 5));
  const int p = std::uniform_int_distribution<int>(1, p_max)(rng);
  lambda = std::pow(10.0, std::uniform_real_distribution<double>(-4.0, 4.0)(rng));
  return random_instance(rng, n, p, cols / p);
}

Verdict criterion_solver() {
  std::mt19937_64 rng(1001);
  double worst = 0.0;
  int cols_lo = 1000, cols_hi = 0;
  for (int t = 0; t < 200; ++t) {
    double lambda = 0.0;
    const Instance in = draw_instance(rng, lambda);
    const int p = in.data.num_predictors();
    const DesignSystem fre = build_design(in.data, BlockLayout::uniform(p, in.spec));
    cols_lo = std::min(cols_lo, fre.num_columns());
    cols_hi = std::max(cols_hi, fre.num_columns());
    const DesignSystem frfm = build_design(in.data, BlockLayout::partitioned(p, in.relevant, in.spec, in.spec));
    const DesignSystem frsm = build_design(in.data, BlockLayout::restricted(p, in.relevant, in.spec));
    const FitResult a = fit_fre(fre, lambda);
    const FitResult b = fit_frfm(frfm, lambda, 25.0 * lambda);
    const FitResult c = fit_frsm(frsm, lambda);
    std::vector<double> fm_scales{lambda};
    if (frfm.layout.blocks().size() == 2) fm_scales.push_back(25.0 * lambda);
    worst = std::max({worst,
                      normal_equation_residual(fre.Z, fre.y, block_penalty(fre, std::vector<double>{lambda}), a.b_hat),
                      normal_equation_residual(frfm.Z, frfm.y, block_penalty(frfm, fm_scales), b.b_hat),
                      normal_equation_residual(frsm.Z, frsm.y, block_penalty(frsm, std::vector<double>{lambda}), c.b_hat)});
  }
  return {worst < 1e-10, fmt("max normal-equation residual %.3g over 200 instances x 3 estimators (columns %d..%d)",
                             worst, cols_lo, cols_hi)};
}

Verdict criterion_degeneration() {
  std::mt19937_64 rng(1002);
  double worst_equal = 0.0, worst_limit = 0.0;
  int singular = 0;
  for (int t = 0; t < 50; ++t) {
    double lambda = 0.0;
    const Instance in = draw_instance(rng, lambda);
    const int p = in.data.num_predictors();
    const DesignSystem fre = build_design(in.data, BlockLayout::uniform(p, in.spec));
    const DesignSystem frfm = build_design(in.data, BlockLayout::partitioned(p, in.relevant, in.spec, in.spec));
    const DesignSystem frsm = build_design(in.data, BlockLayout::restricted(p, in.relevant, in.spec));
    const FitResult a = fit_fre(fre, lambda);
    const FitResult b = fit_frfm(frfm, lambda, lambda);
    double diff = 0.0;
    for (int j = 0; j < p; ++j)
      diff += (a.b_blocks[static_cast<std::size_t>(j)] - b.b_blocks[static_cast<std::size_t>(j)]).squaredNorm();
    worst_equal = std::max(worst_equal, std::sqrt(diff));

    try {
      const FitResult full = fit_frfm(frfm, lambda, 1e12);
      const FitResult sub = fit_frsm(frsm, lambda);
      const Eigen::Index rel_cols = sub.b_hat.size();
      const double rel = (full.b_hat.head(rel_cols) - sub.b_hat).norm() / sub.b_hat.norm();
      worst_limit = std::max(worst_limit, rel);
    } catch (const ConditioningError&) {
      ++singular;
    }
  }
  return {worst_equal < 1e-10 && worst_limit < 1e-6 && singular == 0,
          fmt("max ||frfm(l,l) - fre(l)|| = %.3g (< 1e-10); max relative gap frfm(l,1e12) vs frsm(l) on the relevant "
              "block = %.3g (< 1e-6); %d of 50 limit fits not positive definite",
              worst_equal, worst_limit, singular)};
}

Verdict criterion_imse_oracle() {
  std::mt19937_64 rng(1003);
  std::normal_distribution<double> nd;
  double worst = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = std::uniform_int_distribution<int>(30, 80)(rng);
    const int p = std::uniform_int_distribution<int>(1, 3)(rng);
    const int k = std::uniform_int_distribution<int>(6, 10)(rng);
    const Instance in = random_instance(rng, n, p, k);
    const DesignSystem sys = build_design(in.data, BlockLayout::uniform(p, in.spec));
    const double lambda = std::pow(10.0, std::uniform_real_distribution<double>(-2.0, 2.0)(rng));
    const Matrix P = block_penalty(sys, std::vector<double>{lambda});
    const Matrix G = block_gram(sys);
    Vector b_true(sys.num_columns());
    for (Eigen::Index i = 0; i < b_true.size(); ++i) b_true[i] = nd(rng);
    const double sigma2 = std::uniform_real_distribution<double>(0.25, 4.0)(rng);
    const ImseDecomposition d = imse_decomposition(sys.Z, P, G, b_true, sigma2);

    const Vector mean = sys.Z * b_true;
    const double sd = std::sqrt(sigma2);
    double acc = 0.0;
    for (int r = 0; r < 2000; ++r) {
      Vector y(n);
      for (int i = 0; i < n; ++i) y[i] = mean[i] + sd * nd(rng);
      const Vector err = solve_penalized(sys.Z, y, P) - b_true;
      acc += err.dot(G * err);
    }
    worst = std::max(worst, std::abs(acc / 2000 - d.total) / d.total);
  }
  return {worst < 0.05, fmt("max relative gap between decomposition and Monte Carlo risk %.4f over 20 instances (< 0.05)",
                            worst)};
}

StudyPlan study(std::vector<int> n_values) {
  StudyPlan plan;
  plan.n_values = std::move(n_values);
  plan.base.replications = 50;
  return plan;
}

std::string cell_label(const SimulationConfig& c) { return fmt("(n=%d rho=%g s2=%g)", c.n, c.rho, c.sigma2); }

Verdict criterion_partition(const std::vector<StudyReport>& cells) {
  bool pass = true;
  std::string detail;
  for (const StudyReport& r : cells) {
    const bool ok = r.failed == 0 && r.tpr_mean == 1.0 && std::abs(r.fpr_mean - 2.0 / 7.0) <= 0.02;
    pass = pass && ok;
    detail += fmt(" %s TPR=%.3f FPR=%.3f%s", cell_label(r.config).c_str(), r.tpr_mean, r.fpr_mean,
                  r.failed ? fmt(" failed=%d", r.failed).c_str() : "");
  }
  return {pass, "TPR = 1 and FPR in 0.286 +/- 0.02 per cell:" + detail};
}

Verdict criterion_orderings(const std::vector<StudyReport>& cells) {
  bool pass = true;
  std::string detail;
  const auto fre = index_of(EstimatorKind::FRE), fm = index_of(EstimatorKind::FRFM), sm = index_of(EstimatorKind::FRSM);
  for (const StudyReport& r : cells) {
    const auto& e = r.estimators;
    bool ok = r.failed == 0;
    if (r.config.n == 25) ok = ok && e[sm].imse_mean < std::min(e[fre].imse_mean, e[fm].imse_mean);
    if (r.config.n == 100) ok = ok && e[fm].imse_mean < std::min(e[fre].imse_mean, e[sm].imse_mean);
    pass = pass && ok;
    detail += fmt(" %s FRE=%.3f FRFM=%.3f FRSM=%.3f%s", cell_label(r.config).c_str(), e[fre].imse_mean, e[fm].imse_mean,
                  e[sm].imse_mean, ok ? "" : " x");
  }
  double point = std::nan("");
  for (const StudyReport& r : cells)
    if (r.config.n == 100 && r.config.rho == 0.5 && r.config.sigma2 == 0.5) point = r.estimators[fm].imse_mean;
  const bool point_ok = point >= 0.03 && point <= 0.15;
  return {pass && point_ok,
          fmt("FRFM IMSE at (100, 0.5, 0.5) = %.4f (in [0.03, 0.15]: %s); n=25 FRSM lowest and n=100 FRFM lowest "
              "in every cell:",
              point, point_ok ? "yes" : "no") +
              detail};
}

Verdict criterion_conditioning(const std::vector<StudyReport>& cells) {
  const auto med = pooled_log10_cn(cells);
  const double fre = med[index_of(EstimatorKind::FRE)], fm = med[index_of(EstimatorKind::FRFM)],
               sm = med[index_of(EstimatorKind::FRSM)];
  const bool order = sm < fre && fre < fm;
  const bool close = std::abs(sm - 3.86) <= 1.0 && std::abs(fre - 4.29) <= 1.0 && std::abs(fm - 5.12) <= 1.0;
  return {order && close, fmt("pooled median log10 kappa FRSM=%.3f FRE=%.3f FRFM=%.3f (targets 3.86 / 4.29 / 5.12 "
                              "+/- 1; ordering FRSM < FRE < FRFM: %s)",
                              sm, fre, fm, order ? "yes" : "no")};
}

Verdict criterion_coverage() {
  SimulationConfig c;
  c.n = 400;
  c.p = 1;
  c.p1 = 1;
  c.sigma2 = 1.0;
  const BasisSpec spec{0.0, 1.0, 4, 8};
  const double lambda = 1e-3;
  int covered = 0, total = 0;
  for (int seed = 0; seed < 500; ++seed) {
    const SimulatedData sim = generate_dataset(c, seed);
    const DesignSystem sys = build_design(sim.data, BlockLayout::uniform(1, spec));
    const FitResult fit = fit_fre(sys, lambda);
    const Matrix P = block_penalty(sys, std::vector<double>{lambda});
    const Matrix x = sim.beta_true;
    const std::span<const double> xs(x.data(), static_cast<std::size_t>(x.cols()));
    const double truth = integrate_product(xs, xs, sim.data.grid);
    const InferenceResult res = infer_functional(sys, fit, P, x, 0.95);
    covered += res.ci_lo <= truth && truth <= res.ci_hi;
    ++total;
  }
  const double rate = static_cast<double>(covered) / total;
  return {rate >= 0.90 && rate <= 0.99, fmt("95%% CI coverage %.3f over %d seeds (in [0.90, 0.99])", rate, total)};
}

Verdict criterion_approximation() {
  const std::vector<double> grid = uniform_grid(0.0, 1.0, 2001);
  std::vector<double> beta(grid.size());
  for (std::size_t l = 0; l < grid.size(); ++l) beta[l] = true_beta(grid[l], 0, 1);
  std::vector<double> errors;
  std::string detail;
  for (int k : {6, 9, 11, 16}) {
    const BasisSpec spec{0.0, 1.0, 4, k - 4};
    const Vector fit = basis_matrix(grid, spec) * project_trajectory(beta, spec, grid);
    std::vector<double> r(grid.size());
    for (std::size_t l = 0; l < grid.size(); ++l) r[l] = fit[static_cast<Eigen::Index>(l)] - beta[l];
    errors.push_back(std::sqrt(integrate_product(r, r, grid)));
    detail += fmt(" K=%d: %.3g", k, errors.back());
  }
  bool decreasing = true;
  for (std::size_t i = 1; i < errors.size(); ++i) decreasing = decreasing && errors[i] < errors[i - 1];
  return {decreasing && errors.back() < 1e-3, "L2 projection error" + detail + " (strictly decreasing, < 1e-3 at K=16)"};
}

int failures = 0;

void report(int id, const char* name, const std::function<Verdict()>& run) {
  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  try {
    v = run();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!v.pass) ++failures;
  std::printf("%s criterion %d (%s): %s [%.1fs]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
  std::fflush(stdout);
}

}  // namespace

int main() {
  const int threads = default_threads();
  report(1, "solver correctness", criterion_solver);
  report(2, "FRFM degeneration", criterion_degeneration);
  report(3, "IMSE decomposition oracle", criterion_imse_oracle);

  std::vector<StudyReport> plateau_a, plateau_b;
  report(4, "partition plateau at n=50", [&] {
    plateau_a = run_plan(study({50}), 1);
    return criterion_partition(plateau_a);
  });
  report(9, "determinism across thread counts", [&] {
    plateau_b = run_plan(study({50}), 8);
    const std::string a = render_replications_csv(plateau_a), b = render_replications_csv(plateau_b);
    return Verdict{!a.empty() && a == b, fmt("replications.csv at 1 and 8 threads: %s (%zu bytes)",
                                             a == b ? "identical" : "different", a.size())};
  });

  std::vector<StudyReport> orderings;
  report(5, "IMSE orderings", [&] {
    orderings = run_plan(study({25, 100}), threads);
    return criterion_orderings(orderings);
  });
  report(6, "conditioning", [&] { return criterion_conditioning(orderings); });
  report(7, "inference coverage", criterion_coverage);
  report(8, "spline approximation decay", criterion_approximation);

  std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
