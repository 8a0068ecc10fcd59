#include "frr/inference.hpp"

#include "frr/error.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

namespace frr {

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw DomainError("normal quantile: probability must lie in (0, 1)");

  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                           1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                           6.680131188771972e+01,  -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                           -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                           3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (prob < p_low) {
    const double q = std::sqrt(-2.0 * std::log(prob));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (prob <= 1.0 - p_low) {
    const double q = prob - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-prob));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement; the upper tail is refined through symmetry so the
  // residual is computed where erfc is accurate
  const bool upper = prob > 0.5;
  const double pp = upper ? 1.0 - prob : prob;
  double xl = upper ? -x : x;
  const double e = 0.5 * std::erfc(-xl / std::numbers::sqrt2) - pp;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * xl * xl);
  xl -= u / (1.0 + 0.5 * xl * u);
  return upper ? -xl : xl;
}

double sigma2_hat(const DesignSystem& system, const FitResult& fit) {
  const double n = static_cast<double>(system.num_subjects());
  if (!(fit.edf < n))
    throw DegenerateError("sigma2: tr(S) = " + std::to_string(fit.edf) + " leaves no residual degrees of freedom (n = " +
                          std::to_string(system.num_subjects()) + ")");
  return fit.residual_ss / (n - fit.edf);
}

Vector functional_weights(const Matrix& x, const DesignSystem& system) {
  const BlockLayout& layout = system.layout;
  if (x.rows() != layout.num_predictors() || x.cols() != static_cast<Eigen::Index>(system.grid.size()))
    throw ValidationError("functional weights: x is " + std::to_string(x.rows()) + "x" + std::to_string(x.cols()) +
                          ", expected " + std::to_string(layout.num_predictors()) + "x" +
                          std::to_string(system.grid.size()));
  const Vector q = quadrature_weights(system.grid, system.options.rule);
  Vector w = Vector::Zero(layout.total_columns());
  for (std::size_t g = 0; g < layout.blocks().size(); ++g) {
    const Block& blk = layout.blocks()[g];
    const Matrix wb = q.asDiagonal() * basis_matrix(system.grid, blk.basis);
    for (int j : blk.predictors) w.segment(layout.offset(j), wb.cols()) = (x.row(j) * wb).transpose();
  }
  return w;
}

double variance_of_functional(const Matrix& Z, const Matrix& P, double sigma2, const Vector& w) {
  if (w.size() != Z.cols() || P.rows() != Z.cols() || P.cols() != Z.cols())
    throw ValidationError("variance: dimensions of Z, P and w disagree");
  if (!(sigma2 >= 0.0)) throw ValidationError("variance: sigma2 must be nonnegative");
  const double n = static_cast<double>(Z.rows());
  const Matrix Gn = (Z.transpose() * Z) / n;
  Matrix Mn = Gn + P / n;
  Mn = 0.5 * (Mn + Mn.transpose()).eval();
  Eigen::LLT<Matrix> llt(Mn);
  if (llt.info() != Eigen::Success) {
    Eigen::LDLT<Matrix> ldlt(Mn);
    const double pivot = ldlt.vectorD().minCoeff();
    throw ConditioningError("variance: M_n = G_n + P/n is singular (smallest pivot " + std::to_string(pivot) + ")",
                            pivot);
  }
  const Vector u = llt.solve(w);
  return std::max(0.0, sigma2 * u.dot(Gn * u));
}

Interval confidence_interval(double psi_hat, double variance_hat, int n, double level) {
  if (!(level > 0.0 && level < 1.0)) throw ValidationError("confidence level must lie in (0, 1)");
  if (n < 1) throw ValidationError("confidence interval: n must be >= 1");
  if (!(variance_hat >= 0.0)) throw ValidationError("confidence interval: variance must be nonnegative");
  const double z = normal_quantile(0.5 * (1.0 + level));
  const double half = z * std::sqrt(variance_hat / n);
  return {psi_hat - half, psi_hat + half};
}

InferenceResult infer_functional(const DesignSystem& system, const FitResult& fit, const Matrix& P, const Matrix& x,
                                 double level, InferenceMode mode) {
  InferenceResult res;
  res.n = system.num_subjects();
  res.level = level;
  res.edf = fit.edf;
  res.sigma2_hat = sigma2_hat(system, fit);
  const Vector w = functional_weights(x, system);
  res.psi_hat = w.dot(fit.b_hat);
  if (mode == InferenceMode::RelevantBlock && system.layout.blocks().size() > 1) {
    const BlockLayout& layout = system.layout;
    const Block& rel = layout.blocks().front();
    const int cols = static_cast<int>(rel.predictors.size()) * rel.basis.dim();
    res.variance_hat = variance_of_functional(system.Z.leftCols(cols), P.topLeftCorner(cols, cols), res.sigma2_hat,
                                              w.head(cols));
  } else {
    res.variance_hat = variance_of_functional(system.Z, P, res.sigma2_hat, w);
  }
  const Interval ci = confidence_interval(res.psi_hat, res.variance_hat, res.n, level);
  res.ci_lo = ci.lo;
  res.ci_hi = ci.hi;
  return res;
}

}  // namespace frr
