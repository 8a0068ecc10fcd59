#include "frr/estimators.hpp"

#include "frr/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace frr {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::FRE: return "FRE";
    case EstimatorKind::FRFM: return "FRFM";
    case EstimatorKind::FRSM: return "FRSM";
  }
  return "?";
}

EstimatorKind parse_estimator(std::string_view name) {
  std::string up(name);
  std::transform(up.begin(), up.end(), up.begin(), [](unsigned char c) { return std::toupper(c); });
  if (up == "FRE") return EstimatorKind::FRE;
  if (up == "FRFM") return EstimatorKind::FRFM;
  if (up == "FRSM") return EstimatorKind::FRSM;
  throw ValidationError("unknown estimator '" + std::string(name) + "' (expected FRE, FRFM or FRSM)");
}

namespace {

double smallest_ldlt_pivot(const Matrix& A) {
  Eigen::LDLT<Matrix> ldlt(A);
  return ldlt.vectorD().minCoeff();
}

}  // namespace

PenalizedSystem::PenalizedSystem(const Matrix& Z, const Matrix& P) : Z_(Z) {
  if (P.rows() != Z.cols() || P.cols() != Z.cols())
    throw ValidationError("penalized system: penalty is " + std::to_string(P.rows()) + "x" +
                          std::to_string(P.cols()) + ", design has " + std::to_string(Z.cols()) + " columns");
  if (!Z.allFinite() || !P.allFinite()) throw ValidationError("penalized system: non-finite input");
  ZtZ_ = Matrix::Zero(Z.cols(), Z.cols());
  ZtZ_.selfadjointView<Eigen::Lower>().rankUpdate(Z.transpose());
  ZtZ_ = ZtZ_.selfadjointView<Eigen::Lower>();
  A_ = ZtZ_ + 0.5 * (P + P.transpose());

  // symmetric equilibration so that blocks penalized at very different
  // scales factor as accurately as the data allow
  const auto fail = [&] {
    const double pivot = smallest_ldlt_pivot(A_);
    throw ConditioningError("penalized system: Z'Z + P is not numerically positive definite (smallest pivot " +
                                std::to_string(pivot) + ")",
                            pivot);
  };
  const Vector d = A_.diagonal();
  if (!(d.minCoeff() > 0.0)) fail();
  scale_ = d.cwiseSqrt().cwiseInverse();
  llt_.compute(scale_.asDiagonal() * A_ * scale_.asDiagonal());
  const double eps = std::numeric_limits<double>::epsilon();
  if (llt_.info() != Eigen::Success) fail();
  const Vector pivots = Matrix(llt_.matrixL()).diagonal();
  if (!(pivots.cwiseAbs2().minCoeff() > static_cast<double>(A_.rows()) * eps)) fail();
}

Vector PenalizedSystem::solve_once(const Vector& rhs) const {
  return scale_.cwiseProduct(llt_.solve(scale_.cwiseProduct(rhs)));
}

Vector PenalizedSystem::solve(const Vector& rhs) const {
  Vector x = solve_once(rhs);
  Vector r = rhs - A_ * x;
  double prev = r.norm();
  for (int step = 0; step < 4 && prev > 0.0; ++step) {
    const Vector next = x + solve_once(r);
    const Vector rn = rhs - A_ * next;
    const double norm = rn.norm();
    if (!(norm < prev)) break;
    x = next;
    r = rn;
    prev = norm;
  }
  return x;
}

Vector PenalizedSystem::fit(const Vector& y) const {
  if (y.size() != Z_.rows()) throw ValidationError("penalized system: response length does not match design rows");
  return solve(Z_.transpose() * y);
}

double PenalizedSystem::hat_trace() const {
  const Matrix X = llt_.matrixL().solve(scale_.asDiagonal() * Z_.transpose());
  return X.squaredNorm();
}

Matrix PenalizedSystem::coefficient_map() const {
  return scale_.asDiagonal() * llt_.solve(scale_.asDiagonal() * Z_.transpose());
}

Vector solve_penalized(const Matrix& Z, const Vector& y, const Matrix& P) { return PenalizedSystem(Z, P).fit(y); }

double normal_equation_residual(const Matrix& Z, const Vector& y, const Matrix& P, const Vector& b) {
  const Vector rhs = Z.transpose() * y;
  const Vector lhs = Z.transpose() * (Z * b) + P * b;
  const double denom = rhs.norm();
  return denom > 0.0 ? (lhs - rhs).norm() / denom : (lhs - rhs).norm();
}

Matrix reconstruct_functions(const DesignSystem& system, const Vector& b) {
  const BlockLayout& layout = system.layout;
  Matrix out = Matrix::Zero(layout.num_predictors(), static_cast<Eigen::Index>(system.grid.size()));
  std::vector<Matrix> bases;
  for (const Block& blk : layout.blocks()) bases.push_back(basis_matrix(system.grid, blk.basis));
  for (int j = 0; j < layout.num_predictors(); ++j) {
    if (!layout.included(j)) continue;
    out.row(j) = (bases[static_cast<std::size_t>(layout.block_of(j))] * coefficient_block(layout, b, j)).transpose();
  }
  return out;
}

FitResult fit_with_penalty(const DesignSystem& system, const Matrix& P, EstimatorKind kind) {
  const PenalizedSystem ps(system.Z, P);
  FitResult fit;
  fit.kind = kind;
  fit.b_hat = ps.fit(system.y);
  for (int j = 0; j < system.layout.num_predictors(); ++j)
    fit.b_blocks.push_back(coefficient_block(system.layout, fit.b_hat, j));
  fit.beta_hat_grid = reconstruct_functions(system, fit.b_hat);
  fit.edf = ps.hat_trace();
  fit.residual_ss = (system.y - system.Z * fit.b_hat).squaredNorm();
  fit.log10_condition = std::log10(condition_number(system.Z, P));
  return fit;
}

namespace {

void require_lambda(double value, const char* name) {
  if (!(value >= 0.0) || !std::isfinite(value))
    throw ValidationError(std::string(name) + " must be finite and nonnegative");
}

}  // namespace

FitResult fit_fre(const DesignSystem& system, double lambda1) {
  require_lambda(lambda1, "lambda1");
  const std::vector<double> scales(system.layout.blocks().size(), lambda1);
  FitResult fit = fit_with_penalty(system, block_penalty(system, scales), EstimatorKind::FRE);
  fit.lambda1 = lambda1;
  return fit;
}

FitResult fit_frfm(const DesignSystem& system, double lambda1, double lambda2) {
  require_lambda(lambda1, "lambda1");
  require_lambda(lambda2, "lambda2");
  if (lambda2 < lambda1) throw ValidationError("FRFM requires lambda2 >= lambda1");
  const auto nblocks = system.layout.blocks().size();
  if (nblocks < 1 || nblocks > 2) throw ValidationError("FRFM expects a relevant block and at most one nuisance block");
  std::vector<double> scales{lambda1};
  if (nblocks == 2) scales.push_back(lambda2);
  FitResult fit = fit_with_penalty(system, block_penalty(system, scales), EstimatorKind::FRFM);
  fit.lambda1 = lambda1;
  fit.lambda2 = lambda2;
  return fit;
}

FitResult fit_frsm(const DesignSystem& system, double lambda3) {
  require_lambda(lambda3, "lambda3");
  const std::vector<double> scales(system.layout.blocks().size(), lambda3);
  FitResult fit = fit_with_penalty(system, block_penalty(system, scales), EstimatorKind::FRSM);
  fit.lambda3 = lambda3;
  return fit;
}

double hat_matrix_trace(const Matrix& Z, const Matrix& P) { return PenalizedSystem(Z, P).hat_trace(); }

Matrix hat_matrix(const Matrix& Z, const Matrix& P) {
  const PenalizedSystem ps(Z, P);
  Matrix S = Z * ps.coefficient_map();
  return 0.5 * (S + S.transpose());
}

double condition_number(const Matrix& Z, const Matrix& P) {
  Matrix A = Z.transpose() * Z + P;
  A = 0.5 * (A + A.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(A, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) return std::numeric_limits<double>::infinity();
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

ImseDecomposition imse_decomposition(const Matrix& Z, const Matrix& P, const Matrix& G, const Vector& b_true,
                                     double sigma2) {
  if (G.rows() != Z.cols() || G.cols() != Z.cols() || b_true.size() != Z.cols())
    throw ValidationError("imse decomposition: Gram matrix and b_true must match the design width");
  if (!(sigma2 >= 0.0)) throw ValidationError("imse decomposition: sigma2 must be nonnegative");
  const PenalizedSystem ps(Z, P);
  const Matrix W = ps.coefficient_map();  // K x n
  const Vector bias = W * (Z * b_true) - b_true;
  ImseDecomposition out;
  out.bias_sq = bias.dot(G * bias);
  out.variance = sigma2 * (G * W).cwiseProduct(W).sum();
  out.total = out.bias_sq + out.variance;
  return out;
}

}  // namespace frr
