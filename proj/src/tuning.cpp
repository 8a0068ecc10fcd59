#include "frr/tuning.hpp"

#include "frr/error.hpp"
#include "frr/estimators.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace frr {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void LambdaGrid::validate() const {
  if (!(lo > 0.0) || !(hi >= lo) || !std::isfinite(hi)) throw ValidationError("lambda grid: need 0 < lo <= hi < inf");
  if (count < 1) throw ValidationError("lambda grid: count must be >= 1");
  if (count > 1 && !(hi > lo)) throw ValidationError("lambda grid: lo == hi requires count == 1");
}

std::vector<double> LambdaGrid::values() const {
  validate();
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log10(lo), b = std::log10(hi);
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
  out.front() = lo;
  out.back() = hi;
  return out;
}

GcvPoint gcv_score(const Matrix& Z, const Vector& y, const Matrix& P) {
  if (y.size() != Z.rows()) throw ValidationError("gcv: response length does not match design rows");
  const PenalizedSystem ps(Z, P);
  const double n = static_cast<double>(Z.rows());
  GcvPoint pt;
  pt.edf = ps.hat_trace();
  pt.rss = (y - Z * ps.fit(y)).squaredNorm();
  if (!(pt.edf < n)) {
    pt.score = kInf;
    return pt;
  }
  const double shrink = 1.0 - pt.edf / n;
  pt.score = (pt.rss / n) / (shrink * shrink);
  return pt;
}

GcvPoint gcv_score_dense(const Matrix& Z, const Vector& y, const Matrix& P) {
  const Matrix S = hat_matrix(Z, P);
  const double n = static_cast<double>(Z.rows());
  GcvPoint pt;
  pt.edf = S.trace();
  pt.rss = (y - S * y).squaredNorm();
  pt.score = pt.edf < n ? n * pt.rss / ((n - pt.edf) * (n - pt.edf)) : kInf;
  return pt;
}

GcvTrace select_lambda(const Matrix& Z, const Vector& y, const PenaltyBuilder& penalty, std::span<const double> grid) {
  if (grid.empty()) throw ValidationError("gcv: empty lambda grid");
  for (std::size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw ValidationError("gcv: lambda grid must be strictly increasing");
  GcvTrace trace;
  trace.grid.assign(grid.begin(), grid.end());
  trace.scores.reserve(grid.size());
  trace.edf.reserve(grid.size());
  for (double lambda : grid) {
    GcvPoint pt;
    try {
      pt = gcv_score(Z, y, penalty(lambda));
    } catch (const ConditioningError&) {
      pt.score = kInf;
      pt.edf = std::numeric_limits<double>::quiet_NaN();
    }
    trace.scores.push_back(pt.score);
    trace.edf.push_back(pt.edf);
  }
  for (std::size_t i = 0; i < trace.scores.size(); ++i) {
    const double s = trace.scores[i];
    if (!std::isfinite(s)) continue;
    if (trace.chosen_index < 0 || s < trace.scores[static_cast<std::size_t>(trace.chosen_index)])
      trace.chosen_index = static_cast<int>(i);
  }
  if (trace.chosen_index < 0) throw SelectionError("gcv: every grid point is degenerate");
  trace.chosen_lambda = trace.grid[static_cast<std::size_t>(trace.chosen_index)];
  return trace;
}

GcvTrace tune_uniform(const DesignSystem& system, const LambdaGrid& grid) {
  const std::vector<double> ones(system.layout.blocks().size(), 1.0);
  const Matrix R = block_penalty(system, ones);
  const auto values = grid.values();
  return select_lambda(system.Z, system.y, [&](double lambda) -> Matrix { return lambda * R; }, values);
}

GcvTrace tune_frfm(const DesignSystem& system, double ratio_c, const LambdaGrid& grid) {
  if (!(ratio_c > 1.0) || !std::isfinite(ratio_c))
    throw ValidationError("FRFM penalty ratio c must be > 1, got " + std::to_string(ratio_c));
  const auto nblocks = system.layout.blocks().size();
  if (nblocks < 1 || nblocks > 2) throw ValidationError("FRFM expects a relevant block and at most one nuisance block");
  std::vector<double> scales{1.0};
  if (nblocks == 2) scales.push_back(ratio_c);
  const Matrix R = block_penalty(system, scales);
  const auto values = grid.values();
  return select_lambda(system.Z, system.y, [&](double lambda) -> Matrix { return lambda * R; }, values);
}

}  // namespace frr
