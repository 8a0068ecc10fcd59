#include "frr/basis.hpp"

#include "frr/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace frr {

void BasisSpec::validate() const {
  if (!(std::isfinite(domain_lo) && std::isfinite(domain_hi)))
    throw ValidationError("basis: domain endpoints must be finite");
  if (!(domain_lo < domain_hi))
    throw ValidationError("basis: domain_lo must be < domain_hi");
  if (order < 2) throw ValidationError("basis: order must be >= 2, got " + std::to_string(order));
  if (interior_knots < 0)
    throw ValidationError("basis: interior_knots must be >= 0, got " + std::to_string(interior_knots));
}

void PenaltySpec::validate(int block_dim) const {
  if (diff_order < 1 || diff_order >= block_dim)
    throw ValidationError("penalty: difference order must satisfy 1 <= m < K (m=" +
                          std::to_string(diff_order) + ", K=" + std::to_string(block_dim) + ")");
  if (!(scale >= 0.0)) throw ValidationError("penalty: scale must be nonnegative");
}

KnotVector make_knots(const BasisSpec& spec) {
  spec.validate();
  KnotVector kv;
  kv.order = spec.order;
  kv.knots.reserve(static_cast<std::size_t>(spec.dim() + spec.order));
  kv.knots.insert(kv.knots.end(), static_cast<std::size_t>(spec.order), spec.domain_lo);
  const double width = spec.domain_hi - spec.domain_lo;
  for (int i = 1; i <= spec.interior_knots; ++i)
    kv.knots.push_back(spec.domain_lo + width * i / (spec.interior_knots + 1));
  kv.knots.insert(kv.knots.end(), static_cast<std::size_t>(spec.order), spec.domain_hi);
  return kv;
}

Vector eval_basis(double s, const KnotVector& kv) {
  const auto& t = kv.knots;
  const int q = kv.order;
  const int dim = kv.dim();
  if (!(s >= kv.lo() && s <= kv.hi()))
    throw DomainError("basis: evaluation point " + std::to_string(s) + " outside [" +
                      std::to_string(kv.lo()) + ", " + std::to_string(kv.hi()) + "]");

  // knot span mu with t[mu] <= s < t[mu+1]; at the right end use the last
  // non-empty span
  int mu;
  if (s >= t[static_cast<std::size_t>(dim)]) {
    mu = dim - 1;
  } else {
    auto it = std::upper_bound(t.begin(), t.end(), s);
    mu = static_cast<int>(it - t.begin()) - 1;
  }

  // triangular Cox-de Boor table, local[r] = B_{mu-d+r, d+1}(s)
  std::vector<double> local(static_cast<std::size_t>(q), 0.0);
  local[0] = 1.0;
  for (int d = 1; d < q; ++d) {
    double saved = 0.0;
    for (int r = 0; r < d; ++r) {
      const int left = mu - d + 1 + r;  // index of B_{left, d}
      const double tl = t[static_cast<std::size_t>(left)];
      const double tr = t[static_cast<std::size_t>(left + d)];
      const double denom = tr - tl;
      const double term = denom > 0.0 ? local[static_cast<std::size_t>(r)] / denom : 0.0;
      local[static_cast<std::size_t>(r)] = saved + (tr - s) * term;
      saved = (s - tl) * term;
    }
    local[static_cast<std::size_t>(d)] = saved;
  }

  Vector out = Vector::Zero(dim);
  for (int r = 0; r < q; ++r) {
    const int k = mu - q + 1 + r;
    if (k >= 0 && k < dim) out[k] = local[static_cast<std::size_t>(r)];
  }
  return out;
}

Matrix basis_matrix(std::span<const double> grid, const BasisSpec& spec) {
  const KnotVector kv = make_knots(spec);
  Matrix B(static_cast<Eigen::Index>(grid.size()), spec.dim());
  for (std::size_t i = 0; i < grid.size(); ++i)
    B.row(static_cast<Eigen::Index>(i)) = eval_basis(grid[i], kv).transpose();
  return B;
}

Vector quadrature_weights(std::span<const double> grid, Quadrature rule) {
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (m < 2) throw ValidationError("quadrature: grid needs at least 2 points");
  for (Eigen::Index i = 1; i < m; ++i)
    if (!(grid[static_cast<std::size_t>(i)] > grid[static_cast<std::size_t>(i - 1)]))
      throw ValidationError("quadrature: grid must be strictly increasing");
  Vector w = Vector::Zero(m);
  for (Eigen::Index i = 0; i + 1 < m; ++i) {
    const double h = grid[static_cast<std::size_t>(i + 1)] - grid[static_cast<std::size_t>(i)];
    if (rule == Quadrature::Trapezoid) {
      w[i] += 0.5 * h;
      w[i + 1] += 0.5 * h;
    } else {
      w[i] += h;
    }
  }
  return w;
}

double integrate_product(std::span<const double> f, std::span<const double> g,
                         std::span<const double> grid, Quadrature rule) {
  if (f.size() != grid.size() || g.size() != grid.size())
    throw ValidationError("quadrature: sample length does not match grid");
  const Vector w = quadrature_weights(grid, rule);
  double acc = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) acc += w[static_cast<Eigen::Index>(i)] * f[i] * g[i];
  return acc;
}

Matrix gram_matrix(const BasisSpec& spec, std::span<const double> grid, Quadrature rule) {
  spec.validate();
  if (grid.size() < static_cast<std::size_t>(2 * spec.dim()))
    throw ValidationError("gram: grid of " + std::to_string(grid.size()) +
                          " points too coarse for K=" + std::to_string(spec.dim()) + " (need >= 2K)");
  const Matrix B = basis_matrix(grid, spec);
  const Vector w = quadrature_weights(grid, rule);
  Matrix G = B.transpose() * w.asDiagonal() * B;
  // exact symmetry
  return 0.5 * (G + G.transpose());
}

Matrix diff_penalty(int dim, int diff_order) {
  if (diff_order < 1 || diff_order >= dim)
    throw ValidationError("penalty: difference order must satisfy 1 <= m < K (m=" +
                          std::to_string(diff_order) + ", K=" + std::to_string(dim) + ")");
  Matrix D = Matrix::Identity(dim, dim);
  for (int r = 0; r < diff_order; ++r) {
    const Eigen::Index rows = D.rows() - 1;
    D = (D.bottomRows(rows) - D.topRows(rows)).eval();
  }
  return D.transpose() * D;
}

Vector project_trajectory(std::span<const double> values, const BasisSpec& spec,
                          std::span<const double> grid) {
  if (values.size() != grid.size())
    throw ValidationError("project: " + std::to_string(values.size()) + " values for a grid of " +
                          std::to_string(grid.size()));
  for (double v : values)
    if (!std::isfinite(v)) throw ValidationError("project: non-finite trajectory value");
  const Matrix B = basis_matrix(grid, spec);
  Eigen::ColPivHouseholderQR<Matrix> qr(B);
  if (qr.rank() < B.cols())
    throw ConditioningError("project: basis matrix is rank deficient on this grid (rank " +
                                std::to_string(qr.rank()) + " < K=" + std::to_string(B.cols()) + ")",
                            0.0);
  const Eigen::Map<const Vector> v(values.data(), static_cast<Eigen::Index>(values.size()));
  return qr.solve(v);
}

std::vector<double> uniform_grid(double lo, double hi, int count) {
  if (count < 2) throw ValidationError("grid: need at least 2 points");
  std::vector<double> g(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  g.back() = hi;
  return g;
}

}  // namespace frr
