#pragma once

// Clamped uniform B-spline bases on a closed interval, their evaluation on
// observation grids, and the Gram and difference-penalty matrices built from
// them.

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace frr {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Knot layout for one coefficient-function block. The basis dimension is
/// always `interior_knots + order`.
struct BasisSpec {
  double domain_lo = 0.0;
  double domain_hi = 1.0;
  int order = 4;  ///< spline order (degree + 1)
  int interior_knots = 7;

  int dim() const noexcept { return interior_knots + order; }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const;

  bool operator==(const BasisSpec&) const = default;
};

/// Clamped knot sequence: `order` copies of each endpoint around equispaced
/// interior knots. Length is dim + order.
struct KnotVector {
  std::vector<double> knots;
  int order = 0;

  int dim() const noexcept { return static_cast<int>(knots.size()) - order; }
  double lo() const { return knots.front(); }
  double hi() const { return knots.back(); }
};

struct PenaltySpec {
  int diff_order = 2;
  double scale = 0.0;

  void validate(int block_dim) const;
};

/// Integration rule used for every integral over the domain.
enum class Quadrature { Trapezoid, LeftRectangle };

KnotVector make_knots(const BasisSpec& spec);

/// Cox-de Boor evaluation of all `knots.dim()` basis functions at `s`.
/// The right endpoint is assigned to the last non-degenerate knot interval so
/// that the basis stays a partition of unity on the closed domain.
Vector eval_basis(double s, const KnotVector& knots);

/// Row i holds eval_basis(grid[i]).
Matrix basis_matrix(std::span<const double> grid, const BasisSpec& spec);

/// Quadrature weights on a strictly increasing grid; sum(w) = hi - lo for the
/// trapezoid rule when the grid spans the domain.
Vector quadrature_weights(std::span<const double> grid, Quadrature rule = Quadrature::Trapezoid);

/// Integral of the product of two sampled functions.
double integrate_product(std::span<const double> f, std::span<const double> g,
                         std::span<const double> grid, Quadrature rule = Quadrature::Trapezoid);

/// G_kl = integral of psi_k psi_l, by quadrature on `grid` (requires M >= 2K).
Matrix gram_matrix(const BasisSpec& spec, std::span<const double> grid,
                   Quadrature rule = Quadrature::Trapezoid);

/// R0 = D'D with D the (K - m) x K matrix of m-th order differences.
Matrix diff_penalty(int dim, int diff_order = 2);

/// Unpenalized least-squares coefficients of sampled values against the basis.
Vector project_trajectory(std::span<const double> values, const BasisSpec& spec,
                          std::span<const double> grid);

/// M equispaced points covering [lo, hi] including both ends.
std::vector<double> uniform_grid(double lo, double hi, int count);

}  // namespace frr
