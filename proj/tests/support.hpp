#pragma once

#include "frr/basis.hpp"
#include "frr/design.hpp"

#include <cmath>
#include <random>

namespace frr::testing {

inline Matrix random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> nd;
  Matrix m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = nd(rng);
  return m;
}

inline Vector random_vector(std::mt19937_64& rng, int n) { return random_matrix(rng, n, 1).col(0); }

/// Block-diagonal second-difference penalty with `blocks` copies of size k.
inline Matrix diff_blocks(int blocks, int k, double lambda) {
  Matrix P = Matrix::Zero(blocks * k, blocks * k);
  const Matrix R = diff_penalty(k, 2);
  for (int b = 0; b < blocks; ++b) P.block(b * k, b * k, k, k) = lambda * R;
  return P;
}

/// Synthetic functional dataset: smooth random curves, response from
/// beta_j(s) = coef[j] * sin(pi s).
inline FunctionalDataset smooth_dataset(std::mt19937_64& rng, int n, int p, int m, double noise_sd,
                                        int relevant = 2) {
  std::normal_distribution<double> nd;
  FunctionalDataset d;
  d.grid = uniform_grid(0.0, 1.0, m);
  d.curves.assign(static_cast<std::size_t>(p), Matrix(n, m));
  d.response = Vector::Zero(n);
  const Vector w = quadrature_weights(d.grid);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) {
      const double a = nd(rng), b = nd(rng), c = nd(rng);
      for (int l = 0; l < m; ++l) {
        const double s = d.grid[static_cast<std::size_t>(l)];
        d.curves[static_cast<std::size_t>(j)](i, l) = a + b * std::cos(M_PI * s) + c * std::sin(2 * M_PI * s);
      }
    }
  for (int i = 0; i < n; ++i) {
    double y = 0.0;
    for (int j = 0; j < std::min(relevant, p); ++j)
      for (int l = 0; l < m; ++l)
        y += w[l] * d.curves[static_cast<std::size_t>(j)](i, l) * 2.0 * std::sin(M_PI * d.grid[static_cast<std::size_t>(l)]);
    d.response[i] = y + noise_sd * nd(rng);
  }
  return d;
}

}  // namespace frr::testing
