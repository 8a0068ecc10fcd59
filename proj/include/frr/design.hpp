#pragma once

// Response vector and block-structured design matrix for the scalar-on-function
// linear model y_i = alpha + sum_j integral z_ij(s) beta_j(s) ds + eps_i.

#include "frr/basis.hpp"

#include <span>
#include <vector>

namespace frr {

/// Functional covariates sampled on a common grid. `curves[j]` is the n x M
/// matrix of predictor j evaluated at every grid point.
struct FunctionalDataset {
  std::vector<double> grid;
  std::vector<Matrix> curves;
  Vector response;

  int num_subjects() const noexcept { return static_cast<int>(response.size()); }
  int num_predictors() const noexcept { return static_cast<int>(curves.size()); }
  int num_grid() const noexcept { return static_cast<int>(grid.size()); }

  void validate() const;
};

/// One group of predictors sharing a basis and a penalty scale.
struct Block {
  std::vector<int> predictors;  ///< 0-based predictor indices, in column order
  BasisSpec basis;
};

/// Column layout of the design matrix. Columns are ordered block by block and
/// predictor by predictor within a block. Predictors that belong to no block
/// are excluded from the model (their coefficient function is zero).
class BlockLayout {
 public:
  BlockLayout() = default;
  BlockLayout(int num_predictors, std::vector<Block> blocks);

  /// Every predictor in a single block.
  static BlockLayout uniform(int num_predictors, const BasisSpec& spec);
  /// Relevant block first, nuisance block second (omitted when empty).
  static BlockLayout partitioned(int num_predictors, std::span<const int> relevant,
                                 const BasisSpec& relevant_spec, const BasisSpec& nuisance_spec);
  /// Only `relevant` enters the model.
  static BlockLayout restricted(int num_predictors, std::span<const int> relevant,
                                const BasisSpec& spec);

  int num_predictors() const noexcept { return num_predictors_; }
  int total_columns() const noexcept { return total_columns_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

  bool included(int predictor) const { return offsets_.at(static_cast<std::size_t>(predictor)) >= 0; }
  /// First column of the predictor's coefficient block, -1 when excluded.
  int offset(int predictor) const { return offsets_.at(static_cast<std::size_t>(predictor)); }
  int block_of(int predictor) const { return block_index_.at(static_cast<std::size_t>(predictor)); }
  const BasisSpec& spec_of(int predictor) const;
  int dim_of(int predictor) const { return spec_of(predictor).dim(); }
  /// Predictors in column order.
  std::vector<int> column_order() const;

 private:
  int num_predictors_ = 0;
  int total_columns_ = 0;
  std::vector<Block> blocks_;
  std::vector<int> offsets_;
  std::vector<int> block_index_;
};

enum class Centering {
  ResponseOnly,        ///< simulation protocol: design columns left as is
  ResponseAndColumns,  ///< applied fitting with an intercept
};

struct DesignOptions {
  Centering centering = Centering::ResponseOnly;
  Quadrature rule = Quadrature::Trapezoid;
  int diff_order = 2;
};

struct DesignSystem {
  Matrix Z;
  Vector y;  ///< centered response
  double y_mean = 0.0;
  Vector column_means;  ///< empty unless columns were centered
  BlockLayout layout;
  std::vector<Matrix> penalty_blocks;  ///< R0 per layout block
  std::vector<double> grid;
  DesignOptions options;

  int num_subjects() const noexcept { return static_cast<int>(y.size()); }
  int num_columns() const noexcept { return static_cast<int>(Z.cols()); }
};

/// Z entry (i, offset_j + k) is the quadrature value of integral z_ij psi_k.
DesignSystem build_design(const FunctionalDataset& data, const BlockLayout& layout,
                          const DesignOptions& options = {});

/// Z b + y_mean.
Vector predict(const DesignSystem& system, const Vector& b);

/// Block-diagonal penalty with predictor j's R0 scaled by `predictor_scale[j]`.
Matrix weighted_penalty(const DesignSystem& system, std::span<const double> predictor_scale);

/// Block-diagonal penalty with every predictor of block g scaled by `block_scale[g]`.
Matrix block_penalty(const DesignSystem& system, std::span<const double> block_scale);

/// Block-diagonal Gram matrix, one G per included predictor, in column order.
Matrix block_gram(const DesignSystem& system);

/// Predictor j's coefficient slice of a full coefficient vector.
Vector coefficient_block(const BlockLayout& layout, const Vector& b, int predictor);

}  // namespace frr
