#include "frr/design.hpp"

#include "frr/error.hpp"

#include <cmath>
#include <algorithm>
#include <string>

namespace frr {

void FunctionalDataset::validate() const {
  const auto n = response.size();
  if (n == 0) throw ValidationError("dataset: no subjects");
  if (curves.empty()) throw ValidationError("dataset: no predictors");
  if (grid.size() < 2) throw ValidationError("dataset: grid needs at least 2 points");
  for (std::size_t l = 1; l < grid.size(); ++l)
    if (!(grid[l] > grid[l - 1])) throw ValidationError("dataset: grid must be strictly increasing");
  for (std::size_t j = 0; j < curves.size(); ++j) {
    const Matrix& c = curves[j];
    if (c.rows() != n || c.cols() != static_cast<Eigen::Index>(grid.size()))
      throw ValidationError("dataset: predictor " + std::to_string(j) + " has shape " +
                            std::to_string(c.rows()) + "x" + std::to_string(c.cols()) + ", expected " +
                            std::to_string(n) + "x" + std::to_string(grid.size()));
    if (!c.allFinite()) throw ValidationError("dataset: predictor " + std::to_string(j) + " has non-finite values");
  }
  if (!response.allFinite()) throw ValidationError("dataset: response has non-finite values");
}

BlockLayout::BlockLayout(int num_predictors, std::vector<Block> blocks)
    : num_predictors_(num_predictors), blocks_(std::move(blocks)) {
  if (num_predictors < 1) throw ValidationError("layout: need at least one predictor");
  offsets_.assign(static_cast<std::size_t>(num_predictors), -1);
  block_index_.assign(static_cast<std::size_t>(num_predictors), -1);
  int col = 0;
  for (std::size_t g = 0; g < blocks_.size(); ++g) {
    const Block& b = blocks_[g];
    b.basis.validate();
    if (b.predictors.empty()) throw ValidationError("layout: block " + std::to_string(g) + " is empty");
    for (int j : b.predictors) {
      if (j < 0 || j >= num_predictors)
        throw ValidationError("layout: predictor index " + std::to_string(j) + " out of range");
      if (offsets_[static_cast<std::size_t>(j)] >= 0)
        throw ValidationError("layout: predictor " + std::to_string(j) + " assigned to two blocks");
      offsets_[static_cast<std::size_t>(j)] = col;
      block_index_[static_cast<std::size_t>(j)] = static_cast<int>(g);
      col += b.basis.dim();
    }
  }
  if (col == 0) throw ValidationError("layout: no predictor enters the model");
  total_columns_ = col;
}

BlockLayout BlockLayout::uniform(int num_predictors, const BasisSpec& spec) {
  Block b{{}, spec};
  for (int j = 0; j < num_predictors; ++j) b.predictors.push_back(j);
  return BlockLayout(num_predictors, {b});
}

BlockLayout BlockLayout::partitioned(int num_predictors, std::span<const int> relevant,
                                     const BasisSpec& relevant_spec, const BasisSpec& nuisance_spec) {
  std::vector<bool> is_rel(static_cast<std::size_t>(num_predictors), false);
  for (int j : relevant) {
    if (j < 0 || j >= num_predictors)
      throw ValidationError("layout: relevant index " + std::to_string(j) + " out of range");
    is_rel[static_cast<std::size_t>(j)] = true;
  }
  Block rel{{}, relevant_spec}, nui{{}, nuisance_spec};
  for (int j = 0; j < num_predictors; ++j) (is_rel[static_cast<std::size_t>(j)] ? rel : nui).predictors.push_back(j);
  std::vector<Block> blocks;
  if (rel.predictors.empty()) throw ValidationError("layout: relevant block is empty");
  blocks.push_back(std::move(rel));
  if (!nui.predictors.empty()) blocks.push_back(std::move(nui));
  return BlockLayout(num_predictors, std::move(blocks));
}

BlockLayout BlockLayout::restricted(int num_predictors, std::span<const int> relevant, const BasisSpec& spec) {
  Block rel{{relevant.begin(), relevant.end()}, spec};
  std::sort(rel.predictors.begin(), rel.predictors.end());
  return BlockLayout(num_predictors, {rel});
}

const BasisSpec& BlockLayout::spec_of(int predictor) const {
  const int g = block_index_.at(static_cast<std::size_t>(predictor));
  if (g < 0) throw ValidationError("layout: predictor " + std::to_string(predictor) + " is excluded");
  return blocks_[static_cast<std::size_t>(g)].basis;
}

std::vector<int> BlockLayout::column_order() const {
  std::vector<int> order;
  for (const Block& b : blocks_) order.insert(order.end(), b.predictors.begin(), b.predictors.end());
  return order;
}

DesignSystem build_design(const FunctionalDataset& data, const BlockLayout& layout,
                          const DesignOptions& options) {
  data.validate();
  if (layout.num_predictors() != data.num_predictors())
    throw ValidationError("design: layout covers " + std::to_string(layout.num_predictors()) +
                          " predictors, dataset has " + std::to_string(data.num_predictors()));

  DesignSystem sys;
  sys.layout = layout;
  sys.grid = data.grid;
  sys.options = options;
  const int n = data.num_subjects();
  sys.Z = Matrix::Zero(n, layout.total_columns());

  const Vector w = quadrature_weights(data.grid, options.rule);
  // weighted basis per distinct spec
  std::vector<Matrix> weighted;
  for (const Block& b : layout.blocks()) {
    const double lo = data.grid.front(), hi = data.grid.back();
    if (lo < b.basis.domain_lo || hi > b.basis.domain_hi)
      throw ValidationError("design: grid extends outside the basis domain");
    weighted.push_back(w.asDiagonal() * basis_matrix(data.grid, b.basis));
    sys.penalty_blocks.push_back(diff_penalty(b.basis.dim(), options.diff_order));
  }
  for (int j = 0; j < layout.num_predictors(); ++j) {
    if (!layout.included(j)) continue;
    const Matrix& wb = weighted[static_cast<std::size_t>(layout.block_of(j))];
    sys.Z.middleCols(layout.offset(j), wb.cols()).noalias() = data.curves[static_cast<std::size_t>(j)] * wb;
  }

  sys.y_mean = data.response.mean();
  sys.y = data.response.array() - sys.y_mean;
  if (options.centering == Centering::ResponseAndColumns) {
    sys.column_means = sys.Z.colwise().mean().transpose();
    sys.Z.rowwise() -= sys.column_means.transpose();
  }
  return sys;
}

Vector predict(const DesignSystem& system, const Vector& b) {
  if (b.size() != system.Z.cols())
    throw ValidationError("predict: coefficient length " + std::to_string(b.size()) + " != " +
                          std::to_string(system.Z.cols()) + " columns");
  return (system.Z * b).array() + system.y_mean;
}

Matrix weighted_penalty(const DesignSystem& system, std::span<const double> predictor_scale) {
  const BlockLayout& layout = system.layout;
  if (predictor_scale.size() != static_cast<std::size_t>(layout.num_predictors()))
    throw ValidationError("penalty: need one scale per predictor");
  Matrix P = Matrix::Zero(layout.total_columns(), layout.total_columns());
  for (int j = 0; j < layout.num_predictors(); ++j) {
    if (!layout.included(j)) continue;
    const double s = predictor_scale[static_cast<std::size_t>(j)];
    if (!(s >= 0.0) || !std::isfinite(s)) throw ValidationError("penalty: scales must be finite and nonnegative");
    const Matrix& R0 = system.penalty_blocks[static_cast<std::size_t>(layout.block_of(j))];
    P.block(layout.offset(j), layout.offset(j), R0.rows(), R0.cols()) = s * R0;
  }
  return P;
}

Matrix block_penalty(const DesignSystem& system, std::span<const double> block_scale) {
  const BlockLayout& layout = system.layout;
  if (block_scale.size() != layout.blocks().size())
    throw ValidationError("penalty: need one scale per block (" + std::to_string(layout.blocks().size()) + ")");
  std::vector<double> per(static_cast<std::size_t>(layout.num_predictors()), 0.0);
  for (int j = 0; j < layout.num_predictors(); ++j)
    if (layout.included(j)) per[static_cast<std::size_t>(j)] = block_scale[static_cast<std::size_t>(layout.block_of(j))];
  return weighted_penalty(system, per);
}

Matrix block_gram(const DesignSystem& system) {
  const BlockLayout& layout = system.layout;
  std::vector<Matrix> grams;
  for (const Block& b : layout.blocks()) grams.push_back(gram_matrix(b.basis, system.grid, system.options.rule));
  Matrix G = Matrix::Zero(layout.total_columns(), layout.total_columns());
  for (int j = 0; j < layout.num_predictors(); ++j) {
    if (!layout.included(j)) continue;
    const Matrix& g = grams[static_cast<std::size_t>(layout.block_of(j))];
    G.block(layout.offset(j), layout.offset(j), g.rows(), g.cols()) = g;
  }
  return G;
}

Vector coefficient_block(const BlockLayout& layout, const Vector& b, int predictor) {
  if (b.size() != layout.total_columns()) throw ValidationError("coefficients: length does not match layout");
  if (!layout.included(predictor)) return Vector::Zero(0);
  return b.segment(layout.offset(predictor), layout.dim_of(predictor));
}

}  // namespace frr
