#include "frr/design.hpp"
#include "frr/error.hpp"
#include "frr/estimators.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace frr;
using frr::testing::smooth_dataset;

namespace {

FunctionalDataset constant_dataset(int n, int p, int m, double value) {
  FunctionalDataset d;
  d.grid = uniform_grid(0.0, 1.0, m);
  d.curves.assign(static_cast<std::size_t>(p), Matrix::Constant(n, m, value));
  d.response = Vector::LinSpaced(n, 1.0, static_cast<double>(n));
  return d;
}

}  // namespace

TEST(BlockLayout, UniformOffsets) {
  const BlockLayout layout = BlockLayout::uniform(10, {0.0, 1.0, 4, 7});
  EXPECT_EQ(layout.total_columns(), 110);
  for (int j = 0; j < 10; ++j) {
    EXPECT_EQ(layout.offset(j), 11 * j);
    EXPECT_EQ(layout.dim_of(j), 11);
  }
}

TEST(BlockLayout, PartitionedPutsRelevantFirst) {
  const std::vector<int> rel{1, 4};
  const BlockLayout layout = BlockLayout::partitioned(5, rel, {0.0, 1.0, 4, 5}, {0.0, 1.0, 4, 3});
  EXPECT_EQ(layout.total_columns(), 2 * 9 + 3 * 7);
  EXPECT_EQ(layout.column_order(), (std::vector<int>{1, 4, 0, 2, 3}));
  EXPECT_EQ(layout.offset(1), 0);
  EXPECT_EQ(layout.offset(4), 9);
  EXPECT_EQ(layout.offset(0), 18);
  EXPECT_EQ(layout.offset(3), 32);
  EXPECT_EQ(layout.block_of(4), 0);
  EXPECT_EQ(layout.block_of(2), 1);
}

TEST(BlockLayout, RestrictedExcludesOthers) {
  const std::vector<int> rel{2, 0, 1};
  const BlockLayout layout = BlockLayout::restricted(10, rel, {0.0, 1.0, 4, 5});
  EXPECT_EQ(layout.total_columns(), 27);
  EXPECT_FALSE(layout.included(5));
  EXPECT_EQ(layout.offset(0), 0);
  EXPECT_EQ(layout.offset(2), 18);
  EXPECT_THROW(layout.spec_of(5), ValidationError);
}

TEST(BlockLayout, RejectsOverlapAndRange) {
  const BasisSpec s{0.0, 1.0, 4, 3};
  EXPECT_THROW(BlockLayout(3, {Block{{0, 1}, s}, Block{{1, 2}, s}}), ValidationError);
  EXPECT_THROW(BlockLayout(3, {Block{{0, 3}, s}}), ValidationError);
  const std::vector<int> none;
  EXPECT_THROW(BlockLayout::partitioned(3, none, s, s), ValidationError);
}

TEST(BuildDesign, ColumnCount) {
  std::mt19937_64 rng(1);
  const FunctionalDataset d = smooth_dataset(rng, 20, 10, 100, 0.1);
  const DesignSystem sys = build_design(d, BlockLayout::uniform(10, {0.0, 1.0, 4, 7}));
  EXPECT_EQ(sys.Z.rows(), 20);
  EXPECT_EQ(sys.Z.cols(), 110);
  EXPECT_EQ(sys.penalty_blocks.size(), 1u);
}

TEST(BuildDesign, ConstantTrajectoryGivesBasisIntegrals) {
  const FunctionalDataset d = constant_dataset(3, 2, 100, 1.0);
  const BasisSpec spec{0.0, 1.0, 4, 7};
  const DesignSystem sys = build_design(d, BlockLayout::uniform(2, spec));
  // trapezoid sums recomputed pointwise
  const KnotVector kv = make_knots(spec);
  const double h = 1.0 / 99.0;
  Vector integrals = Vector::Zero(11);
  for (int l = 0; l < 100; ++l)
    integrals += (l == 0 || l == 99 ? 0.5 * h : h) * eval_basis(d.grid[static_cast<std::size_t>(l)], kv);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 2; ++j)
      EXPECT_LT((sys.Z.row(i).segment(11 * j, 11).transpose() - integrals).cwiseAbs().maxCoeff(), 1e-15);
  // exact integral of a clamped B-spline: (t_{k+q} - t_k) / q
  for (int k = 0; k < 11; ++k) {
    const double exact = (kv.knots[static_cast<std::size_t>(k + 4)] - kv.knots[static_cast<std::size_t>(k)]) / 4.0;
    EXPECT_NEAR(sys.Z(0, k), exact, 5e-4);
  }
}

TEST(BuildDesign, BasisFunctionTrajectoryGivesGramRow) {
  const BasisSpec spec{0.0, 1.0, 4, 7};
  FunctionalDataset d = constant_dataset(2, 1, 100, 0.0);
  const Matrix B = basis_matrix(d.grid, spec);
  d.curves[0].row(0) = B.col(2).transpose();
  d.curves[0].row(1) = B.col(7).transpose();
  const DesignSystem sys = build_design(d, BlockLayout::uniform(1, spec));
  const Matrix G = gram_matrix(spec, d.grid);
  EXPECT_LT((sys.Z.row(0) - G.row(2)).cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_LT((sys.Z.row(1) - G.row(7)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BuildDesign, ResponseCentered) {
  std::mt19937_64 rng(2);
  FunctionalDataset d = smooth_dataset(rng, 30, 3, 60, 0.5);
  d.response.array() += 17.0;
  const DesignSystem sys = build_design(d, BlockLayout::uniform(3, {0.0, 1.0, 4, 5}));
  EXPECT_NEAR(sys.y.mean(), 0.0, 1e-12);
  EXPECT_NEAR(sys.y_mean, d.response.mean(), 1e-14);
  EXPECT_EQ(sys.column_means.size(), 0);
  const Vector fitted = predict(sys, Vector::Zero(sys.num_columns()));
  for (int i = 0; i < 30; ++i) EXPECT_EQ(fitted[i], sys.y_mean);
}

TEST(BuildDesign, ColumnCenteringMode) {
  std::mt19937_64 rng(3);
  const FunctionalDataset d = smooth_dataset(rng, 25, 2, 50, 0.5);
  const DesignSystem sys =
      build_design(d, BlockLayout::uniform(2, {0.0, 1.0, 4, 5}), {Centering::ResponseAndColumns});
  EXPECT_LT(sys.Z.colwise().mean().cwiseAbs().maxCoeff(), 1e-15);
  EXPECT_EQ(sys.column_means.size(), 18);
}

TEST(BuildDesign, LinearInTrajectories) {
  std::mt19937_64 rng(4);
  FunctionalDataset d = smooth_dataset(rng, 12, 3, 40, 0.5);
  const BlockLayout layout = BlockLayout::uniform(3, {0.0, 1.0, 4, 5});
  const DesignSystem base = build_design(d, layout);
  for (double alpha : {2.0, 0.5, -4.0}) {
    FunctionalDataset scaled = d;
    for (auto& c : scaled.curves) c *= alpha;
    EXPECT_EQ(build_design(scaled, layout).Z, alpha * base.Z);
  }
  FunctionalDataset scaled = d;
  for (auto& c : scaled.curves) c *= 3.0;
  EXPECT_LT((build_design(scaled, layout).Z - 3.0 * base.Z).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(BuildDesign, PermutationInvariance) {
  std::mt19937_64 rng(5);
  const FunctionalDataset d = smooth_dataset(rng, 15, 4, 50, 0.5);
  const std::vector<int> perm{2, 0, 3, 1};
  FunctionalDataset pd = d;
  for (int j = 0; j < 4; ++j) pd.curves[static_cast<std::size_t>(j)] = d.curves[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
  const BasisSpec rs{0.0, 1.0, 4, 5}, ns{0.0, 1.0, 4, 3};
  const std::vector<int> rel{0, 3}, prel{1, 2};  // original 0 -> new 1, original 3 -> new 2
  const DesignSystem a = build_design(d, BlockLayout::partitioned(4, rel, rs, ns));
  const DesignSystem b = build_design(pd, BlockLayout::partitioned(4, prel, rs, ns));
  for (int j = 0; j < 4; ++j) {
    const int nj = static_cast<int>(std::find(perm.begin(), perm.end(), j) - perm.begin());
    EXPECT_EQ(a.Z.middleCols(a.layout.offset(j), a.layout.dim_of(j)),
              b.Z.middleCols(b.layout.offset(nj), b.layout.dim_of(nj)));
  }
}

TEST(BuildDesign, DimensionMismatchRejected) {
  std::mt19937_64 rng(6);
  FunctionalDataset d = smooth_dataset(rng, 10, 2, 30, 0.5);
  EXPECT_THROW(build_design(d, BlockLayout::uniform(3, {0.0, 1.0, 4, 3})), ValidationError);
  FunctionalDataset bad = d;
  bad.curves[1] = Matrix::Zero(9, 30);
  EXPECT_THROW(build_design(bad, BlockLayout::uniform(2, {0.0, 1.0, 4, 3})), ValidationError);
  bad = d;
  bad.grid[3] = bad.grid[2];
  EXPECT_THROW(build_design(bad, BlockLayout::uniform(2, {0.0, 1.0, 4, 3})), ValidationError);
  bad = d;
  bad.response[0] = std::nan("");
  EXPECT_THROW(build_design(bad, BlockLayout::uniform(2, {0.0, 1.0, 4, 3})), ValidationError);
  EXPECT_THROW(build_design(d, BlockLayout::uniform(2, {0.2, 1.0, 4, 3})), ValidationError);
}

TEST(Predict, LengthMismatch) {
  std::mt19937_64 rng(7);
  const DesignSystem sys = build_design(smooth_dataset(rng, 10, 2, 30, 0.5), BlockLayout::uniform(2, {0.0, 1.0, 4, 3}));
  EXPECT_THROW(predict(sys, Vector::Zero(13)), ValidationError);
}

TEST(Predict, SquareSystemInterpolates) {
  std::mt19937_64 rng(8);
  const FunctionalDataset d = smooth_dataset(rng, 14, 2, 60, 1.0);
  std::normal_distribution<double> nd;
  FunctionalDataset rough = d;
  for (auto& c : rough.curves)
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] += nd(rng);
  const DesignSystem sys = build_design(rough, BlockLayout::uniform(2, {0.0, 1.0, 4, 3}));
  ASSERT_EQ(sys.Z.rows(), sys.Z.cols());
  const Vector b = solve_penalized(sys.Z, sys.y, Matrix::Zero(14, 14));
  EXPECT_LT((predict(sys, b) - rough.response).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Predict, MatchesDirectGridIntegration) {
  std::mt19937_64 rng(9);
  const FunctionalDataset d = smooth_dataset(rng, 20, 3, 100, 0.5);
  const BasisSpec spec{0.0, 1.0, 4, 7};
  const DesignSystem sys = build_design(d, BlockLayout::uniform(3, spec));
  std::normal_distribution<double> nd;
  Vector b(33);
  for (int k = 0; k < 33; ++k) b[k] = nd(rng);

  // beta_j on the grid from the coefficients, then a plain trapezoid sum
  const KnotVector kv = make_knots(spec);
  const double h = 1.0 / 99.0;
  for (int i = 0; i < 20; ++i) {
    double eta = 0.0;
    for (int j = 0; j < 3; ++j)
      for (int l = 0; l < 100; ++l) {
        const double s = d.grid[static_cast<std::size_t>(l)];
        const double beta = eval_basis(s, kv).dot(b.segment(11 * j, 11));
        eta += (l == 0 || l == 99 ? 0.5 * h : h) * d.curves[static_cast<std::size_t>(j)](i, l) * beta;
      }
    EXPECT_NEAR(predict(sys, b)[i], eta + sys.y_mean, 1e-10);
  }
}

TEST(Penalty, WeightedAndBlockScales) {
  std::mt19937_64 rng(10);
  const FunctionalDataset d = smooth_dataset(rng, 10, 3, 40, 0.5);
  const std::vector<int> rel{1};
  const DesignSystem sys =
      build_design(d, BlockLayout::partitioned(3, rel, {0.0, 1.0, 4, 5}, {0.0, 1.0, 4, 3}));
  const std::vector<double> scales{2.0, 7.0};
  const Matrix P = block_penalty(sys, scales);
  EXPECT_EQ(P.rows(), 9 + 7 + 7);
  EXPECT_EQ(P.topLeftCorner(9, 9), 2.0 * diff_penalty(9, 2));
  EXPECT_EQ(P.block(9, 9, 7, 7), 7.0 * diff_penalty(7, 2));
  EXPECT_EQ(P.block(16, 16, 7, 7), 7.0 * diff_penalty(7, 2));
  EXPECT_EQ(P.block(0, 9, 9, 14).cwiseAbs().sum(), 0.0);
  const std::vector<double> bad{1.0};
  EXPECT_THROW(block_penalty(sys, bad), ValidationError);
  const std::vector<double> negative{1.0, -1.0, 1.0};
  EXPECT_THROW(weighted_penalty(sys, negative), ValidationError);
}
