#include <cmath>

#include <gtest/gtest.h>

#include "dpalign/metrics.hpp"

namespace dpalign {
namespace {

TEST(AlignmentError, IdenticalRowsGiveZero) {
  const Eigen::MatrixXd rows = Eigen::MatrixXd::Constant(4, 3, 0.7);
  EXPECT_EQ(alignment_error(rows, {0, 0, 1, 1}, AlignmentMode::kMean), 0.0);
  EXPECT_EQ(alignment_error(rows, {0, 0, 1, 1}, AlignmentMode::kMedian), 0.0);
}

TEST(AlignmentError, SinglePair) {
  Eigen::MatrixXd rows(2, 2);
  rows << 0, 0, 3, 4;
  EXPECT_DOUBLE_EQ(alignment_error(rows, {0, 0}, AlignmentMode::kMean), 5.0);
}

TEST(AlignmentError, ThreeCollinearRows) {
  Eigen::MatrixXd rows(3, 1);
  rows << 0, 1, 3;
  EXPECT_DOUBLE_EQ(alignment_error(rows, {2, 2, 2}, AlignmentMode::kMean), 2.0);
  EXPECT_DOUBLE_EQ(alignment_error(rows, {2, 2, 2}, AlignmentMode::kMedian), 2.0);
}

TEST(AlignmentError, SumsOverGroupsAndIgnoresSingletons) {
  Eigen::MatrixXd rows(5, 1);
  rows << 0, 2, 10, 11, 50;
  EXPECT_DOUBLE_EQ(alignment_error(rows, {0, 0, 1, 1, 2}, AlignmentMode::kMean), 3.0);
}

TEST(AlignmentError, MedianDiffersFromMean) {
  Eigen::MatrixXd rows(3, 1);
  rows << 0, 1, 10;
  EXPECT_DOUBLE_EQ(alignment_error(rows, {0, 0, 0}, AlignmentMode::kMean), 20.0 / 3.0);
  EXPECT_DOUBLE_EQ(alignment_error(rows, {0, 0, 0}, AlignmentMode::kMedian), 9.0);
}

TEST(AlignmentError, MissingGroupsThrow) {
  EXPECT_THROW(alignment_error(Eigen::MatrixXd::Zero(2, 2), {}, AlignmentMode::kMean),
               MissingGroups);
}

TEST(DataFit, SquareRootOfNoiseVariance) {
  EXPECT_NEAR(data_fit_metric(NoiseModel::from_precision(100)), 0.1, 1e-15);
  EXPECT_NEAR(data_fit_metric(NoiseModel::from_precision(1)), 1.0, 1e-15);
  EXPECT_NEAR(data_fit_metric(NoiseModel::from_precision(400)), 0.05, 1e-15);
}

TEST(WarpComplexity, Examples) {
  WarpState flat;
  flat.u = Eigen::VectorXd::Constant(4, 1.5);
  EXPECT_EQ(warp_complexity_metric({flat, flat}), 0.0);
  WarpState w;
  w.u = Eigen::Vector3d(0, 1, 3);
  EXPECT_DOUBLE_EQ(warp_complexity_metric({w}), 3.0);
  EXPECT_DOUBLE_EQ(warp_complexity_metric({w, flat, w}), 6.0);
}

TEST(SamePartition, UpToRelabeling) {
  EXPECT_TRUE(same_partition({0, 0, 1, 1}, {3, 3, 7, 7}));
  EXPECT_TRUE(same_partition({0, 0, 1, 1}, {1, 1, 0, 0}));
  EXPECT_FALSE(same_partition({0, 0, 1, 1}, {0, 1, 1, 1}));
  EXPECT_FALSE(same_partition({0, 0, 1, 1}, {0, 0, 0, 0}));
  EXPECT_FALSE(same_partition({0, 1}, {0, 1, 2}));
}

}  // namespace
}  // namespace dpalign
