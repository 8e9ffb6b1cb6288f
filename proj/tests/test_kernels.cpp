#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dpalign/gaussian.hpp"
#include "dpalign/kernels.hpp"
#include "oracles.hpp"

namespace dpalign {
namespace {

constexpr double kSeAtUnitDistance = 0.6065306597126334;
constexpr double kMaternAtUnitDistance = 0.4833577245965077;

KernelParams se(double ell = 1.0, double var = 1.0) {
  return KernelParams::make(KernelFamily::kSquaredExponential, ell, var);
}
KernelParams matern(double ell = 1.0, double var = 1.0) {
  return KernelParams::make(KernelFamily::kMatern32, ell, var);
}

TEST(KernelEval, SquaredExponentialAtZeroDistanceIsVariance) {
  EXPECT_DOUBLE_EQ(kernel_eval(se(), 0.3, 0.3), 1.0);
  EXPECT_DOUBLE_EQ(kernel_eval(se(0.4, 2.5), -0.7, -0.7), 2.5);
}

TEST(KernelEval, SquaredExponentialUnitDistance) {
  EXPECT_NEAR(kernel_eval(se(), 0.0, 1.0), kSeAtUnitDistance, 1e-15);
  EXPECT_NEAR(kernel_eval(se(), 0.0, 1.0), 0.606531, 1e-6);
}

TEST(KernelEval, MaternUnitDistance) {
  EXPECT_NEAR(kernel_eval(matern(), 0.0, 1.0), kMaternAtUnitDistance, 1e-15);
  EXPECT_NEAR(kernel_eval(matern(), 0.0, 1.0), 0.48336, 5e-6);
}

TEST(KernelEval, MatchesClosedFormOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-2.0, 2.0);
  std::uniform_real_distribution<double> scale(0.1, 3.0);
  for (int i = 0; i < 200; ++i) {
    const double a = pos(rng), b = pos(rng), ell = scale(rng), var = scale(rng);
    EXPECT_NEAR(kernel_eval(se(ell, var), a, b), testing::se_kernel(a, b, ell, var), 1e-14);
    EXPECT_NEAR(kernel_eval(matern(ell, var), a, b), testing::matern32_kernel(a, b, ell, var),
                1e-14);
  }
}

TEST(KernelEval, Symmetric) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> pos(-1.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double a = pos(rng), b = pos(rng);
    EXPECT_EQ(kernel_eval(se(0.3, 1.7), a, b), kernel_eval(se(0.3, 1.7), b, a));
    EXPECT_EQ(kernel_eval(matern(0.3, 1.7), a, b), kernel_eval(matern(0.3, 1.7), b, a));
  }
}

TEST(KernelEval, DerivativesMatchFiniteDifferences) {
  const double h = 1e-6;
  for (auto family : {KernelFamily::kSquaredExponential, KernelFamily::kMatern32}) {
    KernelParams p = KernelParams::make(family, 0.7, 1.3);
    const double a = 0.35, b = -0.2;
    const KernelDerivatives d = kernel_eval_derivatives(p, a, b);
    EXPECT_EQ(d.value, kernel_eval(p, a, b));
    EXPECT_NEAR(d.d_first, (kernel_eval(p, a + h, b) - kernel_eval(p, a - h, b)) / (2 * h), 1e-8);
    KernelParams up = p, down = p;
    up.log_lengthscale += h;
    down.log_lengthscale -= h;
    EXPECT_NEAR(d.d_log_lengthscale, (kernel_eval(up, a, b) - kernel_eval(down, a, b)) / (2 * h),
                1e-8);
    up = p;
    down = p;
    up.log_variance += h;
    down.log_variance -= h;
    EXPECT_NEAR(d.d_log_variance, (kernel_eval(up, a, b) - kernel_eval(down, a, b)) / (2 * h),
                1e-8);
  }
}

TEST(KernelParams, RejectsNonPositive) {
  EXPECT_THROW(KernelParams::make(KernelFamily::kSquaredExponential, 0.0, 1.0),
               std::invalid_argument);
  EXPECT_THROW(KernelParams::make(KernelFamily::kSquaredExponential, 1.0, -1.0),
               std::invalid_argument);
  EXPECT_THROW(KernelParams::make(KernelFamily::kMatern32, NAN, 1.0), std::invalid_argument);
}

TEST(KernelFamilyNames, RoundTrip) {
  EXPECT_EQ(parse_kernel_family("se"), KernelFamily::kSquaredExponential);
  EXPECT_EQ(parse_kernel_family("matern32"), KernelFamily::kMatern32);
  EXPECT_EQ(parse_kernel_family(to_string(KernelFamily::kMatern32)), KernelFamily::kMatern32);
  EXPECT_THROW(parse_kernel_family("rbf2"), std::invalid_argument);
}

TEST(GramMatrix, SinglePointIsVariance) {
  Eigen::VectorXd a(1);
  a << 0.0;
  const Eigen::MatrixXd k = gram_matrix(se(0.5, 3.0), a, a);
  ASSERT_EQ(k.rows(), 1);
  EXPECT_DOUBLE_EQ(k(0, 0), 3.0);
}

TEST(GramMatrix, SymmetricWithVarianceDiagonal) {
  const Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(7, -1.0, 1.0);
  const Eigen::MatrixXd k = gram_matrix(se(0.4, 2.0), a, a);
  EXPECT_TRUE(k.isApprox(k.transpose(), 0.0));
  for (int i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(k(i, i), 2.0);
}

TEST(GramMatrix, RectangularColumn) {
  Eigen::VectorXd a(2), b(1);
  a << 0.0, 1.0;
  b << 0.0;
  const Eigen::MatrixXd k = gram_matrix(se(), a, b);
  ASSERT_EQ(k.rows(), 2);
  ASSERT_EQ(k.cols(), 1);
  EXPECT_DOUBLE_EQ(k(0, 0), 1.0);
  EXPECT_NEAR(k(1, 0), kSeAtUnitDistance, 1e-15);
}

TEST(RobustCholesky, IdentityNeedsNoJitter) {
  const CholeskyFactor f = robust_cholesky(Eigen::MatrixXd::Identity(4, 4));
  EXPECT_EQ(f.jitter, 0.0);
  EXPECT_TRUE(f.lower.isApprox(Eigen::MatrixXd::Identity(4, 4)));
  EXPECT_DOUBLE_EQ(f.log_determinant(), 0.0);
}

TEST(RobustCholesky, Diagonal) {
  Eigen::MatrixXd m(2, 2);
  m << 4, 0, 0, 9;
  const CholeskyFactor f = robust_cholesky(m);
  Eigen::MatrixXd expected(2, 2);
  expected << 2, 0, 0, 3;
  EXPECT_TRUE(f.lower.isApprox(expected, 1e-15));
  EXPECT_NEAR(f.log_determinant(), std::log(36.0), 1e-14);
  Eigen::VectorXd rhs(2);
  rhs << 8, 27;
  EXPECT_TRUE(f.solve(rhs).isApprox(Eigen::Vector2d(2, 3), 1e-14));
  EXPECT_TRUE(f.inverse().isApprox(m.inverse(), 1e-14));
}

TEST(RobustCholesky, RankDeficientUsesJitter) {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Ones(2, 2);
  const CholeskyFactor f = robust_cholesky(m);
  EXPECT_GT(f.jitter, 0.0);
  EXPECT_LT(f.jitter, 1e-2);
  const Eigen::MatrixXd residual = f.lower * f.lower.transpose() - m;
  EXPECT_LE(residual.cwiseAbs().maxCoeff(), f.jitter * (1 + 1e-12));
}

TEST(RobustCholesky, IndefiniteThrows) {
  Eigen::MatrixXd m(2, 2);
  m << 1, 0, 0, -1;
  EXPECT_THROW(robust_cholesky(m), FactorizationFailure);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(2, 2);
  bad(0, 0) = NAN;
  EXPECT_THROW(robust_cholesky(bad), FactorizationFailure);
}

TEST(RobustCholesky, RejectsNonSquare) {
  EXPECT_THROW(robust_cholesky(Eigen::MatrixXd::Ones(2, 3)), std::invalid_argument);
}

TEST(ZeroMeanGaussian, MatchesDenseOracle) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(4, 4);
    for (int i = 0; i < 16; ++i) a(i / 4, i % 4) = normal(rng);
    const Eigen::MatrixXd cov = a * a.transpose() + 0.5 * Eigen::MatrixXd::Identity(4, 4);
    Eigen::VectorXd z(4);
    for (int i = 0; i < 4; ++i) z[i] = normal(rng);
    const GaussianEvaluation g = evaluate_zero_mean_gaussian(cov, z);
    EXPECT_NEAR(g.log_density, testing::dense_mvn_logpdf(cov, z), 1e-10);
    const Eigen::MatrixXd expected_grad =
        0.5 * (cov.inverse() * z * z.transpose() * cov.inverse() - cov.inverse());
    EXPECT_TRUE(g.covariance_gradient().isApprox(expected_grad, 1e-9));
  }
}

}  // namespace
}  // namespace dpalign
