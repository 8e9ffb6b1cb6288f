#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dpalign/warp.hpp"
#include "oracles.hpp"

namespace dpalign {
namespace {

TEST(WarpFromAux, ZeroAuxGivesEvenGrid) {
  const Eigen::VectorXd g = warp_from_aux(Eigen::VectorXd::Zero(5));
  Eigen::VectorXd expected(5);
  expected << -1, -0.5, 0, 0.5, 1;
  EXPECT_LE((g - expected).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(WarpFromAux, HandExample) {
  Eigen::VectorXd u(3);
  u << 0, std::log(2.0), 0;
  const Eigen::VectorXd g = warp_from_aux(u);
  EXPECT_EQ(g[0], -1.0);
  EXPECT_NEAR(g[1], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(g[2], 1.0);
}

TEST(WarpFromAux, ShiftInvariant) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(9);
  for (int i = 0; i < 9; ++i) u[i] = normal(rng);
  const Eigen::VectorXd shifted = (u.array() + 3.7).matrix();
  EXPECT_LE((warp_from_aux(u) - warp_from_aux(shifted)).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(WarpFromAux, FirstAuxHasNoEffect) {
  Eigen::VectorXd u = Eigen::VectorXd::LinSpaced(6, -1.0, 2.0);
  const Eigen::VectorXd before = warp_from_aux(u);
  u[0] = 40.0;
  EXPECT_EQ(before, warp_from_aux(u));
}

TEST(WarpFromAux, StrictlyIncreasingWithExactEndpoints) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int trial = 0; trial < 100; ++trial) {
    Eigen::VectorXd u(12);
    for (int i = 0; i < 12; ++i) u[i] = normal(rng);
    const Eigen::VectorXd g = warp_from_aux(u);
    EXPECT_EQ(g[0], -1.0);
    EXPECT_EQ(g[11], 1.0);
    for (int i = 1; i < 12; ++i) EXPECT_GT(g[i], g[i - 1]);
  }
}

TEST(WarpFromAux, RequiresTwoPoints) {
  EXPECT_THROW(warp_from_aux(Eigen::VectorXd::Zero(1)), std::invalid_argument);
}

TEST(WarpPullback, MatchesFiniteDifferences) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal;
  Eigen::VectorXd u(7), weights(7);
  for (int i = 0; i < 7; ++i) {
    u[i] = normal(rng);
    weights[i] = normal(rng);
  }
  const Eigen::VectorXd analytic = warp_pullback(u, weights);
  const Eigen::VectorXd numeric = testing::central_difference(
      [&](const Eigen::VectorXd& v) { return weights.dot(warp_from_aux(v)); }, u, 1e-6);
  EXPECT_LT(testing::max_relative_error(analytic, numeric), 1e-8);
  EXPECT_EQ(analytic[0], 0.0);
}

TEST(WarpLogPrior, UnivariateCase) {
  Eigen::VectorXd g(1), x(1);
  g << 0.4;
  x << 0.0;
  const KernelParams omega = KernelParams::make(KernelFamily::kSquaredExponential, 1.0, 2.0);
  const double v = 2.0 + 1e-4;
  EXPECT_NEAR(warp_log_prior(g, x, omega, 1e-4),
              -0.5 * std::log(2 * testing::kPi * v) - 0.16 / (2 * v), 1e-14);
}

TEST(WarpLogPrior, EvenUnderNegation) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -1, 1);
  Eigen::VectorXd u(6);
  u << 0, 0.3, -0.2, 0.5, 0.1, -0.4;
  const Eigen::VectorXd g = warp_from_aux(u);
  const KernelParams omega = KernelParams::make(KernelFamily::kSquaredExponential, 0.8, 1.2);
  EXPECT_NEAR(warp_log_prior(g, x, omega, 1e-4), warp_log_prior(-g, x, omega, 1e-4), 1e-12);
}

TEST(WarpLogPrior, MatchesDenseOracle) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> scale(0.3, 2.0);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(5, -1, 1);
    Eigen::VectorXd u(5);
    for (int i = 0; i < 5; ++i) u[i] = 0.5 * normal(rng);
    const Eigen::VectorXd g = warp_from_aux(u);
    const double ell = scale(rng), var = scale(rng);
    const KernelFamily family =
        trial % 2 ? KernelFamily::kMatern32 : KernelFamily::kSquaredExponential;
    const KernelParams omega = KernelParams::make(family, ell, var);
    const auto k = [&](double a, double b) {
      return family == KernelFamily::kMatern32 ? testing::matern32_kernel(a, b, ell, var)
                                               : testing::se_kernel(a, b, ell, var);
    };
    Eigen::MatrixXd cov = testing::dense_gram(k, x, x);
    cov.diagonal().array() += 1e-2;
    EXPECT_NEAR(warp_log_prior(g, x, omega, 1e-2), testing::dense_mvn_logpdf(cov, g), 1e-8);
  }
}

TEST(WarpLogPrior, GradientMatchesFiniteDifferences) {
  const Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(6, -1, 1);
  Eigen::VectorXd g(6);
  g << -1, -0.55, -0.1, 0.2, 0.7, 1;
  const KernelParams omega = KernelParams::make(KernelFamily::kSquaredExponential, 0.9, 1.1);
  const double noise = 1e-2;
  const WarpPriorEvaluation eval = warp_log_prior_gradient(g, x, omega, noise);
  EXPECT_NEAR(eval.value, warp_log_prior(g, x, omega, noise), 1e-12);
  const Eigen::VectorXd numeric = testing::central_difference(
      [&](const Eigen::VectorXd& v) { return warp_log_prior(v, x, omega, noise); }, g);
  EXPECT_LT(testing::max_relative_error(eval.d_warp, numeric), 1e-6);
  Eigen::VectorXd hyper(2);
  hyper << omega.log_lengthscale, omega.log_variance;
  const Eigen::VectorXd numeric_hyper = testing::central_difference(
      [&](const Eigen::VectorXd& h) {
        KernelParams p = omega;
        p.log_lengthscale = h[0];
        p.log_variance = h[1];
        return warp_log_prior(g, x, p, noise);
      },
      hyper);
  EXPECT_NEAR(eval.d_log_lengthscale, numeric_hyper[0], 1e-5 * std::max(1.0, std::abs(numeric_hyper[0])));
  EXPECT_NEAR(eval.d_log_variance, numeric_hyper[1], 1e-5 * std::max(1.0, std::abs(numeric_hyper[1])));
}

TEST(AuxTotalVariation, Examples) {
  EXPECT_EQ(aux_total_variation(Eigen::VectorXd::Constant(5, 2.5)), 0.0);
  Eigen::VectorXd u(3);
  u << 0, 1, 3;
  EXPECT_DOUBLE_EQ(aux_total_variation(u), 3.0);
}

TEST(AuxTotalVariation, ReversalInvariantPermutationSensitive) {
  Eigen::VectorXd u(4);
  u << 0, 2, -1, 1;
  EXPECT_DOUBLE_EQ(aux_total_variation(u), aux_total_variation(u.reverse().eval()));
  Eigen::VectorXd permuted(4);
  permuted << -1, 0, 1, 2;
  EXPECT_NE(aux_total_variation(u), aux_total_variation(permuted));
}

}  // namespace
}  // namespace dpalign
