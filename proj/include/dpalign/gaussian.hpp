#pragma once

#include <Eigen/Dense>

#include "dpalign/kernels.hpp"

namespace dpalign {

inline constexpr double kLog2Pi = 1.8378770664093453;

/// Zero-mean multivariate normal evaluated at one point.
struct GaussianEvaluation {
  double log_density = 0.0;
  Eigen::VectorXd weights;  // cov^{-1} z
  CholeskyFactor factor;

  /// d log N(z; 0, cov) / d cov, i.e. (w w^T - cov^{-1}) / 2.
  Eigen::MatrixXd covariance_gradient() const;
};

/// Throws FactorizationFailure when cov cannot be factorized.
GaussianEvaluation evaluate_zero_mean_gaussian(const Eigen::Ref<const Eigen::MatrixXd>& cov,
                                               const Eigen::Ref<const Eigen::VectorXd>& z);

}  // namespace dpalign
