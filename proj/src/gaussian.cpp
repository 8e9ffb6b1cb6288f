#include "dpalign/gaussian.hpp"

namespace dpalign {

Eigen::MatrixXd GaussianEvaluation::covariance_gradient() const {
  Eigen::MatrixXd grad = weights * weights.transpose();
  grad -= factor.inverse();
  grad *= 0.5;
  return grad;
}

GaussianEvaluation evaluate_zero_mean_gaussian(const Eigen::Ref<const Eigen::MatrixXd>& cov,
                                               const Eigen::Ref<const Eigen::VectorXd>& z) {
  GaussianEvaluation out{0.0, Eigen::VectorXd(), robust_cholesky(cov)};
  out.weights = out.factor.solve(z);
  const double n = static_cast<double>(z.size());
  out.log_density = -0.5 * (z.dot(out.weights) + out.factor.log_determinant() + n * kLog2Pi);
  return out;
}

}  // namespace dpalign
