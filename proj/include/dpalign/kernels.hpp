#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace dpalign {

enum class KernelFamily { kSquaredExponential, kMatern32 };

std::string_view to_string(KernelFamily family);
/// Accepts "se" / "squared_exponential" and "matern32" / "matern". Throws std::invalid_argument.
KernelFamily parse_kernel_family(std::string_view name);

/// Stationary 1-D covariance function. Lengthscale and variance are held on a log
/// scale so that optimizers can work unconstrained.
struct KernelParams {
  KernelFamily family = KernelFamily::kSquaredExponential;
  double log_lengthscale = 0.0;
  double log_variance = 0.0;

  /// Throws std::invalid_argument unless lengthscale > 0 and variance > 0.
  static KernelParams make(KernelFamily family, double lengthscale, double variance);

  double lengthscale() const { return std::exp(log_lengthscale); }
  double variance() const { return std::exp(log_variance); }
};

/// Kernel value plus its partial derivatives.
struct KernelDerivatives {
  double value = 0.0;
  double d_log_lengthscale = 0.0;
  double d_log_variance = 0.0;
  double d_first = 0.0;  // d k(a, b) / d a
};

double kernel_eval(const KernelParams& p, double a, double b);
KernelDerivatives kernel_eval_derivatives(const KernelParams& p, double a, double b);

Eigen::MatrixXd gram_matrix(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& a,
                            const Eigen::Ref<const Eigen::VectorXd>& b);

class FactorizationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lower Cholesky factor of M + jitter * I.
struct CholeskyFactor {
  Eigen::MatrixXd lower;
  double jitter = 0.0;

  Eigen::Index size() const { return lower.rows(); }
  double log_determinant() const;
  Eigen::VectorXd solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const;
  Eigen::MatrixXd inverse() const;
};

/// Factorizes a symmetric PSD matrix. The first attempt adds no jitter; later
/// attempts add 1e-8 * mean(diag), growing x10 per attempt. Reaching
/// 1e-2 * mean(diag) throws FactorizationFailure.
CholeskyFactor robust_cholesky(const Eigen::Ref<const Eigen::MatrixXd>& m);

}  // namespace dpalign
