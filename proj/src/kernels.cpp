#include "dpalign/kernels.hpp"

#include <cmath>

namespace dpalign {

namespace {
constexpr double kSqrt3 = 1.7320508075688772;
}

std::string_view to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::kSquaredExponential:
      return "se";
    case KernelFamily::kMatern32:
      return "matern32";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "se" || name == "squared_exponential") return KernelFamily::kSquaredExponential;
  if (name == "matern32" || name == "matern") return KernelFamily::kMatern32;
  throw std::invalid_argument("unknown kernel family '" + std::string(name) + "'");
}

KernelParams KernelParams::make(KernelFamily family, double lengthscale, double variance) {
  if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
    throw std::invalid_argument("kernel lengthscale must be positive and finite");
  }
  if (!(variance > 0.0) || !std::isfinite(variance)) {
    throw std::invalid_argument("kernel variance must be positive and finite");
  }
  return KernelParams{family, std::log(lengthscale), std::log(variance)};
}

double kernel_eval(const KernelParams& p, double a, double b) {
  const double diff = a - b;
  const double ell = p.lengthscale();
  const double var = p.variance();
  switch (p.family) {
    case KernelFamily::kSquaredExponential:
      return var * std::exp(-0.5 * (diff * diff / (ell * ell)));
    case KernelFamily::kMatern32: {
      const double q = kSqrt3 * std::abs(diff) / ell;
      return var * (1.0 + q) * std::exp(-q);
    }
  }
  return 0.0;
}

KernelDerivatives kernel_eval_derivatives(const KernelParams& p, double a, double b) {
  const double diff = a - b;
  const double ell = p.lengthscale();
  const double var = p.variance();
  KernelDerivatives out;
  switch (p.family) {
    case KernelFamily::kSquaredExponential: {
      const double scaled = diff * diff / (ell * ell);
      out.value = var * std::exp(-0.5 * scaled);
      out.d_log_lengthscale = out.value * scaled;
      out.d_first = -out.value * diff / (ell * ell);
      break;
    }
    case KernelFamily::kMatern32: {
      const double q = kSqrt3 * std::abs(diff) / ell;
      const double e = std::exp(-q);
      out.value = var * (1.0 + q) * e;
      out.d_log_lengthscale = var * q * q * e;
      out.d_first = -3.0 * var * diff / (ell * ell) * e;
      break;
    }
  }
  out.d_log_variance = out.value;
  return out;
}

Eigen::MatrixXd gram_matrix(const KernelParams& p, const Eigen::Ref<const Eigen::VectorXd>& a,
                            const Eigen::Ref<const Eigen::VectorXd>& b) {
  Eigen::MatrixXd k(a.size(), b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) {
    for (Eigen::Index i = 0; i < a.size(); ++i) k(i, j) = kernel_eval(p, a[i], b[j]);
  }
  return k;
}

double CholeskyFactor::log_determinant() const {
  return 2.0 * lower.diagonal().array().log().sum();
}

Eigen::VectorXd CholeskyFactor::solve(const Eigen::Ref<const Eigen::VectorXd>& rhs) const {
  Eigen::VectorXd out = lower.triangularView<Eigen::Lower>().solve(rhs);
  lower.triangularView<Eigen::Lower>().transpose().solveInPlace(out);
  return out;
}

Eigen::MatrixXd CholeskyFactor::inverse() const {
  Eigen::MatrixXd linv = Eigen::MatrixXd::Identity(size(), size());
  lower.triangularView<Eigen::Lower>().solveInPlace(linv);
  return linv.transpose() * linv;
}

CholeskyFactor robust_cholesky(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument("robust_cholesky: matrix must be square and non-empty");
  }
  const double mean_diag = m.diagonal().mean();
  if (!std::isfinite(mean_diag)) throw FactorizationFailure("robust_cholesky: non-finite diagonal");
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
  const double cap = 1e-2 * scale;

  double jitter = 0.0;
  double next = 1e-8 * scale;
  while (jitter < cap) {
    Eigen::MatrixXd shifted = m;
    shifted.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(shifted);
    if (llt.info() == Eigen::Success && llt.matrixL().toDenseMatrix().diagonal().allFinite()) {
      return CholeskyFactor{llt.matrixL(), jitter};
    }
    jitter = next;
    next *= 10.0;
  }
  throw FactorizationFailure("robust_cholesky: jitter cap reached (matrix of size " +
                             std::to_string(m.rows()) + ")");
}

}  // namespace dpalign
