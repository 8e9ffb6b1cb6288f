#include "dpalign/warp.hpp"

#include <cmath>
#include <stdexcept>

#include "dpalign/gaussian.hpp"

namespace dpalign {

namespace {

// Softmax over u_2..u_N. The first softmax weight cancels out of the
// renormalized cumulative sum, so only the tail matters.
Eigen::VectorXd tail_softmax(const Eigen::Ref<const Eigen::VectorXd>& u) {
  const Eigen::Index n = u.size();
  Eigen::VectorXd w = u.tail(n - 1);
  w.array() -= w.maxCoeff();
  w = w.array().exp();
  w /= w.sum();
  return w;
}

}  // namespace

Eigen::VectorXd warp_from_aux(const Eigen::Ref<const Eigen::VectorXd>& u) {
  const Eigen::Index n = u.size();
  if (n < 2) throw std::invalid_argument("warp_from_aux: need at least two auxiliaries");
  const Eigen::VectorXd w = tail_softmax(u);
  Eigen::VectorXd g(n);
  g[0] = -1.0;
  double acc = 0.0;
  for (Eigen::Index k = 1; k < n - 1; ++k) {
    acc += w[k - 1];
    g[k] = -1.0 + 2.0 * acc;
  }
  g[n - 1] = 1.0;
  return g;
}

Eigen::VectorXd warp_pullback(const Eigen::Ref<const Eigen::VectorXd>& u,
                              const Eigen::Ref<const Eigen::VectorXd>& grad_warp) {
  const Eigen::Index n = u.size();
  const Eigen::VectorXd w = tail_softmax(u);
  // G_k = -1 + 2 * sum_{m<=k} w_m, so dL/dw_m = 2 * sum_{k>=m} dL/dG_k. The last
  // entry is pinned to 1 and contributes nothing.
  Eigen::VectorXd h(n - 1);
  double suffix = 0.0;
  for (Eigen::Index m = n - 2; m >= 0; --m) {
    if (m + 1 < n - 1) suffix += grad_warp[m + 1];
    h[m] = 2.0 * suffix;
  }
  const double mean_h = w.dot(h);
  Eigen::VectorXd grad_u = Eigen::VectorXd::Zero(n);
  grad_u.tail(n - 1) = w.array() * (h.array() - mean_h);
  return grad_u;
}

double warp_log_prior(const Eigen::Ref<const Eigen::VectorXd>& warp,
                      const Eigen::Ref<const Eigen::VectorXd>& x, const KernelParams& omega,
                      double prior_noise) {
  if (warp.size() != x.size()) throw std::invalid_argument("warp_log_prior: size mismatch");
  Eigen::MatrixXd cov = gram_matrix(omega, x, x);
  cov.diagonal().array() += prior_noise;
  return evaluate_zero_mean_gaussian(cov, warp).log_density;
}

WarpPriorEvaluation warp_log_prior_gradient(const Eigen::Ref<const Eigen::VectorXd>& warp,
                                            const Eigen::Ref<const Eigen::VectorXd>& x,
                                            const KernelParams& omega, double prior_noise) {
  if (warp.size() != x.size()) throw std::invalid_argument("warp_log_prior: size mismatch");
  const Eigen::Index n = x.size();
  Eigen::MatrixXd cov(n, n);
  Eigen::MatrixXd d_ell(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const KernelDerivatives k = kernel_eval_derivatives(omega, x[i], x[j]);
      cov(i, j) = k.value;
      d_ell(i, j) = k.d_log_lengthscale;
    }
  }
  const Eigen::MatrixXd d_var = cov;
  cov.diagonal().array() += prior_noise;

  const GaussianEvaluation eval = evaluate_zero_mean_gaussian(cov, warp);
  const Eigen::MatrixXd w = eval.covariance_gradient();
  WarpPriorEvaluation out;
  out.value = eval.log_density;
  out.d_warp = -eval.weights;
  out.d_log_lengthscale = (w.array() * d_ell.array()).sum();
  out.d_log_variance = (w.array() * d_var.array()).sum();
  return out;
}

double aux_total_variation(const Eigen::Ref<const Eigen::VectorXd>& u) {
  double tv = 0.0;
  for (Eigen::Index n = 1; n < u.size(); ++n) tv += std::abs(u[n] - u[n - 1]);
  return tv;
}

}  // namespace dpalign
