#include "dpalign/gp_sequence_model.hpp"

#include <cmath>
#include <stdexcept>

#include "dpalign/gaussian.hpp"

namespace dpalign {

namespace {

void check_sizes(const SequenceModel& m, Eigen::Index n) {
  if (m.y.size() != n || m.s.size() != n) {
    throw std::invalid_argument("sequence model: y, s and x must have equal length");
  }
}

Eigen::VectorXd stacked_values(const SequenceModel& m) {
  Eigen::VectorXd z(2 * m.s.size());
  z << m.s, m.y;
  return z;
}

}  // namespace

NoiseModel NoiseModel::from_precision(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("noise precision must be positive and finite");
  }
  return NoiseModel{std::log(beta)};
}

Eigen::VectorXd joint_inputs(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& warp) {
  Eigen::VectorXd p(x.size() + warp.size());
  p << x, warp;
  return p;
}

double joint_gp_loglik(const SequenceModel& m, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const NoiseModel& noise) {
  check_sizes(m, x.size());
  const Eigen::VectorXd points = joint_inputs(x, warp_from_aux(m.warp.u));
  Eigen::MatrixXd cov = gram_matrix(m.theta, points, points);
  cov.diagonal().array() += noise.variance();
  return evaluate_zero_mean_gaussian(cov, stacked_values(m)).log_density;
}

JointGpEvaluation joint_gp_loglik_gradient(const SequenceModel& m,
                                           const Eigen::Ref<const Eigen::VectorXd>& x,
                                           const Eigen::Ref<const Eigen::VectorXd>& warp,
                                           const NoiseModel& noise) {
  check_sizes(m, x.size());
  const Eigen::Index n = x.size();
  const Eigen::VectorXd points = joint_inputs(x, warp);
  const Eigen::Index p = points.size();

  Eigen::MatrixXd cov(p, p);
  Eigen::MatrixXd d_ell(p, p);
  Eigen::MatrixXd d_first(p, p);  // d k(P_a, P_b) / d P_a
  for (Eigen::Index b = 0; b < p; ++b) {
    for (Eigen::Index a = 0; a < p; ++a) {
      const KernelDerivatives k = kernel_eval_derivatives(m.theta, points[a], points[b]);
      cov(a, b) = k.value;
      d_ell(a, b) = k.d_log_lengthscale;
      d_first(a, b) = k.d_first;
    }
  }
  const Eigen::MatrixXd d_var = cov;
  const double noise_var = noise.variance();
  cov.diagonal().array() += noise_var;

  const GaussianEvaluation eval = evaluate_zero_mean_gaussian(cov, stacked_values(m));
  const Eigen::MatrixXd w = eval.covariance_gradient();

  JointGpEvaluation out;
  out.value = eval.log_density;
  out.d_s = -eval.weights.head(n);
  out.d_log_lengthscale = (w.array() * d_ell.array()).sum();
  out.d_log_variance = (w.array() * d_var.array()).sum();
  out.d_log_beta = -noise_var * w.trace();
  // Point P_a appears in row a and column a; W is symmetric.
  out.d_warp.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index a = n + k;
    out.d_warp[k] = 2.0 * w.row(a).dot(d_first.row(a));
  }
  return out;
}

Eigen::VectorXd gp_predict_mean(const SequenceModel& m, const Eigen::Ref<const Eigen::VectorXd>& x,
                                const NoiseModel& noise,
                                const Eigen::Ref<const Eigen::VectorXd>& query) {
  check_sizes(m, x.size());
  const Eigen::VectorXd points = joint_inputs(x, warp_from_aux(m.warp.u));
  Eigen::MatrixXd cov = gram_matrix(m.theta, points, points);
  cov.diagonal().array() += noise.variance();
  const CholeskyFactor factor = robust_cholesky(cov);
  const Eigen::VectorXd weights = factor.solve(stacked_values(m));
  return gram_matrix(m.theta, query, points) * weights;
}

}  // namespace dpalign
