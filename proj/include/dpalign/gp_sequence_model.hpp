#pragma once

#include <Eigen/Dense>

#include "dpalign/kernels.hpp"
#include "dpalign/warp.hpp"

namespace dpalign {

/// Observed sequence y (sampled at the warped inputs G) and its aligned
/// pseudo-observations s (on the shared grid x), tied by one GP.
struct SequenceModel {
  Eigen::VectorXd y;
  Eigen::VectorXd s;
  KernelParams theta;
  WarpState warp;
};

/// Shared observation-noise precision, log-parameterized.
struct NoiseModel {
  double log_beta = 0.0;

  static NoiseModel from_precision(double beta);
  double beta() const { return std::exp(log_beta); }
  double variance() const { return std::exp(-log_beta); }
};

struct JointGpEvaluation {
  double value = 0.0;
  Eigen::VectorXd d_s;
  Eigen::VectorXd d_warp;  // d / dG
  double d_log_lengthscale = 0.0;
  double d_log_variance = 0.0;
  double d_log_beta = 0.0;
};

/// Stacked inputs (x, G) used for the joint covariance.
Eigen::VectorXd joint_inputs(const Eigen::Ref<const Eigen::VectorXd>& x,
                             const Eigen::Ref<const Eigen::VectorXd>& warp);

/// log N([s; y]; 0, k([x; G], [x; G]) + I / beta) with G = warp_from_aux(m.warp.u).
double joint_gp_loglik(const SequenceModel& m, const Eigen::Ref<const Eigen::VectorXd>& x,
                       const NoiseModel& noise);

/// Same density with an explicit warp evaluation, plus all partial derivatives.
JointGpEvaluation joint_gp_loglik_gradient(const SequenceModel& m,
                                           const Eigen::Ref<const Eigen::VectorXd>& x,
                                           const Eigen::Ref<const Eigen::VectorXd>& warp,
                                           const NoiseModel& noise);

/// Posterior mean of the latent function at `query` given s at x and y at G.
Eigen::VectorXd gp_predict_mean(const SequenceModel& m, const Eigen::Ref<const Eigen::VectorXd>& x,
                                const NoiseModel& noise,
                                const Eigen::Ref<const Eigen::VectorXd>& query);

}  // namespace dpalign
