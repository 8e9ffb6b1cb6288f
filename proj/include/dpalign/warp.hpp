#pragma once

#include <Eigen/Dense>

#include "dpalign/kernels.hpp"

namespace dpalign {

/// Per-sequence warp: unconstrained auxiliaries plus the warp-prior kernel.
struct WarpState {
  Eigen::VectorXd u;
  KernelParams omega;
};

/// Monotone warp on [-1, 1] built from the softmax-normalized cumulative sum of u.
/// G_1 = -1 and G_N = 1 exactly; constant u gives the evenly spaced grid. Requires N >= 2.
Eigen::VectorXd warp_from_aux(const Eigen::Ref<const Eigen::VectorXd>& u);

/// Pulls a gradient with respect to G back to u (vector-Jacobian product).
Eigen::VectorXd warp_pullback(const Eigen::Ref<const Eigen::VectorXd>& u,
                              const Eigen::Ref<const Eigen::VectorXd>& grad_warp);

struct WarpPriorEvaluation {
  double value = 0.0;
  Eigen::VectorXd d_warp;             // d / dG
  double d_log_lengthscale = 0.0;
  double d_log_variance = 0.0;
};

/// log N(G; 0, k_omega(x, x) + prior_noise * I).
double warp_log_prior(const Eigen::Ref<const Eigen::VectorXd>& warp,
                      const Eigen::Ref<const Eigen::VectorXd>& x, const KernelParams& omega,
                      double prior_noise);
WarpPriorEvaluation warp_log_prior_gradient(const Eigen::Ref<const Eigen::VectorXd>& warp,
                                            const Eigen::Ref<const Eigen::VectorXd>& x,
                                            const KernelParams& omega, double prior_noise);

/// sum_n |u_n - u_{n-1}|
double aux_total_variation(const Eigen::Ref<const Eigen::VectorXd>& u);

}  // namespace dpalign
