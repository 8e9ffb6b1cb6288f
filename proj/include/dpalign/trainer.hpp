#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpalign/data.hpp"
#include "dpalign/dpmm.hpp"
#include "dpalign/metrics.hpp"
#include "dpalign/objective.hpp"

namespace dpalign {

struct TrainConfig {
  int max_iters = 3000;
  double step_size = 0.02;
  double convergence_tol = 1e-7;  // relative objective change
  int patience = 10;
  std::uint64_t seed = 0;
  bool warp_prior_on = true;
  int log_every = 10;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;

  void validate() const;
};

struct ModelConfig {
  KernelFamily gp_kernel = KernelFamily::kSquaredExponential;
  KernelFamily warp_kernel = KernelFamily::kSquaredExponential;
  int truncation = 0;  // 0 selects T = J
  double prior_noise = 1e-6;
  HyperPriors priors;

  double init_lengthscale = 0.3;
  double init_variance = 1.0;
  double init_beta = 100.0;
  double init_warp_lengthscale = 1.0;
  double init_warp_variance = 1.0;
  double init_alpha = 1.0;
  double init_base_var = 1.0;

  // Closed-form warm start of the mixture on s = y before gradient ascent.
  int warm_start_restarts = 5;
  int warm_start_sweeps = 200;

  void validate() const;
};

struct GpHyperparams {
  std::vector<KernelParams> theta;
  NoiseModel noise;
};

struct FitResult {
  Eigen::MatrixXd aligned;   // J x N, optimized s
  std::vector<WarpState> warps;
  Eigen::MatrixXd warped_inputs;  // J x N, G_j
  std::vector<int> labels;
  int n_clusters = 0;
  std::vector<double> objective_trace;
  MetricsReport metrics;
  GpHyperparams hyperparams;
  DPMMState dpmm;
  JointState state;  // every optimized parameter
  ObjectiveTerms final_terms;
  int iterations = 0;
  bool converged = false;
};

class NonFiniteObjective : public std::runtime_error {
 public:
  explicit NonFiniteObjective(const std::string& term)
      : std::runtime_error("objective term '" + term + "' is not finite"), term_(term) {}
  const std::string& term() const { return term_; }

 private:
  std::string term_;
};

/// Initial joint state: s = y, u = 0, documented kernel and noise values, and a
/// mixture warm-started by closed-form coordinate ascent (best of several
/// seeded restarts).
JointState initial_state(const Dataset& data, const ModelConfig& model, std::uint64_t seed);

/// Maximizes the joint objective by gradient ascent on all parameters at once.
/// Steps use an Adam direction with gradient clipping at norm 1e3; a step that
/// lowers the objective is rejected and retried with half the step size.
FitResult fit(const Dataset& data, const TrainConfig& config, const ModelConfig& model);

/// Finite-difference gradient verification.
struct GradCheckInstance {
  Eigen::VectorXd x;
  JointState state;
  ObjectiveOptions options;
};

struct BlockReport {
  std::string name;
  double max_rel_error = 0.0;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<BlockReport> blocks;
  bool passed() const;
};

/// Small random instance (N <= 10, J <= 4). With `perturb` false, u = 0 and s = y.
GradCheckInstance make_gradcheck_instance(std::uint64_t seed, int num_sequences = 3,
                                          int length = 8, bool perturb = true,
                                          KernelFamily gp_kernel = KernelFamily::kSquaredExponential);

/// Hook applied to the analytic gradient before comparison (fault injection in tests).
using GradientHook = std::function<void(const ParameterLayout&, Eigen::VectorXd&)>;

/// Compares analytic gradients with five-point central differences (step 1e-3). The error of
/// one entry is |analytic - numeric| / max(|analytic|, |numeric|, 1); a block
/// reports the maximum over its entries.
GradCheckReport check_gradients(const GradCheckInstance& instance, double tolerance,
                                const GradientHook& hook = {});

}  // namespace dpalign
