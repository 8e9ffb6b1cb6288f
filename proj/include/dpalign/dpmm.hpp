#pragma once

#include <vector>

#include <Eigen/Dense>

namespace dpalign {

/// Gamma(shape, rate) prior on a positive scalar.
struct GammaPrior {
  double shape = 1.0;
  double rate = 1.0;

  double log_density(double value) const;
  double d_log_density(double value) const;
};

struct HyperPriors {
  GammaPrior alpha;
  GammaPrior base_var;
};

/// Truncated stick-breaking mixture with a factorized variational posterior:
///   q(v_t)   = Beta(stick_a[t], stick_b[t])          t < T-1
///   q(eta_t) = N(means.row(t), mean_var[t] * I)
///   q(z_j)   = Categorical(phi.row(j))
/// Components are N(eta_t, comp_var * I); the base distribution is N(0, base_var * I).
struct DPMMState {
  Eigen::VectorXd stick_a;
  Eigen::VectorXd stick_b;
  Eigen::MatrixXd means;     // T x N
  Eigen::VectorXd mean_var;  // T
  Eigen::MatrixXd phi;       // J x T, rows on the simplex
  double alpha = 1.0;
  double base_var = 1.0;
  double comp_var = 1.0;

  Eigen::Index truncation() const { return means.rows(); }
  Eigen::Index dimension() const { return means.cols(); }
  Eigen::Index num_sequences() const { return phi.rows(); }

  /// Prior-valued sticks and component posteriors, uniform responsibilities.
  static DPMMState make(Eigen::Index num_sequences, Eigen::Index truncation, Eigen::Index dimension,
                        double alpha, double base_var, double comp_var);

  /// Throws std::invalid_argument on inconsistent shapes or non-positive parameters.
  void validate() const;
};

/// pi_t = v_t * prod_{i<t} (1 - v_i); the last weight takes the remaining stick.
Eigen::VectorXd stick_weights(const Eigen::Ref<const Eigen::VectorXd>& v);

struct StickExpectations {
  Eigen::VectorXd log_v;      // E[log v_t]
  Eigen::VectorXd log_1m_v;   // E[log (1 - v_t)]
};

StickExpectations expected_log_sticks(const Eigen::Ref<const Eigen::VectorXd>& a,
                                      const Eigen::Ref<const Eigen::VectorXd>& b);

/// E_q[log pi_t] for t = 0..T-1.
Eigen::VectorXd expected_log_weights(const DPMMState& state);

/// E_q[log N(s_j | eta_t, comp_var I)] for every (j, t). `data` is J x N.
Eigen::MatrixXd expected_component_loglik(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                          const DPMMState& state);

/// Optimal q(z) given the other factors.
Eigen::MatrixXd responsibilities(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                 const DPMMState& state);

/// Evidence lower bound, including the Gamma log-priors on alpha and base_var.
double elbo(const Eigen::Ref<const Eigen::MatrixXd>& data, const DPMMState& state,
            const HyperPriors& priors);

/// ELBO gradient with respect to the data and the unconstrained parameterization:
/// log of positive scalars and softmax logits for the rows of phi.
struct ElboGradient {
  double value = 0.0;
  Eigen::MatrixXd d_data;         // J x N
  Eigen::VectorXd d_log_stick_a;
  Eigen::VectorXd d_log_stick_b;
  Eigen::MatrixXd d_means;        // T x N
  Eigen::VectorXd d_log_mean_var;
  Eigen::MatrixXd d_phi_logits;   // J x T
  double d_log_alpha = 0.0;
  double d_log_base_var = 0.0;
  double d_log_comp_var = 0.0;
};

ElboGradient elbo_gradient(const Eigen::Ref<const Eigen::MatrixXd>& data, const DPMMState& state,
                           const HyperPriors& priors);

/// Closed-form updates of q(v) and q(eta) given the current q(z).
void update_global_factors(const Eigen::Ref<const Eigen::MatrixXd>& data, DPMMState& state);

/// Closed-form coordinate updates of q(z), then q(v), then q(eta).
void coordinate_ascent_step(const Eigen::Ref<const Eigen::MatrixXd>& data, DPMMState& state);

/// argmax per row; ties go to the smaller index.
std::vector<int> map_cluster_assignments(const Eigen::Ref<const Eigen::MatrixXd>& phi);

/// Number of components whose responsibility mass sum_j phi(j, t) exceeds `threshold`.
int effective_num_clusters(const Eigen::Ref<const Eigen::MatrixXd>& phi, double threshold = 0.5);

}  // namespace dpalign
