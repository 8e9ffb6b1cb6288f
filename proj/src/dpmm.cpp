#include "dpalign/dpmm.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "dpalign/gaussian.hpp"

namespace dpalign {

namespace {

using boost::math::digamma;
using boost::math::trigamma;

double log_beta_function(double a, double b) {
  return boost::math::lgamma(a) + boost::math::lgamma(b) - boost::math::lgamma(a + b);
}

// Entropy of Beta(a, b).
double beta_entropy(double a, double b) {
  return log_beta_function(a, b) - (a - 1.0) * digamma(a) - (b - 1.0) * digamma(b) +
         (a + b - 2.0) * digamma(a + b);
}

double xlogx(double p) { return p > 0.0 ? p * std::log(p) : 0.0; }

// Coefficients of E[log v_t] and E[log(1 - v_t)] in the ELBO.
struct StickCoefficients {
  Eigen::VectorXd log_v;
  Eigen::VectorXd log_1m_v;
};

StickCoefficients stick_coefficients(const DPMMState& state) {
  const Eigen::Index sticks = state.truncation() - 1;
  const Eigen::VectorXd mass = state.phi.colwise().sum().transpose();
  StickCoefficients c{Eigen::VectorXd(sticks), Eigen::VectorXd(sticks)};
  double tail = 0.0;
  for (Eigen::Index t = state.truncation() - 1; t >= 0; --t) {
    if (t < sticks) {
      c.log_v[t] = mass[t];
      c.log_1m_v[t] = (state.alpha - 1.0) + tail;
    }
    tail += mass[t];
  }
  return c;
}

}  // namespace

double GammaPrior::log_density(double value) const {
  return shape * std::log(rate) - boost::math::lgamma(shape) + (shape - 1.0) * std::log(value) -
         rate * value;
}

double GammaPrior::d_log_density(double value) const { return (shape - 1.0) / value - rate; }

DPMMState DPMMState::make(Eigen::Index num_sequences, Eigen::Index truncation,
                          Eigen::Index dimension, double alpha, double base_var, double comp_var) {
  if (truncation < 1 || num_sequences < 1 || dimension < 1) {
    throw std::invalid_argument("DPMMState: sizes must be positive");
  }
  DPMMState s;
  s.stick_a = Eigen::VectorXd::Ones(truncation - 1);
  s.stick_b = Eigen::VectorXd::Constant(truncation - 1, alpha);
  s.means = Eigen::MatrixXd::Zero(truncation, dimension);
  s.mean_var = Eigen::VectorXd::Constant(truncation, base_var);
  s.phi = Eigen::MatrixXd::Constant(num_sequences, truncation, 1.0 / static_cast<double>(truncation));
  s.alpha = alpha;
  s.base_var = base_var;
  s.comp_var = comp_var;
  s.validate();
  return s;
}

void DPMMState::validate() const {
  const Eigen::Index t = truncation();
  if (t < 1) throw std::invalid_argument("DPMMState: truncation must be >= 1");
  if (stick_a.size() != t - 1 || stick_b.size() != t - 1) {
    throw std::invalid_argument("DPMMState: expected T-1 stick parameters");
  }
  if (mean_var.size() != t || phi.cols() != t) {
    throw std::invalid_argument("DPMMState: component count mismatch");
  }
  if ((t > 1 && (stick_a.minCoeff() <= 0.0 || stick_b.minCoeff() <= 0.0)) ||
      mean_var.minCoeff() <= 0.0) {
    throw std::invalid_argument("DPMMState: variational parameters must be positive");
  }
  if (!(alpha > 0.0) || !(base_var > 0.0) || !(comp_var > 0.0)) {
    throw std::invalid_argument("DPMMState: alpha, base_var and comp_var must be positive");
  }
  if (phi.size() > 0 && phi.minCoeff() < 0.0) {
    throw std::invalid_argument("DPMMState: responsibilities must be non-negative");
  }
  for (Eigen::Index j = 0; j < phi.rows(); ++j) {
    if (std::abs(phi.row(j).sum() - 1.0) > 1e-9) {
      throw std::invalid_argument("DPMMState: responsibility rows must sum to one");
    }
  }
}

Eigen::VectorXd stick_weights(const Eigen::Ref<const Eigen::VectorXd>& v) {
  const Eigen::Index sticks = v.size();
  Eigen::VectorXd pi(sticks + 1);
  double remaining = 1.0;
  for (Eigen::Index t = 0; t < sticks; ++t) {
    pi[t] = v[t] * remaining;
    remaining *= 1.0 - v[t];
  }
  pi[sticks] = remaining;
  return pi;
}

StickExpectations expected_log_sticks(const Eigen::Ref<const Eigen::VectorXd>& a,
                                      const Eigen::Ref<const Eigen::VectorXd>& b) {
  StickExpectations e{Eigen::VectorXd(a.size()), Eigen::VectorXd(a.size())};
  for (Eigen::Index t = 0; t < a.size(); ++t) {
    const double total = digamma(a[t] + b[t]);
    e.log_v[t] = digamma(a[t]) - total;
    e.log_1m_v[t] = digamma(b[t]) - total;
  }
  return e;
}

Eigen::VectorXd expected_log_weights(const DPMMState& state) {
  const Eigen::Index t_max = state.truncation();
  const StickExpectations e = expected_log_sticks(state.stick_a, state.stick_b);
  Eigen::VectorXd out(t_max);
  double prefix = 0.0;
  for (Eigen::Index t = 0; t < t_max; ++t) {
    out[t] = prefix + (t < t_max - 1 ? e.log_v[t] : 0.0);
    if (t < t_max - 1) prefix += e.log_1m_v[t];
  }
  return out;
}

Eigen::MatrixXd expected_component_loglik(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                          const DPMMState& state) {
  const double n = static_cast<double>(state.dimension());
  const double c = state.comp_var;
  Eigen::MatrixXd out(data.rows(), state.truncation());
  for (Eigen::Index t = 0; t < state.truncation(); ++t) {
    for (Eigen::Index j = 0; j < data.rows(); ++j) {
      const double sq = (data.row(j) - state.means.row(t)).squaredNorm();
      out(j, t) = -0.5 * n * (kLog2Pi + std::log(c)) - (sq + n * state.mean_var[t]) / (2.0 * c);
    }
  }
  return out;
}

Eigen::MatrixXd responsibilities(const Eigen::Ref<const Eigen::MatrixXd>& data,
                                 const DPMMState& state) {
  if (data.cols() != state.dimension()) {
    throw std::invalid_argument("responsibilities: data dimension mismatch");
  }
  Eigen::MatrixXd logits = expected_component_loglik(data, state);
  logits.rowwise() += expected_log_weights(state).transpose();
  for (Eigen::Index j = 0; j < logits.rows(); ++j) {
    const double top = logits.row(j).maxCoeff();
    logits.row(j) = (logits.row(j).array() - top).exp();
    logits.row(j) /= logits.row(j).sum();
  }
  return logits;
}

double elbo(const Eigen::Ref<const Eigen::MatrixXd>& data, const DPMMState& state,
            const HyperPriors& priors) {
  if (data.cols() != state.dimension() || data.rows() != state.num_sequences()) {
    throw std::invalid_argument("elbo: data shape does not match the state");
  }
  const Eigen::Index t_max = state.truncation();
  const double n = static_cast<double>(state.dimension());
  const double bv = state.base_var;

  double total = 0.0;
  const StickExpectations e = expected_log_sticks(state.stick_a, state.stick_b);
  for (Eigen::Index t = 0; t + 1 < t_max; ++t) {
    total += std::log(state.alpha) + (state.alpha - 1.0) * e.log_1m_v[t];
    total += beta_entropy(state.stick_a[t], state.stick_b[t]);
  }
  for (Eigen::Index t = 0; t < t_max; ++t) {
    const double lam = state.mean_var[t];
    total += -0.5 * n * (kLog2Pi + std::log(bv)) -
             (state.means.row(t).squaredNorm() + n * lam) / (2.0 * bv);
    total += 0.5 * n * (kLog2Pi + 1.0 + std::log(lam));
  }
  const Eigen::VectorXd log_w = expected_log_weights(state);
  const Eigen::MatrixXd comp = expected_component_loglik(data, state);
  for (Eigen::Index j = 0; j < data.rows(); ++j) {
    for (Eigen::Index t = 0; t < t_max; ++t) {
      const double p = state.phi(j, t);
      total += p * (log_w[t] + comp(j, t)) - xlogx(p);
    }
  }
  total += priors.alpha.log_density(state.alpha) + priors.base_var.log_density(bv);
  return total;
}

ElboGradient elbo_gradient(const Eigen::Ref<const Eigen::MatrixXd>& data, const DPMMState& state,
                           const HyperPriors& priors) {
  const Eigen::Index t_max = state.truncation();
  const Eigen::Index sticks = t_max - 1;
  const double n = static_cast<double>(state.dimension());
  const double bv = state.base_var;
  const double c = state.comp_var;
  const Eigen::VectorXd mass = state.phi.colwise().sum().transpose();

  ElboGradient g;
  g.value = elbo(data, state, priors);

  const StickExpectations e = expected_log_sticks(state.stick_a, state.stick_b);
  const StickCoefficients coef = stick_coefficients(state);
  g.d_log_stick_a.resize(sticks);
  g.d_log_stick_b.resize(sticks);
  for (Eigen::Index t = 0; t < sticks; ++t) {
    const double a = state.stick_a[t];
    const double b = state.stick_b[t];
    const double ta = trigamma(a);
    const double tb = trigamma(b);
    const double tab = trigamma(a + b);
    const double da = coef.log_v[t] * (ta - tab) - coef.log_1m_v[t] * tab - (a - 1.0) * ta +
                      (a + b - 2.0) * tab;
    const double db = -coef.log_v[t] * tab + coef.log_1m_v[t] * (tb - tab) - (b - 1.0) * tb +
                      (a + b - 2.0) * tab;
    g.d_log_stick_a[t] = a * da;
    g.d_log_stick_b[t] = b * db;
  }

  const Eigen::MatrixXd weighted_data = state.phi.transpose() * data;  // T x N
  g.d_means = -state.means / bv;
  g.d_means += (weighted_data - mass.asDiagonal() * state.means) / c;

  g.d_log_mean_var.resize(t_max);
  for (Eigen::Index t = 0; t < t_max; ++t) {
    const double lam = state.mean_var[t];
    g.d_log_mean_var[t] = lam * (-n / (2.0 * bv) - mass[t] * n / (2.0 * c) + n / (2.0 * lam));
  }

  const Eigen::VectorXd log_w = expected_log_weights(state);
  const Eigen::MatrixXd comp = expected_component_loglik(data, state);
  g.d_phi_logits.resize(state.phi.rows(), t_max);
  double d_c = 0.0;
  for (Eigen::Index j = 0; j < state.phi.rows(); ++j) {
    Eigen::VectorXd partial(t_max);
    for (Eigen::Index t = 0; t < t_max; ++t) {
      const double p = state.phi(j, t);
      partial[t] = log_w[t] + comp(j, t) - (p > 0.0 ? std::log(p) : 0.0);
      const double sq = (data.row(j) - state.means.row(t)).squaredNorm();
      d_c += p * (-n / (2.0 * c) + (sq + n * state.mean_var[t]) / (2.0 * c * c));
    }
    const double mean_partial = state.phi.row(j).dot(partial);
    g.d_phi_logits.row(j) = state.phi.row(j).array() * (partial.transpose().array() - mean_partial);
  }
  g.d_log_comp_var = c * d_c;

  g.d_data = (state.phi * state.means - data) / c;  // rows of phi sum to one

  double d_alpha = priors.alpha.d_log_density(state.alpha);
  for (Eigen::Index t = 0; t < sticks; ++t) d_alpha += 1.0 / state.alpha + e.log_1m_v[t];
  g.d_log_alpha = state.alpha * d_alpha;

  double d_bv = priors.base_var.d_log_density(bv);
  for (Eigen::Index t = 0; t < t_max; ++t) {
    d_bv += -n / (2.0 * bv) +
            (state.means.row(t).squaredNorm() + n * state.mean_var[t]) / (2.0 * bv * bv);
  }
  g.d_log_base_var = bv * d_bv;
  return g;
}

void coordinate_ascent_step(const Eigen::Ref<const Eigen::MatrixXd>& data, DPMMState& state) {
  state.phi = responsibilities(data, state);
  update_global_factors(data, state);
}

void update_global_factors(const Eigen::Ref<const Eigen::MatrixXd>& data, DPMMState& state) {
  const Eigen::VectorXd mass = state.phi.colwise().sum().transpose();
  double tail = 0.0;
  for (Eigen::Index t = state.truncation() - 1; t >= 0; --t) {
    if (t < state.truncation() - 1) {
      state.stick_a[t] = 1.0 + mass[t];
      state.stick_b[t] = state.alpha + tail;
    }
    tail += mass[t];
  }

  const Eigen::MatrixXd weighted_data = state.phi.transpose() * data;
  for (Eigen::Index t = 0; t < state.truncation(); ++t) {
    const double lam = 1.0 / (1.0 / state.base_var + mass[t] / state.comp_var);
    state.mean_var[t] = lam;
    state.means.row(t) = lam * weighted_data.row(t) / state.comp_var;
  }
}

std::vector<int> map_cluster_assignments(const Eigen::Ref<const Eigen::MatrixXd>& phi) {
  std::vector<int> labels(static_cast<std::size_t>(phi.rows()), 0);
  for (Eigen::Index j = 0; j < phi.rows(); ++j) {
    Eigen::Index best = 0;
    for (Eigen::Index t = 1; t < phi.cols(); ++t) {
      if (phi(j, t) > phi(j, best)) best = t;
    }
    labels[static_cast<std::size_t>(j)] = static_cast<int>(best);
  }
  return labels;
}

int effective_num_clusters(const Eigen::Ref<const Eigen::MatrixXd>& phi, double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("effective_num_clusters: threshold must lie in (0, 1)");
  }
  const Eigen::VectorXd mass = phi.colwise().sum().transpose();
  return static_cast<int>((mass.array() > threshold).count());
}

}  // namespace dpalign
