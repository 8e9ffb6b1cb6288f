#include "dpalign/objective.hpp"

#include <cmath>
#include <exception>
#include <stdexcept>

#include "dpalign/warp.hpp"

namespace dpalign {

namespace {

// Runs body(j) for j in [0, count). The first exception by index is rethrown
// after the loop.
template <typename Body>
void for_each_sequence(Eigen::Index count, ExecutionPolicy policy, Body&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  auto guarded = [&](Eigen::Index j) {
    try {
      body(j);
    } catch (...) {
      errors[static_cast<std::size_t>(j)] = std::current_exception();
    }
  };
  if (policy == ExecutionPolicy::kParallel) {
#pragma omp parallel for schedule(dynamic)
    for (Eigen::Index j = 0; j < count; ++j) guarded(j);
  } else {
    for (Eigen::Index j = 0; j < count; ++j) guarded(j);
  }
  for (std::size_t j = 0; j < errors.size(); ++j) {
    if (!errors[j]) continue;
    try {
      std::rethrow_exception(errors[j]);
    } catch (const FactorizationFailure& e) {
      throw FactorizationFailure("sequence " + std::to_string(j) + ": " + e.what());
    }
  }
}

double sum_terms(const ObjectiveTerms& terms) {
  double total = 0.0;
  for (std::size_t j = 0; j < terms.gp.size(); ++j) total += terms.gp[j] + terms.warp_prior[j];
  return total + terms.elbo;
}

}  // namespace

Eigen::MatrixXd aligned_matrix(const JointState& state) {
  const auto j_count = static_cast<Eigen::Index>(state.sequences.size());
  const Eigen::Index n = j_count > 0 ? state.sequences.front().s.size() : 0;
  Eigen::MatrixXd s(j_count, n);
  for (Eigen::Index j = 0; j < j_count; ++j) s.row(j) = state.sequences[static_cast<std::size_t>(j)].s;
  return s;
}

ObjectiveTerms joint_objective(const JointState& state, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const ObjectiveOptions& options) {
  const auto j_count = static_cast<Eigen::Index>(state.sequences.size());
  ObjectiveTerms terms;
  terms.gp.assign(state.sequences.size(), 0.0);
  terms.warp_prior.assign(state.sequences.size(), 0.0);

  for_each_sequence(j_count, options.policy, [&](Eigen::Index j) {
    const auto idx = static_cast<std::size_t>(j);
    const SequenceModel& m = state.sequences[idx];
    terms.gp[idx] = joint_gp_loglik(m, x, state.noise);
    if (options.warp_prior_on) {
      terms.warp_prior[idx] = warp_log_prior(warp_from_aux(m.warp.u), x, m.warp.omega,
                                             options.prior_noise);
    }
  });

  DPMMState dpmm = state.dpmm;
  dpmm.comp_var = state.noise.variance();
  terms.elbo = elbo(aligned_matrix(state), dpmm, options.priors);
  terms.total = sum_terms(terms);
  return terms;
}

ParameterLayout::ParameterLayout(Eigen::Index num_sequences, Eigen::Index length,
                                 Eigen::Index truncation)
    : num_sequences_(num_sequences), length_(length), truncation_(truncation) {
  if (num_sequences < 1 || length < 2 || truncation < 1) {
    throw std::invalid_argument("ParameterLayout: need J >= 1, N >= 2, T >= 1");
  }
  auto add = [&](std::string name, Eigen::Index size) {
    blocks_.push_back(Block{std::move(name), size_, size});
    size_ += size;
  };
  add("s", num_sequences * length);
  add("u", num_sequences * length);
  add("theta", 2 * num_sequences);
  add("omega", 2 * num_sequences);
  add("beta", 1);
  add("gamma", 2 * (truncation - 1));
  add("tau", truncation * length + truncation);
  add("phi", num_sequences * truncation);
  add("alpha", 1);
  add("base_var", 1);
}

const ParameterLayout::Block& ParameterLayout::block(const std::string& name) const {
  for (const Block& b : blocks_) {
    if (b.name == name) return b;
  }
  throw std::out_of_range("ParameterLayout: unknown block '" + name + "'");
}

Eigen::VectorXd ParameterLayout::pack(const JointState& state) const {
  const Eigen::Index j_count = num_sequences_;
  const Eigen::Index n = length_;
  const Eigen::Index t_max = truncation_;
  if (static_cast<Eigen::Index>(state.sequences.size()) != j_count ||
      state.dpmm.truncation() != t_max || state.dpmm.dimension() != n) {
    throw std::invalid_argument("ParameterLayout::pack: state shape mismatch");
  }
  Eigen::VectorXd p(size_);
  Eigen::Index o = block("s").offset;
  for (const auto& m : state.sequences) { p.segment(o, n) = m.s; o += n; }
  o = block("u").offset;
  for (const auto& m : state.sequences) { p.segment(o, n) = m.warp.u; o += n; }
  o = block("theta").offset;
  for (const auto& m : state.sequences) {
    p[o++] = m.theta.log_lengthscale;
    p[o++] = m.theta.log_variance;
  }
  o = block("omega").offset;
  for (const auto& m : state.sequences) {
    p[o++] = m.warp.omega.log_lengthscale;
    p[o++] = m.warp.omega.log_variance;
  }
  p[block("beta").offset] = state.noise.log_beta;

  const DPMMState& d = state.dpmm;
  o = block("gamma").offset;
  p.segment(o, t_max - 1) = d.stick_a.array().log();
  p.segment(o + t_max - 1, t_max - 1) = d.stick_b.array().log();
  o = block("tau").offset;
  for (Eigen::Index t = 0; t < t_max; ++t) { p.segment(o, n) = d.means.row(t).transpose(); o += n; }
  p.segment(o, t_max) = d.mean_var.array().log();
  o = block("phi").offset;
  for (Eigen::Index j = 0; j < j_count; ++j) {
    for (Eigen::Index t = 0; t < t_max; ++t) p[o++] = std::log(std::max(d.phi(j, t), 1e-300));
  }
  p[block("alpha").offset] = std::log(d.alpha);
  p[block("base_var").offset] = std::log(d.base_var);
  return p;
}

void ParameterLayout::unpack(const Eigen::Ref<const Eigen::VectorXd>& p, JointState& state) const {
  const Eigen::Index j_count = num_sequences_;
  const Eigen::Index n = length_;
  const Eigen::Index t_max = truncation_;
  if (p.size() != size_ || static_cast<Eigen::Index>(state.sequences.size()) != j_count) {
    throw std::invalid_argument("ParameterLayout::unpack: shape mismatch");
  }
  Eigen::Index o = block("s").offset;
  for (auto& m : state.sequences) { m.s = p.segment(o, n); o += n; }
  o = block("u").offset;
  for (auto& m : state.sequences) { m.warp.u = p.segment(o, n); o += n; }
  o = block("theta").offset;
  for (auto& m : state.sequences) {
    m.theta.log_lengthscale = p[o++];
    m.theta.log_variance = p[o++];
  }
  o = block("omega").offset;
  for (auto& m : state.sequences) {
    m.warp.omega.log_lengthscale = p[o++];
    m.warp.omega.log_variance = p[o++];
  }
  state.noise.log_beta = p[block("beta").offset];

  DPMMState& d = state.dpmm;
  o = block("gamma").offset;
  d.stick_a = p.segment(o, t_max - 1).array().exp();
  d.stick_b = p.segment(o + t_max - 1, t_max - 1).array().exp();
  o = block("tau").offset;
  d.means.resize(t_max, n);
  for (Eigen::Index t = 0; t < t_max; ++t) { d.means.row(t) = p.segment(o, n).transpose(); o += n; }
  d.mean_var = p.segment(o, t_max).array().exp();
  o = block("phi").offset;
  d.phi.resize(j_count, t_max);
  for (Eigen::Index j = 0; j < j_count; ++j) {
    Eigen::VectorXd logits = p.segment(o, t_max);
    logits.array() -= logits.maxCoeff();
    logits = logits.array().exp();
    d.phi.row(j) = logits.transpose() / logits.sum();
    o += t_max;
  }
  d.alpha = std::exp(p[block("alpha").offset]);
  d.base_var = std::exp(p[block("base_var").offset]);
  d.comp_var = state.noise.variance();
}

JointObjective::JointObjective(Eigen::VectorXd x, JointState prototype, ObjectiveOptions options)
    : x_(std::move(x)),
      prototype_(std::move(prototype)),
      options_(options),
      layout_(static_cast<Eigen::Index>(prototype_.sequences.size()), x_.size(),
              prototype_.dpmm.truncation()) {}

JointState JointObjective::state(const Eigen::Ref<const Eigen::VectorXd>& params) const {
  JointState s = prototype_;
  layout_.unpack(params, s);
  return s;
}

ObjectiveEvaluation JointObjective::evaluate(const Eigen::Ref<const Eigen::VectorXd>& params,
                                             bool with_gradient) const {
  const JointState st = state(params);
  ObjectiveEvaluation out;
  if (!with_gradient) {
    out.terms = joint_objective(st, x_, options_);
    return out;
  }

  const Eigen::Index j_count = layout_.num_sequences();
  const Eigen::Index n = layout_.length();
  const Eigen::Index t_max = layout_.truncation();
  out.gradient = Eigen::VectorXd::Zero(layout_.size());
  out.terms.gp.assign(static_cast<std::size_t>(j_count), 0.0);
  out.terms.warp_prior.assign(static_cast<std::size_t>(j_count), 0.0);
  std::vector<double> d_log_beta(static_cast<std::size_t>(j_count), 0.0);

  const Eigen::Index s_off = layout_.block("s").offset;
  const Eigen::Index u_off = layout_.block("u").offset;
  const Eigen::Index theta_off = layout_.block("theta").offset;
  const Eigen::Index omega_off = layout_.block("omega").offset;
  Eigen::VectorXd& grad = out.gradient;

  // Each sequence writes only its own slices of the gradient.
  for_each_sequence(j_count, options_.policy, [&](Eigen::Index j) {
    const auto idx = static_cast<std::size_t>(j);
    const SequenceModel& m = st.sequences[idx];
    const Eigen::VectorXd warp = warp_from_aux(m.warp.u);
    const JointGpEvaluation gp = joint_gp_loglik_gradient(m, x_, warp, st.noise);
    out.terms.gp[idx] = gp.value;
    d_log_beta[idx] = gp.d_log_beta;
    Eigen::VectorXd d_warp = gp.d_warp;
    grad.segment(s_off + j * n, n) = gp.d_s;
    grad[theta_off + 2 * j] = gp.d_log_lengthscale;
    grad[theta_off + 2 * j + 1] = gp.d_log_variance;
    if (options_.warp_prior_on) {
      const WarpPriorEvaluation wp =
          warp_log_prior_gradient(warp, x_, m.warp.omega, options_.prior_noise);
      out.terms.warp_prior[idx] = wp.value;
      d_warp += wp.d_warp;
      grad[omega_off + 2 * j] = wp.d_log_lengthscale;
      grad[omega_off + 2 * j + 1] = wp.d_log_variance;
    }
    grad.segment(u_off + j * n, n) = warp_pullback(m.warp.u, d_warp);
  });

  const Eigen::MatrixXd s = aligned_matrix(st);
  const ElboGradient eg = elbo_gradient(s, st.dpmm, options_.priors);
  out.terms.elbo = eg.value;
  out.terms.total = sum_terms(out.terms);

  for (Eigen::Index j = 0; j < j_count; ++j) {
    grad.segment(s_off + j * n, n) += eg.d_data.row(j).transpose();
  }
  double beta_grad = 0.0;
  for (double v : d_log_beta) beta_grad += v;
  // comp_var = 1 / beta, so d log comp_var / d log beta = -1.
  grad[layout_.block("beta").offset] = beta_grad - eg.d_log_comp_var;

  Eigen::Index o = layout_.block("gamma").offset;
  grad.segment(o, t_max - 1) = eg.d_log_stick_a;
  grad.segment(o + t_max - 1, t_max - 1) = eg.d_log_stick_b;
  o = layout_.block("tau").offset;
  for (Eigen::Index t = 0; t < t_max; ++t) {
    grad.segment(o, n) = eg.d_means.row(t).transpose();
    o += n;
  }
  grad.segment(o, t_max) = eg.d_log_mean_var;
  o = layout_.block("phi").offset;
  for (Eigen::Index j = 0; j < j_count; ++j) {
    grad.segment(o, t_max) = eg.d_phi_logits.row(j).transpose();
    o += t_max;
  }
  grad[layout_.block("alpha").offset] = eg.d_log_alpha;
  grad[layout_.block("base_var").offset] = eg.d_log_base_var;
  return out;
}

}  // namespace dpalign
