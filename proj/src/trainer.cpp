#include "dpalign/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "dpalign/warp.hpp"

namespace dpalign {

namespace {

constexpr double kGradientClip = 1e3;
constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr int kMaxStepHalvings = 30;

Eigen::Index resolve_truncation(const ModelConfig& model, Eigen::Index num_sequences) {
  return model.truncation > 0 ? model.truncation : num_sequences;
}

Eigen::MatrixXd random_responsibilities(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  Eigen::MatrixXd phi(rows, cols);
  for (Eigen::Index j = 0; j < rows; ++j) {
    for (Eigen::Index t = 0; t < cols; ++t) phi(j, t) = expo(rng) + 1e-12;
    phi.row(j) /= phi.row(j).sum();
  }
  return phi;
}

// Maximizer of the ELBO over the shared component variance.
double optimal_component_variance(const Eigen::MatrixXd& data, const DPMMState& state) {
  double total = 0.0;
  const double n = static_cast<double>(state.dimension());
  for (Eigen::Index j = 0; j < data.rows(); ++j) {
    for (Eigen::Index t = 0; t < state.truncation(); ++t) {
      total += state.phi(j, t) *
               ((data.row(j) - state.means.row(t)).squaredNorm() + n * state.mean_var[t]);
    }
  }
  return std::max(total / (static_cast<double>(data.rows()) * n), 1e-8);
}

DPMMState warm_start_mixture(const Eigen::MatrixXd& data, const ModelConfig& model,
                             Eigen::Index truncation, std::uint64_t seed) {
  const Eigen::Index j_count = data.rows();
  const Eigen::Index n = data.cols();
  const Eigen::RowVectorXd centre = data.colwise().mean();
  const double spread =
      std::max((data.rowwise() - centre).squaredNorm() / static_cast<double>(j_count * n), 1e-6);

  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  DPMMState best;
  double best_elbo = -std::numeric_limits<double>::infinity();
  const int restarts = std::max(model.warm_start_restarts, 1);
  for (int r = 0; r < restarts; ++r) {
    DPMMState st = DPMMState::make(j_count, truncation, n, model.init_alpha, model.init_base_var,
                                   spread);
    st.phi = random_responsibilities(j_count, truncation, rng);
    double previous = -std::numeric_limits<double>::infinity();
    double current = previous;
    for (int sweep = 0; sweep < model.warm_start_sweeps; ++sweep) {
      update_global_factors(data, st);
      st.comp_var = optimal_component_variance(data, st);
      st.phi = responsibilities(data, st);
      current = elbo(data, st, model.priors);
      if (std::abs(current - previous) <= 1e-10 * std::max(1.0, std::abs(current))) break;
      previous = current;
    }
    update_global_factors(data, st);
    current = elbo(data, st, model.priors);
    if (current > best_elbo) {
      best_elbo = current;
      best = st;
    }
  }
  return best;
}

std::string first_non_finite_term(const ObjectiveTerms& terms) {
  for (std::size_t j = 0; j < terms.gp.size(); ++j) {
    if (!std::isfinite(terms.gp[j])) return "joint_gp_loglik[" + std::to_string(j) + "]";
    if (!std::isfinite(terms.warp_prior[j])) return "warp_log_prior[" + std::to_string(j) + "]";
  }
  if (!std::isfinite(terms.elbo)) return "elbo";
  return "total";
}

bool acceptable(const ObjectiveEvaluation& eval) {
  return std::isfinite(eval.terms.total) && eval.gradient.allFinite();
}

}  // namespace

void TrainConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("train config: max_iters must be >= 1");
  if (!(step_size > 0.0)) throw std::invalid_argument("train config: step_size must be positive");
  if (!(convergence_tol >= 0.0)) throw std::invalid_argument("train config: tolerance must be >= 0");
  if (patience < 1) throw std::invalid_argument("train config: patience must be >= 1");
  if (log_every < 1) throw std::invalid_argument("train config: log_every must be >= 1");
}

void ModelConfig::validate() const {
  if (truncation < 0) throw std::invalid_argument("model config: truncation must be >= 0");
  if (!(prior_noise > 0.0)) throw std::invalid_argument("model config: prior_noise must be positive");
  for (double v : {init_lengthscale, init_variance, init_beta, init_warp_lengthscale,
                   init_warp_variance, init_alpha, init_base_var, priors.alpha.shape,
                   priors.alpha.rate, priors.base_var.shape, priors.base_var.rate}) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument("model config: initial values and priors must be positive");
    }
  }
}

JointState initial_state(const Dataset& data, const ModelConfig& model, std::uint64_t seed) {
  data.validate();
  model.validate();
  const Eigen::Index j_count = data.num_sequences();
  const Eigen::Index n = data.length();
  const Eigen::Index truncation = resolve_truncation(model, j_count);

  JointState st;
  st.sequences.reserve(static_cast<std::size_t>(j_count));
  for (Eigen::Index j = 0; j < j_count; ++j) {
    SequenceModel m;
    m.y = data.y.row(j).transpose();
    m.s = m.y;
    m.theta = KernelParams::make(model.gp_kernel, model.init_lengthscale, model.init_variance);
    m.warp.u = Eigen::VectorXd::Zero(n);
    m.warp.omega =
        KernelParams::make(model.warp_kernel, model.init_warp_lengthscale, model.init_warp_variance);
    st.sequences.push_back(std::move(m));
  }
  st.noise = NoiseModel::from_precision(model.init_beta);

  st.dpmm = warm_start_mixture(data.y, model, truncation, seed);
  st.dpmm.comp_var = st.noise.variance();
  update_global_factors(data.y, st.dpmm);
  return st;
}

FitResult fit(const Dataset& data, const TrainConfig& config, const ModelConfig& model) {
  config.validate();
  JointState init = initial_state(data, model, config.seed);

  ObjectiveOptions options;
  options.prior_noise = model.prior_noise;
  options.warp_prior_on = config.warp_prior_on;
  options.priors = model.priors;
  options.policy = config.policy;
  const JointObjective objective(data.x, init, options);
  const ParameterLayout& layout = objective.layout();

  Eigen::VectorXd params = layout.pack(init);
  ObjectiveEvaluation current = objective.evaluate(params, true);
  if (!std::isfinite(current.terms.total)) {
    throw NonFiniteObjective(first_non_finite_term(current.terms));
  }
  if (!current.gradient.allFinite()) throw NonFiniteObjective("gradient");

  FitResult result;
  result.objective_trace.push_back(current.terms.total);

  Eigen::VectorXd first = Eigen::VectorXd::Zero(layout.size());
  Eigen::VectorXd second = Eigen::VectorXd::Zero(layout.size());
  double step = config.step_size;
  int quiet = 0;
  int iter = 0;
  for (iter = 1; iter <= config.max_iters; ++iter) {
    Eigen::VectorXd grad = current.gradient;
    const double norm = grad.norm();
    if (norm > kGradientClip) grad *= kGradientClip / norm;

    first = kAdamBeta1 * first + (1.0 - kAdamBeta1) * grad;
    second = kAdamBeta2 * second + (1.0 - kAdamBeta2) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(kAdamBeta1, iter);
    const double c2 = 1.0 - std::pow(kAdamBeta2, iter);
    const Eigen::ArrayXd scale = (second.array() / c2).sqrt() + kAdamEps;
    Eigen::VectorXd direction = ((first.array() / c1) / scale).matrix();

    bool accepted = false;
    int halvings = 0;
    ObjectiveEvaluation candidate;
    Eigen::VectorXd trial;
    for (; halvings <= kMaxStepHalvings; ++halvings) {
      trial = params + step * direction;
      bool ok = false;
      try {
        candidate = objective.evaluate(trial, true);
        ok = acceptable(candidate) && candidate.terms.total >= current.terms.total;
      } catch (const FactorizationFailure&) {
        ok = false;
      }
      if (ok) {
        accepted = true;
        break;
      }
      // Retry along the preconditioned gradient with the momentum reset.
      step *= 0.5;
      direction = (grad.array() / scale).matrix();
      first = grad * c1;
    }
    if (!accepted) break;

    const double previous = current.terms.total;
    params = trial;
    current = std::move(candidate);
    if (halvings == 0) step = std::min(step * 1.1, config.step_size);

    const double rel = std::abs(current.terms.total - previous) / std::max(1.0, std::abs(previous));
    quiet = rel < config.convergence_tol ? quiet + 1 : 0;
    if (iter % config.log_every == 0) result.objective_trace.push_back(current.terms.total);
    if (quiet >= config.patience) {
      result.converged = true;
      break;
    }
  }
  result.iterations = std::min(iter, config.max_iters);
  if (result.objective_trace.back() != current.terms.total) {
    result.objective_trace.push_back(current.terms.total);
  }

  const JointState final_state = objective.state(params);
  const Eigen::Index j_count = data.num_sequences();
  result.aligned = aligned_matrix(final_state);
  result.warped_inputs.resize(j_count, data.length());
  for (Eigen::Index j = 0; j < j_count; ++j) {
    const SequenceModel& m = final_state.sequences[static_cast<std::size_t>(j)];
    result.warps.push_back(m.warp);
    result.warped_inputs.row(j) = warp_from_aux(m.warp.u).transpose();
    result.hyperparams.theta.push_back(m.theta);
  }
  result.hyperparams.noise = final_state.noise;
  result.dpmm = final_state.dpmm;
  result.labels = map_cluster_assignments(result.dpmm.phi);
  result.n_clusters = effective_num_clusters(result.dpmm.phi);
  result.final_terms = current.terms;
  result.state = final_state;

  const bool truth = data.groups.has_value();
  const std::vector<int>& groups = truth ? *data.groups : result.labels;
  result.metrics.groups = truth ? GroupSource::kGroundTruth : GroupSource::kEstimated;
  result.metrics.mean_alignment_error = alignment_error(result.aligned, groups, AlignmentMode::kMean);
  result.metrics.median_alignment_error =
      alignment_error(result.aligned, groups, AlignmentMode::kMedian);
  result.metrics.data_fit = data_fit_metric(final_state.noise);
  result.metrics.warp_complexity = warp_complexity_metric(result.warps);
  return result;
}

bool GradCheckReport::passed() const {
  return std::all_of(blocks.begin(), blocks.end(), [](const BlockReport& b) { return b.passed; });
}

GradCheckInstance make_gradcheck_instance(std::uint64_t seed, int num_sequences, int length,
                                          bool perturb, KernelFamily gp_kernel) {
  if (num_sequences < 1 || num_sequences > 4 || length < 2 || length > 10) {
    throw std::invalid_argument("gradient check instances need 1 <= J <= 4 and 2 <= N <= 10");
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

  GradCheckInstance inst;
  inst.x = even_grid(length);
  const Eigen::Index n = length;
  for (int j = 0; j < num_sequences; ++j) {
    SequenceModel m;
    m.y.resize(n);
    const std::string base = j % 2 == 0 ? "sinc" : "cubic";
    for (Eigen::Index k = 0; k < n; ++k) m.y[k] = base_function(base, inst.x[k]) + 0.05 * normal(rng);
    m.s = m.y;
    m.warp.u = Eigen::VectorXd::Zero(n);
    if (perturb) {
      for (Eigen::Index k = 0; k < n; ++k) {
        m.s[k] += 0.1 * normal(rng);
        m.warp.u[k] = 0.3 * normal(rng);
      }
    }
    m.theta = KernelParams::make(gp_kernel, between(0.3, 0.6), between(0.5, 1.5));
    m.warp.omega = KernelParams::make(KernelFamily::kSquaredExponential, between(0.6, 1.2),
                                      between(0.5, 1.5));
    inst.state.sequences.push_back(std::move(m));
  }
  inst.state.noise = NoiseModel::from_precision(between(20.0, 80.0));

  const Eigen::Index t_max = num_sequences;
  DPMMState d = DPMMState::make(num_sequences, t_max, n, between(0.5, 2.0), between(0.5, 1.5),
                                inst.state.noise.variance());
  for (Eigen::Index t = 0; t + 1 < t_max; ++t) {
    d.stick_a[t] = between(0.5, 3.0);
    d.stick_b[t] = between(0.5, 3.0);
  }
  for (Eigen::Index t = 0; t < t_max; ++t) {
    for (Eigen::Index k = 0; k < n; ++k) d.means(t, k) = 0.5 * normal(rng);
    d.mean_var[t] = between(0.05, 0.5);
  }
  d.phi = random_responsibilities(num_sequences, t_max, rng);
  inst.state.dpmm = d;
  return inst;
}

GradCheckReport check_gradients(const GradCheckInstance& instance, double tolerance,
                                const GradientHook& hook) {
  constexpr double kStep = 1e-3;
  const JointObjective objective(instance.x, instance.state, instance.options);
  const ParameterLayout& layout = objective.layout();
  const Eigen::VectorXd params = layout.pack(instance.state);
  Eigen::VectorXd analytic = objective.evaluate(params, true).gradient;
  if (hook) hook(layout, analytic);

  GradCheckReport report;
  for (const auto& block : layout.blocks()) {
    BlockReport br{block.name, 0.0, true};
    for (Eigen::Index i = block.offset; i < block.offset + block.size; ++i) {
      Eigen::VectorXd p = params;
      const auto at = [&](double offset) {
        p[i] = params[i] + offset;
        return objective.evaluate(p, false).terms.total;
      };
      const double numeric =
          (8.0 * (at(kStep) - at(-kStep)) - (at(2.0 * kStep) - at(-2.0 * kStep))) / (12.0 * kStep);
      const double err = std::abs(analytic[i] - numeric) /
                         std::max({std::abs(analytic[i]), std::abs(numeric), 1.0});
      br.max_rel_error = std::max(br.max_rel_error, std::isfinite(err) ? err : 1e300);
    }
    br.passed = br.max_rel_error < tolerance;
    report.blocks.push_back(br);
  }
  return report;
}

}  // namespace dpalign
