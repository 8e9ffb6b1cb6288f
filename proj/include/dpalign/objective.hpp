#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "dpalign/dpmm.hpp"
#include "dpalign/gp_sequence_model.hpp"

namespace dpalign {

/// How the per-sequence terms are evaluated. kParallel uses OpenMP; kSerial is
/// the reference path. Both sum in the same order and give identical results.
enum class ExecutionPolicy { kSerial, kParallel };

struct JointState {
  std::vector<SequenceModel> sequences;
  NoiseModel noise;
  DPMMState dpmm;  // comp_var is overwritten with 1 / beta on every evaluation
};

struct ObjectiveOptions {
  double prior_noise = 1e-6;
  bool warp_prior_on = true;
  HyperPriors priors;
  ExecutionPolicy policy = ExecutionPolicy::kParallel;
};

struct ObjectiveTerms {
  std::vector<double> gp;          // per sequence
  std::vector<double> warp_prior;  // per sequence, zero when the prior is off
  double elbo = 0.0;
  double total = 0.0;
};

/// sum_j [gp_j + warp_prior_j] + elbo(s), accumulated in sequence order with the
/// ELBO added last. The mixture component variance is tied to 1 / beta.
/// FactorizationFailure messages name the offending sequence.
ObjectiveTerms joint_objective(const JointState& state, const Eigen::Ref<const Eigen::VectorXd>& x,
                               const ObjectiveOptions& options);

/// Stacks s_j as rows.
Eigen::MatrixXd aligned_matrix(const JointState& state);

/// Maps a JointState to and from one flat vector of unconstrained parameters.
/// Block order: s, u, theta, omega, beta, gamma, tau, phi, alpha, base_var.
class ParameterLayout {
 public:
  struct Block {
    std::string name;
    Eigen::Index offset = 0;
    Eigen::Index size = 0;
  };

  ParameterLayout(Eigen::Index num_sequences, Eigen::Index length, Eigen::Index truncation);

  Eigen::Index size() const { return size_; }
  Eigen::Index num_sequences() const { return num_sequences_; }
  Eigen::Index length() const { return length_; }
  Eigen::Index truncation() const { return truncation_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const Block& block(const std::string& name) const;

  Eigen::VectorXd pack(const JointState& state) const;
  /// Overwrites every parameter of `state`; kernel families and y are kept.
  void unpack(const Eigen::Ref<const Eigen::VectorXd>& params, JointState& state) const;

 private:
  Eigen::Index num_sequences_;
  Eigen::Index length_;
  Eigen::Index truncation_;
  Eigen::Index size_ = 0;
  std::vector<Block> blocks_;
};

struct ObjectiveEvaluation {
  ObjectiveTerms terms;
  Eigen::VectorXd gradient;  // empty unless requested
};

/// Joint objective as a function of the flat parameter vector.
class JointObjective {
 public:
  /// `prototype` supplies y, kernel families and the shapes.
  JointObjective(Eigen::VectorXd x, JointState prototype, ObjectiveOptions options);

  const ParameterLayout& layout() const { return layout_; }
  const ObjectiveOptions& options() const { return options_; }
  ObjectiveOptions& options() { return options_; }
  const Eigen::VectorXd& grid() const { return x_; }

  JointState state(const Eigen::Ref<const Eigen::VectorXd>& params) const;
  ObjectiveEvaluation evaluate(const Eigen::Ref<const Eigen::VectorXd>& params,
                               bool with_gradient) const;

 private:
  Eigen::VectorXd x_;
  JointState prototype_;
  ObjectiveOptions options_;
  ParameterLayout layout_;
};

}  // namespace dpalign
