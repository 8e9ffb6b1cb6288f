#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dpalign/objective.hpp"
#include "dpalign/trainer.hpp"
#include "oracles.hpp"

namespace dpalign {
namespace {

TEST(JointObjective, SumOfPartsIdentity) {
  const GradCheckInstance inst = make_gradcheck_instance(5, 3, 8);
  const ObjectiveTerms terms = joint_objective(inst.state, inst.x, inst.options);

  double expected = 0.0;
  for (std::size_t j = 0; j < inst.state.sequences.size(); ++j) {
    const SequenceModel& m = inst.state.sequences[j];
    const double gp = joint_gp_loglik(m, inst.x, inst.state.noise);
    const double wp =
        warp_log_prior(warp_from_aux(m.warp.u), inst.x, m.warp.omega, inst.options.prior_noise);
    EXPECT_EQ(terms.gp[j], gp);
    EXPECT_EQ(terms.warp_prior[j], wp);
    expected += gp + wp;
  }
  DPMMState mixture = inst.state.dpmm;
  mixture.comp_var = inst.state.noise.variance();
  const double e = elbo(aligned_matrix(inst.state), mixture, inst.options.priors);
  EXPECT_EQ(terms.elbo, e);
  expected += e;
  EXPECT_EQ(terms.total, expected);
}

TEST(JointObjective, WarpPriorOffContributesZero) {
  GradCheckInstance inst = make_gradcheck_instance(2);
  inst.options.warp_prior_on = false;
  const ObjectiveTerms terms = joint_objective(inst.state, inst.x, inst.options);
  for (double v : terms.warp_prior) EXPECT_EQ(v, 0.0);
}

TEST(JointObjective, SingleSequenceSingleComponentIsFinite) {
  GradCheckInstance inst = make_gradcheck_instance(7, 1, 5);
  inst.state.dpmm = DPMMState::make(1, 1, 5, 1.0, 1.0, 1.0);
  const ObjectiveTerms terms = joint_objective(inst.state, inst.x, inst.options);
  EXPECT_TRUE(std::isfinite(terms.total));
  EXPECT_EQ(terms.gp.size(), 1u);
}

TEST(JointObjective, SerialAndParallelAgreeExactly) {
  GradCheckInstance inst = make_gradcheck_instance(11, 4, 10);
  inst.options.policy = ExecutionPolicy::kSerial;
  const JointObjective serial(inst.x, inst.state, inst.options);
  inst.options.policy = ExecutionPolicy::kParallel;
  const JointObjective parallel(inst.x, inst.state, inst.options);
  const Eigen::VectorXd p = serial.layout().pack(inst.state);
  const ObjectiveEvaluation a = serial.evaluate(p, true);
  const ObjectiveEvaluation b = parallel.evaluate(p, true);
  EXPECT_EQ(a.terms.total, b.terms.total);
  EXPECT_EQ(a.gradient, b.gradient);
}

TEST(JointObjective, FactorizationFailureNamesSequence) {
  GradCheckInstance inst = make_gradcheck_instance(3, 3, 6);
  inst.state.sequences[1].theta.log_variance = NAN;
  try {
    joint_objective(inst.state, inst.x, inst.options);
    FAIL() << "expected FactorizationFailure";
  } catch (const FactorizationFailure& e) {
    EXPECT_NE(std::string(e.what()).find("sequence 1"), std::string::npos);
  }
}

TEST(ParameterLayout, PackUnpackRoundTrip) {
  const GradCheckInstance inst = make_gradcheck_instance(4, 3, 7);
  const ParameterLayout layout(3, 7, inst.state.dpmm.truncation());
  const Eigen::VectorXd p = layout.pack(inst.state);
  ASSERT_EQ(p.size(), layout.size());
  JointState copy = inst.state;
  for (auto& m : copy.sequences) m.s.setZero();
  layout.unpack(p, copy);
  EXPECT_LE((layout.pack(copy) - p).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((aligned_matrix(copy) - aligned_matrix(inst.state)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ParameterLayout, BlockOrderAndSizes) {
  const ParameterLayout layout(3, 7, 4);
  const std::vector<std::string> names{"s",   "u",   "theta", "omega", "beta",
                                       "gamma", "tau", "phi",   "alpha", "base_var"};
  ASSERT_EQ(layout.blocks().size(), names.size());
  Eigen::Index offset = 0;
  for (std::size_t i = 0; i < names.size(); ++i) {
    EXPECT_EQ(layout.blocks()[i].name, names[i]);
    EXPECT_EQ(layout.blocks()[i].offset, offset);
    offset += layout.blocks()[i].size;
  }
  EXPECT_EQ(offset, layout.size());
  EXPECT_EQ(layout.block("gamma").size, 6);
  EXPECT_EQ(layout.block("tau").size, 4 * 7 + 4);
  EXPECT_THROW(layout.block("nope"), std::out_of_range);
}

TEST(JointObjective, GradientMatchesIndependentFiniteDifferences) {
  const GradCheckInstance inst = make_gradcheck_instance(9, 3, 8);
  const JointObjective objective(inst.x, inst.state, inst.options);
  const Eigen::VectorXd p = objective.layout().pack(inst.state);
  const Eigen::VectorXd analytic = objective.evaluate(p, true).gradient;
  const Eigen::VectorXd numeric = testing::five_point_difference(
      [&](const Eigen::VectorXd& q) { return objective.evaluate(q, false).terms.total; }, p);
  EXPECT_LT(testing::max_relative_error(analytic, numeric), 1e-4);
}

}  // namespace
}  // namespace dpalign
