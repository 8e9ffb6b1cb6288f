// Serial reference path vs. OpenMP per-sequence evaluation of the joint
// objective and its gradient.

#include <benchmark/benchmark.h>

#include "dpalign/data.hpp"
#include "dpalign/objective.hpp"
#include "dpalign/trainer.hpp"

namespace {

using dpalign::ExecutionPolicy;

struct Problem {
  dpalign::JointObjective objective;
  Eigen::VectorXd params;
};

Problem make_problem(int num_sequences, int length, ExecutionPolicy policy) {
  dpalign::SyntheticConfig cfg;
  cfg.num_sequences = num_sequences;
  cfg.length = length;
  cfg.warp_severity = 0.5;
  const dpalign::Dataset data = dpalign::generate_synthetic(cfg, 7);
  dpalign::ModelConfig model;
  model.warm_start_restarts = 1;
  const dpalign::JointState init = dpalign::initial_state(data, model, 7);
  dpalign::ObjectiveOptions options;
  options.policy = policy;
  dpalign::JointObjective objective(data.x, init, options);
  Eigen::VectorXd params = objective.layout().pack(init);
  return Problem{std::move(objective), std::move(params)};
}

void run(benchmark::State& state, ExecutionPolicy policy) {
  const auto j = static_cast<int>(state.range(0));
  const auto n = static_cast<int>(state.range(1));
  const Problem p = make_problem(j, n, policy);
  for (auto _ : state) {
    auto eval = p.objective.evaluate(p.params, true);
    benchmark::DoNotOptimize(eval.terms.total);
  }
  state.SetItemsProcessed(state.iterations() * j);
}

void BM_ObjectiveSerial(benchmark::State& state) { run(state, ExecutionPolicy::kSerial); }
void BM_ObjectiveParallel(benchmark::State& state) { run(state, ExecutionPolicy::kParallel); }

}  // namespace

BENCHMARK(BM_ObjectiveSerial)->Args({10, 50})->Args({20, 100})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ObjectiveParallel)->Args({10, 50})->Args({20, 100})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
