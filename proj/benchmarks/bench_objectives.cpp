#include "mddest/dgp.hpp"
#include "mddest/distance.hpp"
#include "mddest/estimators.hpp"
#include "mddest/inference.hpp"
#include "mddest/mdd.hpp"

#include <benchmark/benchmark.h>

using namespace mddest;

namespace {

GeneratedData data_for(int dgp, int n) { return generate({dgp, n, 99, 200}); }

void BM_DistanceMatrix(benchmark::State& state) {
  GeneratedData data = data_for(13, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    DistanceMatrix d = distance_matrix(data.sample);
    benchmark::DoNotOptimize(d.d.data());
  }
}
BENCHMARK(BM_DistanceMatrix)->Arg(100)->Arg(200)->Arg(400)->Arg(800);

void BM_MddObjective(benchmark::State& state) {
  GeneratedData data = data_for(1, static_cast<int>(state.range(0)));
  DistanceMatrix dist = distance_matrix(data.sample);
  Eigen::VectorXd theta = data.truth.theta;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mdd_objective(data.model, data.sample, dist, theta));
  }
}
BENCHMARK(BM_MddObjective)->Arg(100)->Arg(200)->Arg(400)->Arg(800);

void BM_MddValueAndGradient(benchmark::State& state) {
  GeneratedData data = data_for(13, static_cast<int>(state.range(0)));
  DistanceMatrix dist = distance_matrix(data.sample);
  Eigen::VectorXd theta = data.truth.theta;
  for (auto _ : state) {
    MddEval eval = mdd_value_and_gradient(data.model, data.sample, dist, theta);
    benchmark::DoNotOptimize(eval.value);
  }
}
BENCHMARK(BM_MddValueAndGradient)->Arg(100)->Arg(200)->Arg(400);

void BM_DlValueAndGradient(benchmark::State& state) {
  GeneratedData data = data_for(1, static_cast<int>(state.range(0)));
  DlObjectiveState dl = dl_state(data.sample);
  Eigen::VectorXd theta = data.truth.theta;
  for (auto _ : state) {
    MddEval eval = dl_value_and_gradient(data.model, data.sample, dl, theta);
    benchmark::DoNotOptimize(eval.value);
  }
}
BENCHMARK(BM_DlValueAndGradient)->Arg(100)->Arg(200)->Arg(400);

void BM_ClosedFormLinear(benchmark::State& state) {
  GeneratedData data = data_for(13, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    EstimateResult res = closed_form_linear(data.sample, 2);
    benchmark::DoNotOptimize(res.theta_hat.theta.data());
  }
}
BENCHMARK(BM_ClosedFormLinear)->Arg(100)->Arg(200)->Arg(400);

void BM_SandwichVcov(benchmark::State& state) {
  GeneratedData data = data_for(13, static_cast<int>(state.range(0)));
  DistanceMatrix dist = distance_matrix(data.sample);
  for (auto _ : state) {
    MddVcov v = vcov_mdd(data.model, data.sample, dist, data.truth.theta);
    benchmark::DoNotOptimize(v.vcov.data());
  }
}
BENCHMARK(BM_SandwichVcov)->Arg(100)->Arg(200)->Arg(400);

void BM_FullReplication(benchmark::State& state) {
  // generate + estimate + analytic SEs, the unit the simulation driver runs
  GeneratedData data = data_for(1, static_cast<int>(state.range(0)));
  for (auto _ : state) {
    EstimateResult res = estimate_mdd(data.model, data.sample);
    benchmark::DoNotOptimize(res.std_errors.data());
  }
}
BENCHMARK(BM_FullReplication)->Arg(100)->Arg(200);

}  // namespace

BENCHMARK_MAIN();
