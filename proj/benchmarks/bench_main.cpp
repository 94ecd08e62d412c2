#include "tsattack/cost_attack.hpp"
#include "tsattack/grad_attack.hpp"
#include "tsattack/instances.hpp"
#include "tsattack/qp.hpp"

#include <cmath>

#include <benchmark/benchmark.h>

using namespace tsattack;

namespace {

SystemSpec battery(int horizon) { return SystemSpec::scalar(1.0, -1.0, 1.0, 1.0, 1.0, horizon, 1.0); }

Timeseries ramp(Eigen::Index n) {
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = std::sin(0.3 * static_cast<double>(i));
  return Timeseries(v);
}

void BM_MakeBatchForm(benchmark::State& state) {
  const SystemSpec spec = battery(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(make_batch_form(spec));
}
BENCHMARK(BM_MakeBatchForm)->Arg(50)->Arg(120);

void BM_DominantEigenpair(benchmark::State& state) {
  const BatchForm b = make_batch_form(battery(static_cast<int>(state.range(0))));
  for (auto _ : state) benchmark::DoNotOptimize(dominant_eigenpair(b.Psi));
}
BENCHMARK(BM_DominantEigenpair)->Arg(50)->Arg(120);

struct BoxedProblem {
  BatchForm batch;
  ConstraintSet cons;
  Timeseries s;
};

BoxedProblem boxed(int horizon) {
  const SystemSpec spec = battery(horizon);
  BoxedProblem p{make_batch_form(spec), {}, ramp(horizon)};
  p.cons = compile_constraints(spec, p.batch, clamping_action_box(p.batch, p.s, 0.5), std::nullopt);
  return p;
}

void BM_SolveQp(benchmark::State& state) {
  const BoxedProblem p = boxed(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(solve_qp(p.batch, p.cons, p.s));
}
BENCHMARK(BM_SolveQp)->Arg(50)->Arg(120);

void BM_SolutionJacobian(benchmark::State& state) {
  const BoxedProblem p = boxed(static_cast<int>(state.range(0)));
  const QpSolution sol = solve_qp(p.batch, p.cons, p.s);
  for (auto _ : state) benchmark::DoNotOptimize(solution_jacobian(p.batch, p.cons, sol));
}
BENCHMARK(BM_SolutionJacobian)->Arg(50)->Arg(120);

void BM_IteratedMaxAction(benchmark::State& state) {
  const BoxedProblem p = boxed(50);
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        iterated_attack(p.batch, p.cons, p.s, 1.0, {TargetKind::MaxAction}));
  }
}
BENCHMARK(BM_IteratedMaxAction);

}  // namespace

BENCHMARK_MAIN();
