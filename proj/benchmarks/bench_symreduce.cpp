#include <benchmark/benchmark.h>

#include "symreduce/app.hpp"

using namespace symreduce;

static void BM_Canonicalize(benchmark::State& state) {
  Expr e = parse_infix("(u + mu/(L^2 + lambda^2))^2 * (L^2 + lambda^2)^2 / (u*L^2 + u*lambda^2 + mu)^2");
  for (auto _ : state) benchmark::DoNotOptimize(canonicalize(e));
}
BENCHMARK(BM_Canonicalize);

static void BM_ReduceDirect(benchmark::State& state) {
  auto spec = state.range(0) == 0 ? ProblemSpec::kepler() : ProblemSpec::micz();
  for (auto _ : state) benchmark::DoNotOptimize(reduce_direct(spec));
}
BENCHMARK(BM_ReduceDirect)->Arg(0)->Arg(1);

static void BM_ReduceNucciDrag(benchmark::State& state) {
  auto spec = ProblemSpec::kepler_drag();
  for (auto _ : state) benchmark::DoNotOptimize(reduce_nucci(spec));
}
BENCHMARK(BM_ReduceNucciDrag);

static void BM_CertifyCatalog(benchmark::State& state) {
  auto rs = reduce_direct(ProblemSpec::kepler());
  auto cat = reduced_catalog(rs);
  for (auto _ : state) {
    int n = 0;
    for (const auto& g : cat) n += is_symmetry(g, rs);
    benchmark::DoNotOptimize(n);
  }
}
BENCHMARK(BM_CertifyCatalog);

static void BM_BackTransformMICZ(benchmark::State& state) {
  auto spec = ProblemSpec::micz();
  auto rs = reduce_direct(spec);
  auto cat = micz_catalog(spec);
  for (auto _ : state) benchmark::DoNotOptimize(check_back_transforms(cat, spec, rs));
}
BENCHMARK(BM_BackTransformMICZ)->Unit(benchmark::kMillisecond);

static void BM_IntegrateKepler(benchmark::State& state) {
  auto spec = ProblemSpec::kepler(Expr(1));
  IntegratorOptions o;
  o.tol = std::pow(10.0, -static_cast<double>(state.range(0)));
  for (auto _ : state)
    benchmark::DoNotOptimize(integrate_orbit(spec, {0, 1, 0, 0, 1.2}, 50, o));
}
BENCHMARK(BM_IntegrateKepler)->Arg(8)->Arg(10)->Arg(12)->Unit(benchmark::kMillisecond);

static void BM_OscillatorResidual(benchmark::State& state) {
  auto spec = ProblemSpec::kepler_drag(Expr(1), Expr(Rational(1, 100)));
  auto rs = reduce_direct(spec);
  auto tr = integrate_orbit(spec, {0, 1, 0, 0, 1.2}, 50);
  for (auto _ : state) benchmark::DoNotOptimize(oscillator_residual(tr, rs));
}
BENCHMARK(BM_OscillatorResidual)->Unit(benchmark::kMillisecond);

static void BM_FullRun(benchmark::State& state) {
  auto cfg = app::parse_problem_config(R"({"family":"micz","mu":1.0,"lambda":0.5,"nu":0.0,
      "sweep":[{"lambda":0.4,"nu":0.02},{"lambda":0.6,"nu":-0.03}]})");
  cfg.parallel = state.range(0) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(app::run(app::Command::Full, cfg));
}
BENCHMARK(BM_FullRun)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
