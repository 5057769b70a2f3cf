#include <benchmark/benchmark.h>

#include "popsync/countdown.hpp"
#include "popsync/pilot.hpp"
#include "popsync/product.hpp"
#include "popsync/reduction.hpp"
#include "popsync/simulate.hpp"

namespace {

using namespace popsync;

const char* kGame =
    "init v0 3\n"
    "edge v0 1 v0\n"
    "edge v0 1 v1\n"
    "edge v1 2 v1\n"
    "edge v1 1 v0\n";

const Compiled& compiled_fixture() {
  static Compiled c = compile(parse_game(kGame));
  return c;
}

const WinTable& wintable_fixture() {
  static WinTable wt = solve_game(parse_game(kGame));
  return wt;
}

void quotient_bench(benchmark::State& state, bool parallel) {
  const Compiled& c = compiled_fixture();
  BuildOptions opts;
  opts.parallel = parallel;
  opts.collapse_doomed = true;
  for (auto _ : state) {
    AbstractProduct p = build_quotient(c.mdp, static_cast<std::uint32_t>(state.range(0)), opts);
    benchmark::DoNotOptimize(p.configs.size());
  }
}

void BM_BuildQuotientSerial(benchmark::State& state) { quotient_bench(state, false); }
void BM_BuildQuotientParallel(benchmark::State& state) { quotient_bench(state, true); }

void estimate_bench(benchmark::State& state, bool parallel) {
  const Compiled& c = compiled_fixture();
  PilotContext ctx{&c.mdp, &c.gm, &wintable_fixture()};
  StrategyFn fn = [ctx](const Config& cfg) { return pilot_action(ctx, cfg); };
  std::uint32_t n = c.gm.min_sync_n;
  RunOptions opts;
  opts.max_steps = default_max_steps(c.gm, n);
  for (auto _ : state) {
    EstimateSummary s = estimate(c.mdp, n, fn, 200, 1, opts, parallel);
    benchmark::DoNotOptimize(s.successes);
  }
}

void BM_EstimateSerial(benchmark::State& state) { estimate_bench(state, false); }
void BM_EstimateParallel(benchmark::State& state) { estimate_bench(state, true); }

}  // namespace

BENCHMARK(BM_BuildQuotientSerial)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BuildQuotientParallel)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_EstimateParallel)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
