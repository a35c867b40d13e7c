// Serial depth-first reference against the parallel level-synchronous search.

#include <benchmark/benchmark.h>

#include <fstream>
#include <sstream>

#include "psibpmn/compiler.hpp"
#include "psibpmn/simulator.hpp"

using namespace psibpmn;

namespace {

BpmnModel load(const char* name, DetailLevel level) {
  std::ifstream in(std::string(PSIBPMN_FIXTURES) + "/" + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return compile(parse_network_spec(ss.str()), level);
}

void run(benchmark::State& state, const BpmnModel& model, bool parallel) {
  ExploreOptions o;
  o.parallel = parallel;
  ExploreStats stats;
  for (auto _ : state) benchmark::DoNotOptimize(explore(model, o, &stats));
  state.counters["states"] = static_cast<double>(stats.states);
  state.counters["states/s"] =
      benchmark::Counter(static_cast<double>(stats.states), benchmark::Counter::kIsIterationInvariantRate);
}

void BM_SingleComplete(benchmark::State& state) {
  static const auto model = load("single.json", DetailLevel::Complete);
  run(state, model, state.range(0) != 0);
}

void BM_Poc1Dissent(benchmark::State& state) {
  static const auto model = load("poc1.json", DetailLevel::WithDissent);
  run(state, model, state.range(0) != 0);
}

void BM_Poc2Happy(benchmark::State& state) {
  static const auto model = load("poc2.json", DetailLevel::HappyFlow);
  run(state, model, state.range(0) != 0);
}

void BM_RandomRuns(benchmark::State& state) {
  static const auto model = load("poc1.json", DetailLevel::Complete);
  ExploreOptions o;
  o.mode = ExploreMode::Random;
  o.runs = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(explore(model, o));
}

}  // namespace

BENCHMARK(BM_SingleComplete)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Poc1Dissent)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Poc2Happy)->ArgName("parallel")->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_RandomRuns)->ArgName("runs")->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
