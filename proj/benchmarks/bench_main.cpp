#include <benchmark/benchmark.h>

#include "eerec/audit.hpp"
#include "eerec/explain.hpp"
#include "eerec/knowledge.hpp"
#include "eerec/sim.hpp"

using namespace eerec;

namespace {

const ScenarioSpec& spec() {
  static const ScenarioSpec s = office_week_spec();
  return s;
}

const KnowledgeBase& kb() {
  static const KnowledgeBase k = history_knowledge(spec(), spec().history_weeks, 1);
  return k;
}

RunOptions options(int days) {
  RunOptions opt;
  opt.mode = ScenarioMode::Explainable;
  opt.seed = 17;
  opt.days = days;
  opt.kb = kb();
  return opt;
}

void BM_BuildKnowledge(benchmark::State& state) {
  const auto trace = generate_trace(spec(), 0, static_cast<int>(state.range(0)), 3);
  for (auto _ : state) benchmark::DoNotOptimize(build_knowledge(trace, static_cast<int>(state.range(0))));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(trace.size()));
}
BENCHMARK(BM_BuildKnowledge)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

void BM_Session(benchmark::State& state) {
  const auto persona = Persona::constant("bench", 0.6, 0.165);
  const auto opt = options(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(run_session(spec(), persona, opt));
}
BENCHMARK(BM_Session)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

void BM_Audit(benchmark::State& state) {
  const auto log = run_session(spec(), Persona::constant("bench", 0.6, 0.165), options(0));
  for (auto _ : state) benchmark::DoNotOptimize(audit_log(log.events()));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(log.size()));
}
BENCHMARK(BM_Audit)->Unit(benchmark::kMillisecond);

void BM_ComputeSavings(benchmark::State& state) {
  const Appliance ac{"ac", ApplianceKind::AirConditioner, 3.2, true, Timestamp{}};
  const Timestamp now{3 * 3600};
  const auto projection = kAllProjections[state.range(0)];
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_savings(ac, Timestamp{}, now, 0.165, 0.3, 15.0, FactType::Econ, projection));
}
BENCHMARK(BM_ComputeSavings)->DenseRange(0, 2);

}  // namespace

BENCHMARK_MAIN();
