#include <benchmark/benchmark.h>

#include "hrcplan/evaluate.hpp"
#include "hrcplan/events.hpp"
#include "hrcplan/graph_planner.hpp"
#include "hrcplan/intent.hpp"
#include "hrcplan/qlearning.hpp"
#include "hrcplan/random_htm.hpp"
#include "hrcplan/state_key.hpp"

namespace {

using namespace hrc;

std::shared_ptr<const Htm> chair() {
  static const auto htm = std::make_shared<const Htm>(chair_htm());
  return htm;
}

ScenarioConfig stochastic() {
  ScenarioConfig sc;
  sc.p_change = 0.2;
  sc.p_fail = 0.1;
  return sc;
}

ScenarioConfig nominal() {
  ScenarioConfig sc;
  sc.duration_cv = 0.0;
  sc.p_fail = 0.0;
  return sc;
}

void BM_Episode(benchmark::State& state) {
  Environment env(chair(), stochastic());
  const RandomPolicy policy;
  std::uint64_t seed = 0;
  long events = 0;
  for (auto _ : state) {
    const auto rec = run_episode(policy, env, seed++);
    events += rec.n_events;
    benchmark::DoNotOptimize(rec.steps);
  }
  state.counters["events/s"] = benchmark::Counter(static_cast<double>(events), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_Episode);

void BM_EventProbabilities(benchmark::State& state) {
  Environment env(chair(), stochastic());
  env.reset(1);
  const WorldState s = env.state();
  const ActionId robot = env.feasible().back();
  for (auto _ : state) benchmark::DoNotOptimize(event_probabilities(env.htm(), env.scenario(), s, robot));
}
BENCHMARK(BM_EventProbabilities);

void BM_EncodeState(benchmark::State& state) {
  Environment env(chair(), stochastic());
  env.reset(1);
  const WorldState s = env.state();
  for (auto _ : state) benchmark::DoNotOptimize(encode_state(s));
}
BENCHMARK(BM_EncodeState);

void BM_BuildGraph(benchmark::State& state) {
  const auto htm = std::make_shared<const Htm>(generate_random_htm(static_cast<int>(state.range(0)), 1));
  std::size_t nodes = 0;
  for (auto _ : state) {
    const auto g = build_graph(htm, nominal());
    nodes = g.nodes.size();
    benchmark::DoNotOptimize(g.root.size());
  }
  state.counters["nodes"] = static_cast<double>(nodes);
}
BENCHMARK(BM_BuildGraph)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_SolveGraph(benchmark::State& state) {
  const auto htm = std::make_shared<const Htm>(generate_random_htm(8, 3));
  const auto g = build_graph(htm, nominal());
  for (auto _ : state) benchmark::DoNotOptimize(solve(g).root_value);
}
BENCHMARK(BM_SolveGraph)->Unit(benchmark::kMillisecond);

void BM_SolveBounded(benchmark::State& state) {
  const auto htm = std::make_shared<const Htm>(generate_random_htm(static_cast<int>(state.range(0)), 1));
  for (auto _ : state) benchmark::DoNotOptimize(solve_bounded(htm, nominal()).root_value);
}
BENCHMARK(BM_SolveBounded)->Arg(8)->Unit(benchmark::kMillisecond);

void BM_TrainEpisodes(benchmark::State& state) {
  Environment env(chair(), stochastic());
  TrainConfig cfg;
  cfg.episodes = 1000;
  for (auto _ : state) benchmark::DoNotOptimize(train(env, cfg).updates);
  state.SetItemsProcessed(state.iterations() * cfg.episodes);
}
BENCHMARK(BM_TrainEpisodes)->Unit(benchmark::kMillisecond);

void BM_BeliefUpdate(benchmark::State& state) {
  const GoalSet goals = goals_for(*chair());
  const Observation obs{{0.3, 0.1, 0.0}, {0.2, 0.05, 0.0}, 1};
  Belief b = Belief::uniform(goals.size());
  for (auto _ : state) {
    b = belief_update(b, obs, goals).belief;
    benchmark::DoNotOptimize(b.probs.data());
  }
}
BENCHMARK(BM_BeliefUpdate);

void BM_Evaluate(benchmark::State& state) {
  const GreedyPolicy policy;
  for (auto _ : state) {
    const EvalOptions opts{static_cast<int>(state.range(0))};
    benchmark::DoNotOptimize(evaluate(policy, chair(), stochastic(), 1000, 1, opts).mean);
  }
}
BENCHMARK(BM_Evaluate)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
