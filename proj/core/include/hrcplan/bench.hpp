#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hrcplan/evaluate.hpp"
#include "hrcplan/graph_planner.hpp"
#include "hrcplan/qlearning.hpp"
#include "hrcplan/random_htm.hpp"

namespace hrc {

struct BenchSuite {
  std::string scenario_name = "scenario";
  std::shared_ptr<const Htm> htm;
  ScenarioConfig scenario;
  std::vector<std::string> policies{"graph", "rl", "greedy", "random"};
  int trials = 1000;
  std::uint64_t seed = 0;
  int workers = 1;
  TrainConfig train;  // its seed is derived from the suite seed
  std::size_t graph_max_nodes = 1'000'000;     // exhaustive graph budget
  std::size_t bounded_max_states = 20'000'000;  // budget of the memoised fallback
  std::shared_ptr<const HumanModel> human = default_human();
};

struct BenchResult {
  std::string scenario;
  std::string policy;
  int trials = 0;
  double mean = 0.0;
  double std = 0.0;
  std::vector<EpisodeRecord> records;

  std::string cell() const;
};

/// "graph" solves the decision graph (exhaustive within graph_max_nodes,
/// otherwise the bounded solver); "rl" trains a Q-table. Throws ConfigError for
/// unknown names and for "graph" on scenarios with failures or changes of mind.
std::shared_ptr<const Policy> make_policy(const std::string& name, const BenchSuite& suite);

/// Graph policy for a deterministic-outcome scenario.
std::shared_ptr<const TabularPolicy> plan_graph_policy(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario,
                                                       std::size_t max_nodes, std::size_t bounded_max_states,
                                                       std::shared_ptr<const HumanModel> human = default_human());

std::vector<BenchResult> run_benchmark(const BenchSuite& suite);

/// scenario,policy,trial,seed,steps,n_events,n_changes,n_failures
std::string bench_csv(const std::vector<BenchResult>& results, bool header = true);
std::string bench_json(const std::vector<BenchResult>& results);

/// Rows are policies, columns scenarios (in first-seen order); cells "mean [std]".
/// With `scenarios_as_rows` the table is transposed.
std::string summarize(const std::vector<BenchResult>& results, bool scenarios_as_rows = false);

}  // namespace hrc
