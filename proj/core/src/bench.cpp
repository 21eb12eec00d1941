#include "hrcplan/bench.hpp"

#include <algorithm>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace hrc {

std::string BenchResult::cell() const { return fmt::format("{:.1f} [{:.1f}]", mean, std); }

std::shared_ptr<const TabularPolicy> plan_graph_policy(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario,
                                                       std::size_t max_nodes, std::size_t bounded_max_states,
                                                       std::shared_ptr<const HumanModel> human) {
  try {
    GraphBuildOptions opts;
    opts.max_nodes = max_nodes;
    opts.human = human;
    const DecisionGraph g = build_graph(htm, scenario, opts);
    return std::make_shared<const TabularPolicy>(g, solve(g));
  } catch (const BudgetExceeded&) {
    BoundedSolveOptions opts;
    opts.max_states = bounded_max_states;
    opts.human = human;
    return std::make_shared<const TabularPolicy>(solve_bounded(htm, scenario, opts));
  }
}

std::shared_ptr<const Policy> make_policy(const std::string& name, const BenchSuite& suite) {
  if (name == "greedy") return std::make_shared<const GreedyPolicy>();
  if (name == "random") return std::make_shared<const RandomPolicy>();
  if (name == "graph") {
    if (suite.scenario.has_stochastic_events(*suite.htm))
      throw ConfigError(fmt::format(
          "graph policy refused for scenario '{}': failures or changes of mind make the decision graph "
          "intractable; use the rl policy",
          suite.scenario_name));
    return plan_graph_policy(suite.htm, suite.scenario, suite.graph_max_nodes, suite.bounded_max_states, suite.human);
  }
  if (name == "rl") {
    Environment env(suite.htm, suite.scenario, suite.human);
    TrainConfig cfg = suite.train;
    cfg.seed = derive_seed(suite.seed, 31);
    auto table = std::make_shared<const QTable>(train(env, cfg).table);
    return std::make_shared<const QPolicy>(std::move(table));
  }
  throw ConfigError(fmt::format("unknown policy '{}' (expected graph, rl, greedy or random)", name));
}

std::vector<BenchResult> run_benchmark(const BenchSuite& suite) {
  if (suite.trials < 1) throw ConfigError("trials must be at least 1");
  if (!suite.htm) throw ConfigError("benchmark suite has no HTM");
  std::vector<BenchResult> out;
  for (const auto& name : suite.policies) {
    const auto policy = make_policy(name, suite);
    const Stats st = evaluate(*policy, suite.htm, suite.scenario, suite.trials, suite.seed,
                              EvalOptions{suite.workers, suite.human});
    out.push_back(BenchResult{suite.scenario_name, name, suite.trials, st.mean, st.std, st.episodes});
  }
  return out;
}

std::string bench_csv(const std::vector<BenchResult>& results, bool header) {
  std::string out = header ? "scenario,policy,trial,seed,steps,n_events,n_changes,n_failures\n" : "";
  for (const auto& r : results) {
    for (const auto& e : r.records) {
      out += fmt::format("{},{},{},{},{},{},{},{}\n", r.scenario, r.policy, e.trial, e.seed, e.steps, e.n_events,
                         e.n_changes, e.n_failures);
    }
  }
  return out;
}

std::string bench_json(const std::vector<BenchResult>& results) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : results) {
    arr.push_back({{"scenario", r.scenario},
                   {"policy", r.policy},
                   {"trials", r.trials},
                   {"mean", r.mean},
                   {"std", r.std},
                   {"cell", r.cell()}});
  }
  return arr.dump(2) + "\n";
}

std::string summarize(const std::vector<BenchResult>& results, bool scenarios_as_rows) {
  std::vector<std::string> rows, cols;
  std::map<std::pair<std::string, std::string>, std::string> cells;
  auto add = [](std::vector<std::string>& v, const std::string& s) {
    if (std::find(v.begin(), v.end(), s) == v.end()) v.push_back(s);
  };
  for (const auto& r : results) {
    const std::string& row = scenarios_as_rows ? r.scenario : r.policy;
    const std::string& col = scenarios_as_rows ? r.policy : r.scenario;
    add(rows, row);
    add(cols, col);
    cells[{row, col}] = r.cell();
  }
  const std::string corner = scenarios_as_rows ? "scenario" : "policy";
  std::size_t w0 = corner.size();
  for (const auto& r : rows) w0 = std::max(w0, r.size());
  std::vector<std::size_t> widths;
  for (const auto& c : cols) {
    std::size_t w = c.size();
    for (const auto& r : rows) {
      auto it = cells.find({r, c});
      if (it != cells.end()) w = std::max(w, it->second.size());
    }
    widths.push_back(w);
  }
  std::string out = fmt::format("{:<{}}", corner, w0);
  for (std::size_t i = 0; i < cols.size(); ++i) out += fmt::format(" | {:<{}}", cols[i], widths[i]);
  out += "\n";
  out += std::string(w0, '-');
  for (std::size_t w : widths) out += "-+-" + std::string(w, '-');
  out += "\n";
  for (const auto& r : rows) {
    out += fmt::format("{:<{}}", r, w0);
    for (std::size_t i = 0; i < cols.size(); ++i) {
      auto it = cells.find({r, cols[i]});
      out += fmt::format(" | {:<{}}", it == cells.end() ? "-" : it->second, widths[i]);
    }
    out += "\n";
  }
  return out;
}

}  // namespace hrc
