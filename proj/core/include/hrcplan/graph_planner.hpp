#pragma once

#include <atomic>
#include <cstdint>
#include <limits>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "hrcplan/engine.hpp"
#include "hrcplan/human.hpp"
#include "hrcplan/policy.hpp"

namespace hrc {

struct Branch {
  std::uint32_t target = 0;  // node index or DecisionGraph::kTerminal
  int dt = 0;
  double prob = 0.0;
};

struct Edge {
  ActionId action = kIdle;
  std::vector<Branch> outcomes;  // sorted by (target, dt), probabilities sum to 1
};

struct GraphNode {
  std::string key;  // observable key, plus the hidden human choice while undetected
  bool detected = false;
  std::vector<Edge> edges;  // one per feasible robot action, ascending id
};

struct GraphStats {
  std::size_t nodes = 0;
  std::size_t edges = 0;
  std::size_t branches = 0;
  double build_seconds = 0.0;
};

/// Robot decision points with at least two options, reachable under nominal
/// durations. Human choices and forced robot choices are folded into the
/// successor distributions.
class DecisionGraph {
 public:
  static constexpr std::uint32_t kTerminal = std::numeric_limits<std::uint32_t>::max();

  std::vector<GraphNode> nodes;
  std::vector<Branch> root;  // from reset (initial human choice) to the first decision
  GraphStats stats;
};

struct GraphBuildOptions {
  std::size_t max_nodes = 2'000'000;
  std::shared_ptr<const HumanModel> human = default_human();
};

/// Planner key of an engine at a robot decision point.
std::string graph_key(const Engine& engine);

/// Throws ConfigError when failures or changes of mind are possible and
/// BudgetExceeded once more than max_nodes decision points are found.
DecisionGraph build_graph(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario,
                          const GraphBuildOptions& opts = {});

enum class ChanceMode : std::uint8_t {
  Expectation,  // expected makespan over human choices
  Optimistic,   // best case over human choices (plain shortest path)
};

struct GraphSolution {
  ChanceMode mode = ChanceMode::Expectation;
  std::vector<double> value;     // expected remaining steps per node
  std::vector<ActionId> best;    // argmin action per node
  double root_value = 0.0;
};

/// Backward induction; ties within 1e-9 go to the lowest action id.
/// Throws std::logic_error on a cycle.
GraphSolution solve(const DecisionGraph& graph, ChanceMode mode = ChanceMode::Expectation);

/// Max |V(n) - min_a Q(n, a)| over all nodes.
double bellman_residual(const DecisionGraph& graph, const GraphSolution& sol);

/// Admissible lower bound on the remaining makespan at a decision point with
/// the human action detected: the larger of the robot's required work, the
/// human's required work (including the residual of its current action) and
/// half of the total agent-time still needed.
double remaining_work_bound(const Engine& engine);

struct BoundedSolveOptions {
  std::size_t max_states = 20'000'000;
  std::shared_ptr<const HumanModel> human = default_human();
};

struct BoundedSolveStats {
  std::size_t states = 0;          // decision points solved exactly
  std::size_t actions_solved = 0;  // robot actions whose expectation was computed
  std::size_t actions_pruned = 0;  // skipped because their lower bound cannot win
  double seconds = 0.0;
};

/// Values and argmin actions of the decision points solved by solve_bounded.
struct BoundedSolution {
  double root_value = 0.0;
  std::unordered_map<std::string, std::pair<double, ActionId>> table;
  BoundedSolveStats stats;
};

/// Same decision states, value and tie rule as build_graph + solve, computed
/// depth-first with memoisation. A robot action is skipped when the expected
/// lower bound of its successors already rules it out, so only part of the
/// graph is visited; every state reachable under the optimal policy is solved
/// exactly. Throws BudgetExceeded past max_states.
BoundedSolution solve_bounded(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario,
                              const BoundedSolveOptions& opts = {});

/// Lookup-table robot policy. Forced choices are taken directly; states missing
/// from the table fall back to the greedy rule (counted in misses()).
class TabularPolicy final : public Policy {
 public:
  TabularPolicy() = default;
  TabularPolicy(const DecisionGraph& graph, const GraphSolution& sol);
  explicit TabularPolicy(const BoundedSolution& sol);
  TabularPolicy(const TabularPolicy& other);

  std::string name() const override { return "graph"; }
  ActionId act(const Htm& htm, const WorldState& s, std::span<const ActionId> feasible, Rng& rng) const override;

  std::size_t size() const noexcept { return table_.size(); }
  double root_value() const noexcept { return root_value_; }
  std::optional<ActionId> lookup(const WorldState& s) const;
  std::optional<double> value(const WorldState& s) const;
  long misses() const noexcept { return misses_.load(); }

  std::string to_json() const;
  static TabularPolicy from_json(std::string_view text);

 private:
  std::unordered_map<std::string, ActionId> table_;
  std::unordered_map<std::string, double> values_;
  double root_value_ = 0.0;
  mutable std::atomic<long> misses_{0};
};

/// Brute-force expected optimal makespan: min over robot actions and
/// expectation over human choices by recursion on engine copies, without
/// sharing states. For tiny tasks only; throws BudgetExceeded past depth_cap
/// robot decisions.
double expectimax_oracle(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario, const HumanModel& human,
                         int depth_cap = 64);

}  // namespace hrc
