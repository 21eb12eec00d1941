#include "hrcplan/graph_planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <unordered_map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hrcplan/state_key.hpp"

namespace hrc {

namespace {

constexpr double kTieTol = 1e-9;

struct Builder {
  std::shared_ptr<const Htm> htm;
  const GraphBuildOptions& opts;
  DecisionGraph& g;
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::pair<std::uint32_t, Engine>> frontier;
  NominalSampler nominal;

  std::uint32_t intern(const Engine& e) {
    std::string key = graph_key(e);
    auto [it, inserted] = index.try_emplace(key, static_cast<std::uint32_t>(g.nodes.size()));
    if (inserted) {
      if (g.nodes.size() >= opts.max_nodes)
        throw BudgetExceeded(fmt::format("decision graph exceeds {} nodes", opts.max_nodes), g.nodes.size());
      g.nodes.push_back(GraphNode{std::move(key), e.state().detected, {}});
      frontier.emplace_back(it->second, e);
    }
    return it->second;
  }

  // Advances to the next robot decision, branching on human choices.
  void settle(Engine e, long start, double prob, std::vector<Branch>& out) {
    for (;;) {
      const Pending p = e.advance();
      if (p == Pending::Done) {
        out.push_back({DecisionGraph::kTerminal, static_cast<int>(e.clock() - start), prob});
        return;
      }
      if (p == Pending::Robot) {
        // A forced choice is not a decision; fold it into the transition.
        const auto options = e.robot_options();
        if (options.size() == 1) {
          e.choose_robot(options.front(), nominal);
          continue;
        }
        out.push_back({intern(e), static_cast<int>(e.clock() - start), prob});
        return;
      }
      const auto dist = opts.human->distribution(e);
      if (dist.size() == 1) {
        e.choose_human(dist.front().first, nominal);
        continue;
      }
      for (const auto& [choice, q] : dist) {
        Engine next = e;
        next.choose_human(choice, nominal);
        settle(std::move(next), start, prob * q, out);
      }
      return;
    }
  }

  static std::vector<Branch> merge(std::vector<Branch> v) {
    std::sort(v.begin(), v.end(), [](const Branch& a, const Branch& b) {
      return a.target != b.target ? a.target < b.target : a.dt < b.dt;
    });
    std::vector<Branch> out;
    for (const auto& b : v) {
      if (!out.empty() && out.back().target == b.target && out.back().dt == b.dt) out.back().prob += b.prob;
      else out.push_back(b);
    }
    return out;
  }
};

}  // namespace

std::string graph_key(const Engine& engine) {
  const WorldState& s = engine.state();
  std::string key = encode_state(s);
  if (!s.detected) {
    const auto choice = static_cast<std::uint16_t>(static_cast<std::int16_t>(engine.hidden().human_choice));
    key.push_back(static_cast<char>(choice & 0xff));
    key.push_back(static_cast<char>(choice >> 8));
    key.push_back(static_cast<char>(engine.hidden().joint_pending ? 1 : 0));
  }
  return key;
}

DecisionGraph build_graph(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario,
                          const GraphBuildOptions& opts) {
  if (scenario.has_stochastic_events(*htm))
    throw ConfigError("the decision graph requires p_fail = 0 and p_change = 0");
  const auto t0 = std::chrono::steady_clock::now();
  DecisionGraph g;
  Builder b{htm, opts, g, {}, {}, {}};
  Engine e(htm, scenario);
  std::vector<Branch> root;
  b.settle(e, 0, 1.0, root);
  g.root = Builder::merge(std::move(root));

  while (!b.frontier.empty()) {
    auto [id, engine] = std::move(b.frontier.back());
    b.frontier.pop_back();
    auto options = engine.robot_options();
    std::sort(options.begin(), options.end());
    std::vector<Edge> edges;
    for (ActionId a : options) {
      Engine next = engine;
      next.choose_robot(a, b.nominal);
      std::vector<Branch> out;
      b.settle(std::move(next), engine.clock(), 1.0, out);
      edges.push_back(Edge{a, Builder::merge(std::move(out))});
    }
    g.nodes[id].edges = std::move(edges);
  }

  g.stats.nodes = g.nodes.size();
  for (const auto& n : g.nodes) {
    g.stats.edges += n.edges.size();
    for (const auto& e2 : n.edges) g.stats.branches += e2.outcomes.size();
  }
  g.stats.build_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return g;
}

namespace {

double branch_value(const std::vector<Branch>& outcomes, const std::vector<double>& value, ChanceMode mode) {
  if (mode == ChanceMode::Optimistic) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& b : outcomes) {
      best = std::min(best, b.dt + (b.target == DecisionGraph::kTerminal ? 0.0 : value[b.target]));
    }
    return best;
  }
  double q = 0.0;
  for (const auto& b : outcomes) {
    q += b.prob * (b.dt + (b.target == DecisionGraph::kTerminal ? 0.0 : value[b.target]));
  }
  return q;
}

}  // namespace

GraphSolution solve(const DecisionGraph& graph, ChanceMode mode) {
  const std::size_t n = graph.nodes.size();
  GraphSolution sol;
  sol.mode = mode;
  sol.value.assign(n, 0.0);
  sol.best.assign(n, kIdle);
  std::vector<std::uint8_t> mark(n, 0);  // 0 new, 1 on stack, 2 solved

  // Iterative post-order so deep graphs cannot overflow the call stack.
  std::vector<std::pair<std::uint32_t, std::size_t>> stack;
  auto finish = [&](std::uint32_t id) {
    const auto& node = graph.nodes[id];
    double best = std::numeric_limits<double>::infinity();
    ActionId arg = kIdle;
    std::vector<double> q(node.edges.size());
    for (std::size_t i = 0; i < node.edges.size(); ++i) {
      q[i] = branch_value(node.edges[i].outcomes, sol.value, mode);
      best = std::min(best, q[i]);
    }
    for (std::size_t i = 0; i < node.edges.size(); ++i) {
      if (q[i] <= best + kTieTol) {
        arg = node.edges[i].action;  // edges are in ascending id order
        break;
      }
    }
    sol.value[id] = best;
    sol.best[id] = arg;
    mark[id] = 2;
  };
  for (std::uint32_t start = 0; start < n; ++start) {
    if (mark[start]) continue;
    stack.emplace_back(start, 0);
    mark[start] = 1;
    while (!stack.empty()) {
      auto& [id, cursor] = stack.back();
      const auto& node = graph.nodes[id];
      // Walk the flattened successor list: edge by edge, branch by branch.
      bool pushed = false;
      std::size_t flat = 0;
      for (const auto& e : node.edges) {
        for (const auto& b : e.outcomes) {
          if (flat++ < cursor) continue;
          ++cursor;
          if (b.target == DecisionGraph::kTerminal || mark[b.target] == 2) continue;
          if (mark[b.target] == 1) throw std::logic_error("decision graph contains a cycle");
          mark[b.target] = 1;
          stack.emplace_back(b.target, 0);
          pushed = true;
          break;
        }
        if (pushed) break;
      }
      if (!pushed) {
        finish(id);
        stack.pop_back();
      }
    }
  }
  sol.root_value = branch_value(graph.root, sol.value, mode);
  return sol;
}

double bellman_residual(const DecisionGraph& graph, const GraphSolution& sol) {
  double worst = 0.0;
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& e : graph.nodes[i].edges) best = std::min(best, branch_value(e.outcomes, sol.value, sol.mode));
    worst = std::max(worst, std::abs(best - sol.value[i]));
  }
  return worst;
}

TabularPolicy::TabularPolicy(const DecisionGraph& graph, const GraphSolution& sol) : root_value_(sol.root_value) {
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    // Undetected nodes carry the hidden choice in their key; the robot idles there.
    if (!graph.nodes[i].detected) continue;
    table_.emplace(graph.nodes[i].key, sol.best[i]);
    values_.emplace(graph.nodes[i].key, sol.value[i]);
  }
}

double remaining_work_bound(const Engine& engine) {
  const Htm& htm = engine.htm();
  const WorldState& s = engine.state();
  const HiddenState& h = engine.hidden();
  double robot = 0.0, human = 0.0, total = 0.0;
  const ActionId current = h.human_choice;
  const bool individual = current != kIdle && !htm.action(current).is_joint();
  if (individual) {
    const double residual = std::max(0, h.human_duration - s.t_h);
    human += residual;
    total += residual;
  }
  for (ActionId a = 1; a <= static_cast<ActionId>(htm.size()); ++a) {
    if (s.task[a] == TaskState::kDone) continue;
    if (individual && htm.base_of(current) == a) continue;
    const ActionId id = s.task[a] == TaskState::kFailed ? htm.recovery_for(a) : a;
    const ActionSpec& spec = htm.action(id);
    switch (spec.capability) {
      case Capability::RobotOnly:
        robot += spec.duration_r;
        total += spec.duration_r;
        break;
      case Capability::HumanOnly:
        human += spec.duration_h;
        total += spec.duration_h;
        break;
      case Capability::Joint:
        robot += spec.duration_r;
        human += spec.duration_r;
        total += 2.0 * spec.duration_r;
        break;
      case Capability::Either:
        total += std::min(spec.duration_h, spec.duration_r);
        break;
    }
  }
  return std::max({robot, human, total / 2.0});
}

namespace {

struct Successor {
  Engine engine;  // at a decision point, unless terminal
  bool terminal;
  int dt;
  double prob;
};

struct BoundedSolver {
  const BoundedSolveOptions& opts;
  BoundedSolution& out;
  NominalSampler nominal;

  void settle(Engine e, long start, double prob, std::vector<Successor>& acc) {
    for (;;) {
      const Pending p = e.advance();
      if (p == Pending::Done) {
        const int dt = static_cast<int>(e.clock() - start);
        acc.push_back({std::move(e), true, dt, prob});
        return;
      }
      if (p == Pending::Robot) {
        const auto options = e.robot_options();
        if (options.size() == 1) {
          e.choose_robot(options.front(), nominal);
          continue;
        }
        const int dt = static_cast<int>(e.clock() - start);
        acc.push_back({std::move(e), false, dt, prob});
        return;
      }
      const auto dist = opts.human->distribution(e);
      if (dist.size() == 1) {
        e.choose_human(dist.front().first, nominal);
        continue;
      }
      for (const auto& [choice, q] : dist) {
        Engine next = e;
        next.choose_human(choice, nominal);
        settle(std::move(next), start, prob * q, acc);
      }
      return;
    }
  }

  double expected(std::vector<Successor>& succ) {
    double q = 0.0;
    for (auto& s : succ) q += s.prob * (s.dt + (s.terminal ? 0.0 : value(s.engine)));
    return q;
  }

  double value(const Engine& e) {
    const std::string key = graph_key(e);
    if (auto it = out.table.find(key); it != out.table.end()) return it->second.first;

    auto options = e.robot_options();
    std::sort(options.begin(), options.end());
    struct Candidate {
      ActionId action;
      std::vector<Successor> succ;
      double bound;
    };
    std::vector<Candidate> cands;
    for (ActionId a : options) {
      Engine next = e;
      next.choose_robot(a, nominal);
      Candidate c{a, {}, 0.0};
      settle(std::move(next), e.clock(), 1.0, c.succ);
      for (const auto& s : c.succ) {
        double lb = 0.0;
        if (!s.terminal) {
          auto it = out.table.find(graph_key(s.engine));
          lb = it != out.table.end() ? it->second.first : remaining_work_bound(s.engine);
        }
        c.bound += s.prob * (s.dt + lb);
      }
      cands.push_back(std::move(c));
    }
    // Most promising first so later candidates meet a tight incumbent.
    std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.bound < b.bound; });
    // A candidate whose bound exceeds the running minimum can neither lower
    // the minimum nor fall within the tie tolerance of the final one.
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::pair<ActionId, double>> solved;
    for (auto& c : cands) {
      if (c.bound > best + kTieTol) {
        ++out.stats.actions_pruned;
        continue;
      }
      const double q = expected(c.succ);
      ++out.stats.actions_solved;
      solved.emplace_back(c.action, q);
      best = std::min(best, q);
    }
    ActionId arg = std::numeric_limits<ActionId>::max();
    for (const auto& [a, q] : solved) {
      if (q <= best + kTieTol) arg = std::min(arg, a);
    }
    if (out.table.size() >= opts.max_states)
      throw BudgetExceeded(fmt::format("bounded solve exceeds {} states", opts.max_states), out.table.size());
    out.table.emplace(key, std::make_pair(best, arg));
    return best;
  }
};

}  // namespace

BoundedSolution solve_bounded(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario,
                              const BoundedSolveOptions& opts) {
  if (scenario.has_stochastic_events(*htm))
    throw ConfigError("the decision graph requires p_fail = 0 and p_change = 0");
  const auto t0 = std::chrono::steady_clock::now();
  BoundedSolution out;
  BoundedSolver solver{opts, out, {}};
  std::vector<Successor> root;
  solver.settle(Engine(htm, scenario), 0, 1.0, root);
  out.root_value = solver.expected(root);
  out.stats.states = out.table.size();
  out.stats.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

TabularPolicy::TabularPolicy(const BoundedSolution& sol) : root_value_(sol.root_value) {
  for (const auto& [key, va] : sol.table) {
    table_.emplace(key, va.second);
    values_.emplace(key, va.first);
  }
}

TabularPolicy::TabularPolicy(const TabularPolicy& other)
    : table_(other.table_), values_(other.values_), root_value_(other.root_value_), misses_(other.misses_.load()) {}

std::optional<ActionId> TabularPolicy::lookup(const WorldState& s) const {
  auto it = table_.find(encode_state(s));
  if (it == table_.end()) return std::nullopt;
  return it->second;
}

std::optional<double> TabularPolicy::value(const WorldState& s) const {
  auto it = values_.find(encode_state(s));
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

ActionId TabularPolicy::act(const Htm& htm, const WorldState& s, std::span<const ActionId> feasible, Rng& rng) const {
  if (feasible.size() == 1) return feasible.front();
  if (auto a = lookup(s); a && std::find(feasible.begin(), feasible.end(), *a) != feasible.end()) return *a;
  ++misses_;
  return GreedyPolicy().act(htm, s, feasible, rng);
}

std::string TabularPolicy::to_json() const {
  nlohmann::json actions = nlohmann::json::object();
  nlohmann::json values = nlohmann::json::object();
  // Sorted output keeps exports byte-stable.
  std::map<std::string, std::string> readable;
  for (const auto& [k, a] : table_) readable.emplace(describe_key(k), k);
  for (const auto& [text, k] : readable) {
    actions[text] = table_.at(k);
    values[text] = values_.at(k);
  }
  nlohmann::json j{{"kind", "graph_policy"}, {"root_value", root_value_}, {"actions", actions}, {"values", values}};
  return j.dump(1);
}

TabularPolicy TabularPolicy::from_json(std::string_view text) {
  TabularPolicy p;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("kind", "") != "graph_policy") throw ConfigError("not a graph policy document");
    p.root_value_ = j.value("root_value", 0.0);
    for (const auto& [k, v] : j.at("actions").items()) p.table_.emplace(parse_key(k), v.get<ActionId>());
    if (j.contains("values")) {
      for (const auto& [k, v] : j.at("values").items()) p.values_.emplace(parse_key(k), v.get<double>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("graph policy: {}", e.what()));
  }
  return p;
}

namespace {

struct Oracle {
  const HumanModel& human;
  int depth_cap;
  NominalSampler nominal;

  double run(Engine e, int depth) {
    const long start = e.clock();
    const Pending p = e.advance();
    const double dt = static_cast<double>(e.clock() - start);
    switch (p) {
      case Pending::Done:
        return dt;
      case Pending::Human: {
        double acc = 0.0;
        for (const auto& [choice, q] : human.distribution(e)) {
          Engine next = e;
          next.choose_human(choice, nominal);
          acc += q * run(std::move(next), depth);
        }
        return dt + acc;
      }
      case Pending::Robot: {
        if (depth >= depth_cap) throw BudgetExceeded("expectimax depth cap reached", static_cast<std::size_t>(depth));
        double best = std::numeric_limits<double>::infinity();
        for (ActionId a : e.robot_options()) {
          Engine next = e;
          next.choose_robot(a, nominal);
          best = std::min(best, run(std::move(next), depth + 1));
        }
        return dt + best;
      }
      case Pending::Event:
        break;
    }
    throw std::logic_error("unexpected engine state");
  }
};

}  // namespace

double expectimax_oracle(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario, const HumanModel& human,
                         int depth_cap) {
  if (!scenario.deterministic(*htm)) throw ConfigError("expectimax oracle requires the deterministic setting");
  Oracle o{human, depth_cap, {}};
  return o.run(Engine(htm, scenario), 0);
}

}  // namespace hrc
