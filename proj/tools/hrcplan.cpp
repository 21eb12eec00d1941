#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "hrcplan/bench.hpp"
#include "hrcplan/intent.hpp"
#include "server.hpp"

namespace {

using namespace hrc;

struct Source {
  std::vector<std::string> htm_files;
  bool chair = false;
  std::vector<std::string> random;  // "n,seed"
  std::string scenario_file;
};

struct Named {
  std::string name;
  std::shared_ptr<const Htm> htm;
};

void add_source_options(CLI::App* cmd, Source& src, bool many) {
  auto* h = cmd->add_option("--htm", src.htm_files, "HTM document (JSON)");
  auto* r = cmd->add_option("--random", src.random, "random HTM as n,seed");
  if (!many) {
    h->expected(1);
    r->expected(1);
  }
  cmd->add_option_function<std::string>(
      "--builtin",
      [&src](const std::string& name) {
        if (name != "chair") throw CLI::ValidationError("--builtin", "only 'chair' is built in");
        src.chair = true;
      },
      "built-in HTM (chair)");
  cmd->add_option("--scenario", src.scenario_file, "scenario document (JSON)")->check(CLI::ExistingFile);
}

std::vector<Named> load_sources(const Source& src) {
  std::vector<Named> out;
  if (src.chair) out.push_back({"chair", std::make_shared<const Htm>(chair_htm())});
  for (const auto& spec : src.random) {
    int n = 0;
    unsigned long long seed = 0;
    char tail = 0;
    if (std::sscanf(spec.c_str(), "%d,%llu%c", &n, &seed, &tail) != 2)
      throw ConfigError(fmt::format("--random expects n,seed (got '{}')", spec));
    out.push_back({fmt::format("n{}-s{}", n, seed), std::make_shared<const Htm>(generate_random_htm(n, seed))});
  }
  for (const auto& f : src.htm_files)
    out.push_back({std::filesystem::path(f).stem().string(), std::make_shared<const Htm>(load_htm(f))});
  if (out.empty()) out.push_back({"chair", std::make_shared<const Htm>(chair_htm())});
  return out;
}

ScenarioConfig load_scenario_opt(const Source& src) {
  return src.scenario_file.empty() ? ScenarioConfig{} : load_scenario(src.scenario_file);
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::shared_ptr<const Policy> policy_from(const std::string& name, const std::string& load_file, const Named& task,
                                          const ScenarioConfig& sc, std::uint64_t seed, long episodes,
                                          std::size_t max_nodes) {
  if (!load_file.empty()) {
    const std::string text = read_text(load_file);
    if (name == "graph") return std::make_shared<const TabularPolicy>(TabularPolicy::from_json(text));
    if (name == "rl") return std::make_shared<const QPolicy>(std::make_shared<const QTable>(QTable::from_json(text)));
    throw ConfigError("--load applies to the graph and rl policies only");
  }
  BenchSuite suite;
  suite.scenario_name = task.name;
  suite.htm = task.htm;
  suite.scenario = sc;
  suite.seed = seed;
  suite.train.episodes = episodes;
  suite.graph_max_nodes = max_nodes;
  return make_policy(name, suite);
}

CLI::Validator policy_names() { return CLI::IsMember({"graph", "rl", "greedy", "random"}); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-robot collaborative task scheduling: simulation, planning, learning and benchmarking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "hrcplan 0.1.0");

  // simulate
  Source sim_src;
  std::string sim_policy = "greedy", sim_load, sim_out;
  std::uint64_t sim_seed = 0;
  long sim_episodes = 200'000;
  auto* sim = app.add_subcommand("simulate", "run one episode and print its event trace (JSON lines)");
  add_source_options(sim, sim_src, false);
  sim->add_option("--policy", sim_policy, "robot policy")->check(policy_names());
  sim->add_option("--load", sim_load, "policy file written by solve-graph --export or train --checkpoint");
  sim->add_option("--seed", sim_seed, "episode seed");
  sim->add_option("--episodes", sim_episodes, "training episodes when --policy rl is trained on the fly");
  sim->add_option("--out", sim_out, "trace file (default stdout)");

  // solve-graph
  Source sg_src;
  std::string sg_export, sg_format = "json";
  std::size_t sg_max = 2'000'000;
  bool sg_optimistic = false, sg_bounded = false;
  auto* sg = app.add_subcommand("solve-graph", "enumerate the decision graph and solve it by backward induction");
  add_source_options(sg, sg_src, false);
  sg->add_option("--max-nodes", sg_max, "decision-point budget");
  sg->add_flag("--optimistic", sg_optimistic, "best case over human choices instead of the expectation");
  sg->add_flag("--bounded", sg_bounded, "memoised solve with work-bound pruning instead of full enumeration");
  sg->add_option("--export", sg_export, "write the policy table (JSON)");
  sg->add_option("--format", sg_format, "report format")->check(CLI::IsMember({"json", "table"}));

  // train
  Source tr_src;
  TrainConfig tr_cfg;
  std::string tr_checkpoint, tr_curve, tr_schedule = "constant";
  int tr_trials = 1000;
  auto* tr = app.add_subcommand("train", "masked tabular Q-learning");
  add_source_options(tr, tr_src, false);
  tr->add_option("--episodes", tr_cfg.episodes, "training episodes");
  tr->add_option("--lr", tr_cfg.lr, "learning rate");
  tr->add_option("--lr-schedule", tr_schedule, "constant or visits")->check(CLI::IsMember({"constant", "visits"}));
  tr->add_option("--eps-start", tr_cfg.eps_start, "initial exploration rate");
  tr->add_option("--eps-end", tr_cfg.eps_end, "final exploration rate");
  tr->add_option("--eval-interval", tr_cfg.eval_interval, "episodes between curve points (0: none)");
  tr->add_option("--eval-episodes", tr_cfg.eval_episodes, "episodes per curve point");
  tr->add_option("--seed", tr_cfg.seed, "training seed");
  tr->add_option("--trials", tr_trials, "evaluation episodes after training");
  tr->add_option("--checkpoint", tr_checkpoint, "write the Q-table (JSON)");
  tr->add_option("--curve", tr_curve, "write the training curve (CSV)");

  // bench
  Source b_src;
  std::vector<std::string> b_policies{"graph", "rl", "greedy", "random"};
  int b_trials = 1000, b_workers = 1;
  std::uint64_t b_seed = 0;
  long b_episodes = 200'000;
  std::size_t b_max = 1'000'000;
  std::string b_out, b_format = "table", b_sweep;
  std::vector<double> b_values{0.1, 0.2, 0.3, 0.4};
  bool b_keep_going = false;
  auto* b = app.add_subcommand("bench", "Monte-Carlo comparison of policies");
  add_source_options(b, b_src, true);
  b->add_option("--policy", b_policies, "policies to run")->check(policy_names());
  b->add_option("--trials", b_trials, "episodes per policy and scenario");
  b->add_option("--seed", b_seed, "suite seed");
  b->add_option("--workers", b_workers, "evaluation threads (0: all cores)");
  b->add_option("--episodes", b_episodes, "Q-learning episodes for the rl policy");
  b->add_option("--max-nodes", b_max, "decision-graph budget for the graph policy");
  b->add_option("--sweep", b_sweep, "sweep p_change or p_fail")->check(CLI::IsMember({"p_change", "p_fail"}));
  b->add_option("--values", b_values, "sweep values")->delimiter(',');
  b->add_flag("--keep-going", b_keep_going, "skip a policy that is refused or over budget instead of failing");
  b->add_option("--out", b_out, "per-trial CSV file");
  b->add_option("--format", b_format, "stdout format")->check(CLI::IsMember({"table", "csv", "json"}));

  // intent-demo
  Source id_src;
  std::string id_goals, id_format = "table";
  int id_goal = 1, id_switch_goal = 0, id_switch_at = -1;
  double id_noise = 0.05, id_speed = 0.25;
  std::uint64_t id_seed = 0;
  auto* idm = app.add_subcommand("intent-demo", "filter a synthetic hand trajectory over the task goals");
  add_source_options(idm, id_src, false);
  idm->add_option("--goals", id_goals, "goal set document (JSON); default: goals laid out for the HTM");
  idm->add_option("--goal", id_goal, "true goal id");
  idm->add_option("--switch-at", id_switch_at, "step at which the hand turns to --switch-goal");
  idm->add_option("--switch-goal", id_switch_goal, "goal after the switch");
  idm->add_option("--noise", id_noise, "observation noise std (m)");
  idm->add_option("--speed", id_speed, "hand speed (m/step)");
  idm->add_option("--seed", id_seed, "noise seed");
  idm->add_option("--format", id_format, "output format")->check(CLI::IsMember({"table", "csv", "json"}));

  // gen-htm
  int g_n = 8;
  std::uint64_t g_seed = 0;
  std::string g_out;
  auto* gen = app.add_subcommand("gen-htm", "write a random HTM document");
  gen->add_option("--n", g_n, "number of actions (multiple of 4)");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--out", g_out, "output file (default stdout)");

  // serve
  ServerOptions srv;
  auto* serve = app.add_subcommand("serve", "interactive sandbox server (HTTP + WebSocket)");
  serve->add_option("--address", srv.address, "listen address");
  serve->add_option("--port", srv.port, "listen port (0: any free port)");
  serve->add_option("--static", srv.static_dir, "UI bundle directory served under /");
  serve->add_option("--rl-episodes", srv.manager.rl_episodes, "training episodes for rl sessions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) {
      const auto task = load_sources(sim_src).front();
      const ScenarioConfig sc = load_scenario_opt(sim_src);
      const auto policy = policy_from(sim_policy, sim_load, task, sc, sim_seed, sim_episodes, 2'000'000);
      Environment env(task.htm, sc);
      std::string trace;
      long k = 0;
      env.set_observer([&](const EventRecord& ev, const Engine& e) {
        trace += trace_record_json(k++, ev, e.state()) + "\n";
      });
      const EpisodeRecord rec = run_episode(*policy, env, sim_seed);
      write_text(sim_out, trace);
      std::cerr << fmt::format("{} {}: makespan {} steps, {} events, {} changes, {} failures\n", task.name,
                               policy->name(), rec.steps, rec.n_events, rec.n_changes, rec.n_failures);
    } else if (*sg) {
      const auto task = load_sources(sg_src).front();
      const ScenarioConfig sc = load_scenario_opt(sg_src);
      std::optional<TabularPolicy> policy;
      nlohmann::json report;
      if (sg_bounded) {
        BoundedSolveOptions opts;
        opts.max_states = sg_max;
        const BoundedSolution sol = solve_bounded(task.htm, sc, opts);
        policy.emplace(sol);
        report = {{"scenario", task.name},        {"solver", "bounded"},
                  {"states", sol.stats.states},   {"actions_solved", sol.stats.actions_solved},
                  {"actions_pruned", sol.stats.actions_pruned}, {"seconds", sol.stats.seconds},
                  {"root_value", sol.root_value}};
      } else {
        GraphBuildOptions opts;
        opts.max_nodes = sg_max;
        const DecisionGraph g = build_graph(task.htm, sc, opts);
        const GraphSolution sol = solve(g, sg_optimistic ? ChanceMode::Optimistic : ChanceMode::Expectation);
        policy.emplace(g, sol);
        report = {{"scenario", task.name},
                  {"solver", sg_optimistic ? "optimistic" : "expectation"},
                  {"nodes", g.stats.nodes},
                  {"edges", g.stats.edges},
                  {"branches", g.stats.branches},
                  {"build_seconds", g.stats.build_seconds},
                  {"root_value", sol.root_value},
                  {"bellman_residual", bellman_residual(g, sol)}};
      }
      if (!sg_export.empty()) write_text(sg_export, policy->to_json());
      if (sg_format == "json") {
        std::cout << report.dump(2) << "\n";
      } else {
        for (const auto& [key, value] : report.items()) std::cout << fmt::format("{:<18} {}\n", key, value.dump());
      }
    } else if (*tr) {
      const auto task = load_sources(tr_src).front();
      const ScenarioConfig sc = load_scenario_opt(tr_src);
      tr_cfg.lr_schedule = tr_schedule == "visits" ? LearningRate::Visits : LearningRate::Constant;
      Environment env(task.htm, sc);
      const TrainResult res = train(env, tr_cfg);
      if (!tr_checkpoint.empty()) write_text(tr_checkpoint, res.table.to_json());
      if (!tr_curve.empty()) write_text(tr_curve, curve_csv(res.curve));
      const QPolicy policy(std::make_shared<const QTable>(res.table));
      const Stats st = evaluate(policy, task.htm, sc, tr_trials, derive_seed(tr_cfg.seed, 22));
      std::cout << fmt::format("{} rl: {} states, {} updates, evaluation over {} episodes {}\n", task.name,
                               res.table.size(), res.updates, tr_trials, st.cell());
    } else if (*b) {
      const ScenarioConfig base = load_scenario_opt(b_src);
      std::vector<BenchResult> results;
      bool sweeping = !b_sweep.empty();
      for (const auto& task : load_sources(b_src)) {
        std::vector<std::pair<std::string, ScenarioConfig>> cells;
        if (sweeping) {
          for (double v : b_values) {
            ScenarioConfig sc = base;
            (b_sweep == "p_change" ? sc.p_change : sc.p_fail.emplace()) = v;
            cells.emplace_back(fmt::format("{} {}={}", task.name, b_sweep, v), sc);
          }
        } else {
          cells.emplace_back(task.name, base);
        }
        for (const auto& [name, sc] : cells) {
          for (const auto& policy : b_policies) {
            BenchSuite suite;
            suite.scenario_name = name;
            suite.htm = task.htm;
            suite.scenario = sc;
            suite.policies = {policy};
            suite.trials = b_trials;
            suite.seed = b_seed;
            suite.workers = b_workers;
            suite.train.episodes = b_episodes;
            suite.graph_max_nodes = b_max;
            try {
              for (auto& r : run_benchmark(suite)) results.push_back(std::move(r));
            } catch (const std::runtime_error& e) {
              if (!b_keep_going) throw;
              std::cerr << fmt::format("skipping {} on {}: {}\n", policy, name, e.what());
            }
          }
        }
      }
      if (!b_out.empty()) write_text(b_out, bench_csv(results));
      if (b_format == "csv") {
        std::cout << bench_csv(results);
      } else if (b_format == "json") {
        std::cout << bench_json(results);
      } else {
        std::cout << summarize(results, sweeping);
      }
    } else if (*idm) {
      const auto task = load_sources(id_src).front();
      const GoalSet goals = id_goals.empty() ? goals_for(*task.htm) : load_goals(id_goals);
      goals.validate();
      TrajectoryOptions topts;
      topts.noise_std = id_noise;
      topts.speed = id_speed;
      if (id_switch_at >= 0) {
        topts.switch_at = id_switch_at;
        topts.switch_goal = id_switch_goal;
      }
      Rng rng(derive_seed(id_seed, 0x1d));
      const auto obs = simulate_trajectory(Point{0.0, 0.0, 0.0}, id_goal, goals, topts, rng);
      const auto beliefs = run_filter(obs, goals, Belief::uniform(goals.size()));
      nlohmann::json rows = nlohmann::json::array();
      std::string text;
      if (id_format == "csv") {
        text = "t,map";
        for (const auto& g : goals.goals) text += fmt::format(",p{}", g.id);
        text += "\n";
      }
      for (std::size_t i = 0; i < beliefs.size(); ++i) {
        const auto& bel = beliefs[i].belief;
        const int map = map_goal(bel, goals);
        if (id_format == "json") {
          rows.push_back({{"t", obs[i].t}, {"map", map}, {"belief", bel.probs}, {"degenerate", beliefs[i].degenerate}});
        } else if (id_format == "csv") {
          text += fmt::format("{},{},{:.6f}\n", obs[i].t, map, fmt::join(bel.probs, ","));
        } else {
          text += fmt::format("t={:<4} map={:<3} {:.3f}\n", obs[i].t, map, fmt::join(bel.probs, " "));
        }
      }
      std::cout << (id_format == "json" ? rows.dump(2) + "\n" : text);
    } else if (*gen) {
      write_text(g_out, to_json(generate_random_htm(g_n, g_seed)) + "\n");
    } else if (*serve) {
      SandboxServer server(srv);
      static SandboxServer* active = nullptr;
      active = &server;
      std::signal(SIGINT, [](int) {
        if (active) active->stop();
      });
      std::signal(SIGTERM, [](int) {
        if (active) active->stop();
      });
      std::cout << fmt::format("listening on http://{}:{}", srv.address, server.port()) << std::endl;
      server.run();
      active = nullptr;
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget exceeded: " << e.what() << " (reached " << e.reached() << ")\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
