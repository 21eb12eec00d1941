// Acceptance runner: one PASS/FAIL line per criterion.
// Exit status is non-zero when a criterion fails that is not listed in
// --expected-failures, or when a criterion cannot be run at all.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "demdp_properties.hpp"
#include "hrcplan/bench.hpp"
#include "hrcplan/intent.hpp"
#include "tiny_htm.hpp"

using namespace hrc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  std::string name;
  std::function<Outcome()> run;
};

ScenarioConfig deterministic() {
  ScenarioConfig sc;
  sc.duration_cv = 0.0;
  sc.p_fail = 0.0;
  sc.p_change = 0.0;
  return sc;
}

struct Task {
  std::string name;
  std::shared_ptr<const Htm> htm;
};

Task chair() { return {"chair", std::make_shared<const Htm>(chair_htm())}; }
Task random_task(int n, std::uint64_t seed) {
  return {fmt::format("n{}-s{}", n, seed), std::make_shared<const Htm>(generate_random_htm(n, seed))};
}

constexpr int kTrials = 1000;
constexpr std::uint64_t kEvalSeed = 2024;

// RL within 1% of the graph policy in the deterministic setting.
Outcome rl_graph_equivalence() {
  std::vector<Task> tasks{chair()};
  for (std::uint64_t s = 1; s <= 5; ++s) tasks.push_back(random_task(8, s));
  Outcome out{true, ""};
  for (const auto& t : tasks) {
    BenchSuite suite;
    suite.scenario_name = t.name;
    suite.htm = t.htm;
    suite.scenario = deterministic();
    suite.seed = kEvalSeed;
    const auto graph = make_policy("graph", suite);
    const auto rl = make_policy("rl", suite);
    const Stats g = evaluate(*graph, t.htm, suite.scenario, kTrials, kEvalSeed);
    const Stats r = evaluate(*rl, t.htm, suite.scenario, kTrials, kEvalSeed);
    const double rel = (r.mean - g.mean) / g.mean;
    const bool ok = std::abs(rel) <= 0.01;
    out.pass = out.pass && ok;
    out.detail += fmt::format("{}{} graph {} rl {} ({:+.2f}%)", out.detail.empty() ? "" : "; ", t.name, g.cell(),
                              r.cell(), 100.0 * rel);
  }
  return out;
}

// Graph policy under a fixed budget; the bounded solver takes over past the exhaustive cap.
constexpr std::size_t kGraphNodes = 300'000;
constexpr std::size_t kBoundedStates = 300'000;

Outcome baseline_ordering() {
  std::vector<Task> tasks{chair()};
  for (int n : {8, 16, 24, 32}) tasks.push_back(random_task(n, 1));
  Outcome out{true, ""};
  const ScenarioConfig sc = deterministic();
  for (const auto& t : tasks) {
    std::string cell;
    const Stats greedy = evaluate(GreedyPolicy{}, t.htm, sc, kTrials, kEvalSeed);
    const Stats random = evaluate(RandomPolicy{}, t.htm, sc, kTrials, kEvalSeed);
    try {
      const auto graph = plan_graph_policy(t.htm, sc, kGraphNodes, kBoundedStates);
      const Stats g = evaluate(*graph, t.htm, sc, kTrials, kEvalSeed);
      const bool ok = g.mean <= greedy.mean + 0.5 && greedy.mean <= random.mean + 0.5;
      out.pass = out.pass && ok;
      cell = fmt::format("{} {} graph {} <= greedy {} <= random {}", ok ? "ok" : "violated", t.name, g.cell(),
                         greedy.cell(), random.cell());
    } catch (const BudgetExceeded& e) {
      out.pass = false;
      cell = fmt::format("unsolved {} graph over budget ({}), greedy {} <= random {}: {}", t.name, e.what(),
                         greedy.cell(), random.cell(), greedy.mean <= random.mean + 0.5 ? "holds" : "violated");
    }
    out.detail += (out.detail.empty() ? "" : "; ") + cell;
  }
  return out;
}

Outcome oracle_equivalence() {
  const LowestIdHuman lowest;
  const UniformHuman uniform;
  int exact = 0;
  double worst_uniform = 0.0;
  const ScenarioConfig sc = deterministic();
  GraphBuildOptions det;
  det.human = std::make_shared<const LowestIdHuman>();
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    auto htm = hrc::test::tiny_htm(seed);
    const double g = solve(build_graph(htm, sc, det)).root_value;
    const double o = expectimax_oracle(htm, sc, lowest);
    exact += g == o && g == std::round(g);
    const double gu = solve(build_graph(htm, sc)).root_value;
    worst_uniform = std::max(worst_uniform, std::abs(gu - expectimax_oracle(htm, sc, uniform)));
  }
  return {exact == 20 && worst_uniform <= 1e-9,
          fmt::format("{}/20 exact integer matches (deterministic human); uniform human max |diff| {:.1e}", exact,
                      worst_uniform)};
}

Outcome stochastic_trends() {
  const Task t = chair();
  Outcome out{true, ""};
  for (const std::string param : {"p_change", "p_fail"}) {
    std::vector<double> means;
    for (double v : {0.1, 0.2, 0.3, 0.4}) {
      BenchSuite suite;
      suite.scenario_name = fmt::format("chair {}={}", param, v);
      suite.htm = t.htm;
      if (param == "p_change") {
        suite.scenario.p_change = v;
      } else {
        suite.scenario.p_fail = v;
      }
      suite.policies = {"rl"};
      suite.trials = kTrials;
      suite.seed = kEvalSeed;
      means.push_back(run_benchmark(suite).front().mean);
    }
    bool increasing = true;
    for (std::size_t i = 1; i < means.size(); ++i) increasing = increasing && means[i] > means[i - 1];
    out.pass = out.pass && increasing;
    out.detail += fmt::format("{}{} rl means {:.1f} {}", out.detail.empty() ? "" : "; ", param, fmt::join(means, " "),
                              increasing ? "strictly increasing" : "NOT strictly increasing");
  }
  ScenarioConfig sc;
  sc.p_change = 0.1;
  try {
    build_graph(t.htm, sc);
    out.pass = false;
    out.detail += "; graph accepted a stochastic scenario";
  } catch (const ConfigError&) {
    BenchSuite suite;
    suite.htm = t.htm;
    suite.scenario = sc;
    suite.policies = {"graph"};
    try {
      run_benchmark(suite);
      out.pass = false;
      out.detail += "; bench accepted graph on a stochastic scenario";
    } catch (const ConfigError& e) {
      out.detail += fmt::format("; graph refused: \"{}\"", e.what());
    }
  }
  return out;
}

Outcome demdp_properties() {
  Outcome out{true, ""};
  struct Case {
    std::string name;
    std::shared_ptr<const Htm> htm;
    ScenarioConfig sc;
  };
  ScenarioConfig chair_sc;
  chair_sc.p_change = 0.3;
  chair_sc.p_fail = 0.1;
  ScenarioConfig toy_sc;
  toy_sc.p_change = 0.2;
  toy_sc.p_fail = 0.2;
  const std::vector<Case> cases{{"chair", chair().htm, chair_sc}, {"n8-s1", random_task(8, 1).htm, toy_sc}};
  for (const auto& c : cases) {
    const auto rep = hrc::test::check_demdp_properties(c.htm, c.sc, 100'000, 7);
    double worst = 0.0;
    for (EventKind k : {EventKind::H, EventKind::R, EventKind::C}) worst = std::max(worst, std::abs(rep.z(k)));
    const bool ok = rep.ok() && worst < 3.0;
    out.pass = out.pass && ok;
    out.detail += fmt::format("{}{}: {} transitions, {} violations, max |z| {:.2f}", out.detail.empty() ? "" : "; ",
                              c.name, rep.transitions, rep.violations.size(), worst);
    if (!rep.ok()) out.detail += fmt::format(" (first: {})", rep.violations.front());
  }
  // reward equals minus the elapsed time of each step; fixed-seed replay is bit-exact
  long steps = 0;
  long bad_reward = 0;
  int replay_mismatch = 0;
  const auto htm = chair().htm;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto run = [&](bool count) {
      Environment env(htm, chair_sc);
      std::string trace;
      long k = 0;
      int dt_sum = 0;
      env.set_observer([&](const EventRecord& ev, const Engine& e) {
        trace += trace_record_json(k++, ev, e.state()) + "\n";
        dt_sum += ev.dt;
      });
      env.reset(seed);
      const RandomPolicy pol;
      Rng rng(derive_seed(seed, 3));
      while (!env.done()) {
        const auto f = env.feasible();
        dt_sum = 0;
        const auto r = env.step(pol.act(env.htm(), env.state(), f, rng));
        if (count) {
          ++steps;
          bad_reward += r.reward != -static_cast<double>(dt_sum);
        }
      }
      return trace;
    };
    replay_mismatch += run(true) != run(false);
  }
  const bool ok = bad_reward == 0 && replay_mismatch == 0;
  out.pass = out.pass && ok;
  out.detail += fmt::format("; reward = -dt on {}/{} steps; {} of 200 seeded replays differ", steps - bad_reward, steps,
                            replay_mismatch);
  return out;
}

Outcome intent_filter() {
  Outcome out{true, ""};
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_norm = 0.0;
  double worst_scale = 0.0;
  for (int k = 0; k < 10000; ++k) {
    const std::size_t n = 2 + static_cast<std::size_t>(k % 6);
    Belief b;
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      b.probs.push_back(u(rng) + 1e-3);
      z += b.probs.back();
    }
    for (double& p : b.probs) p /= z;
    std::vector<double> lik(n);
    for (double& l : lik) l = u(rng);
    const double rho = u(rng);
    const auto r = update_with_likelihoods(b, lik, rho);
    worst_norm = std::max(worst_norm, std::abs(r.belief.sum() - 1.0));
    const double c = std::exp(u(rng) * 10 - 5);
    for (double& l : lik) l *= c;
    const auto r2 = update_with_likelihoods(b, lik, rho);
    for (std::size_t i = 0; i < n; ++i)
      worst_scale = std::max(worst_scale, std::abs(r.belief.probs[i] - r2.belief.probs[i]));
  }
  const bool norm_ok = worst_norm <= 1e-9;
  const bool scale_ok = worst_scale <= 1e-12;

  GoalSet goals;
  goals.rho = 0.9;
  goals.goals = {{1, {10, 0, 0}, 1}, {2, {0, 10, 0}, 2}, {3, {-10, 0, 0}, 3}};
  const std::vector<double> lik{0.2, 0.5, 0.3};
  const auto post = update_with_likelihoods(Belief{{0.5, 0.3, 0.2}}, lik, 0.9).belief.probs;
  const std::vector<double> target{0.3050, 0.4735, 0.2215};
  double example_err = 0.0;
  for (std::size_t i = 0; i < 3; ++i) example_err = std::max(example_err, std::abs(post[i] - target[i]));
  const bool example_ok = example_err <= 1e-4;

  bool map_ok = true;
  int confident_steps_before_arrival = 0;
  for (int g = 1; g <= 3; ++g) {
    Rng trng(static_cast<std::uint64_t>(g));
    TrajectoryOptions opts;
    opts.speed = 0.5;
    const auto obs = simulate_trajectory({0, 0, 0}, g, goals, opts, trng);
    const auto beliefs = run_filter(obs, goals, Belief::uniform(3));
    bool confident = false;
    for (std::size_t i = 0; i + 1 < beliefs.size(); ++i) {
      map_ok = map_ok && map_goal(beliefs[i].belief, goals) == g;
      if (beliefs[i].belief.probs[static_cast<std::size_t>(g - 1)] > 0.99) {
        confident = true;
        ++confident_steps_before_arrival;
      }
    }
    map_ok = map_ok && confident;
  }
  out.pass = norm_ok && scale_ok && example_ok && map_ok;
  out.detail = fmt::format(
      "normalisation max err {:.1e} ({}); scaling max diff {:.1e} ({}); 3-goal example ({:.4f}, {:.4f}, {:.4f}) vs "
      "(0.3050, 0.4735, 0.2215) max err {:.4f} ({}); noiseless MAP consistent and > 0.99 before arrival ({})",
      worst_norm, norm_ok ? "ok" : "fail", worst_scale, scale_ok ? "ok" : "fail", post[0], post[1], post[2],
      example_err, example_ok ? "ok" : "fail", map_ok ? "ok" : "fail");
  return out;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome cli_reproducibility(const std::string& cli) {
  if (cli.empty()) return {false, "command-line tool not available (configure with HRCPLAN_BUILD_TOOLS=ON)"};
  const auto dir = std::filesystem::temp_directory_path() / fmt::format("hrcplan_accept_{}", ::getpid());
  std::filesystem::create_directories(dir);
  std::vector<std::string> csvs;
  std::string first_error;
  for (int workers : {1, 1, 2, 4}) {
    const auto out = dir / fmt::format("bench_{}.csv", csvs.size());
    const std::string cmd = fmt::format(
        "\"{}\" bench --builtin chair --random 8,2 --policy graph --policy rl --policy greedy --policy random "
        "--trials 300 --seed 9 --episodes 20000 --workers {} --format csv --out \"{}\" > \"{}.stdout\" 2>&1",
        cli, workers, out.string(), out.string());
    const int rc = std::system(cmd.c_str());
    if (rc != 0 && first_error.empty()) first_error = fmt::format("bench exited with status {}", rc);
    csvs.push_back(read_file(out));
    if (read_file(out.string() + ".stdout") != csvs.back() && first_error.empty())
      first_error = "stdout CSV differs from --out file";
  }
  std::filesystem::remove_all(dir);
  const bool identical = std::all_of(csvs.begin(), csvs.end(), [&](const std::string& c) { return c == csvs[0]; });
  const long rows = std::count(csvs[0].begin(), csvs[0].end(), '\n') - 1;
  const bool ok = first_error.empty() && identical && rows == 2 * 4 * 300;
  return {ok, fmt::format("{} rows; 4 runs (workers 1,1,2,4) {}{}", rows, identical ? "byte-identical" : "DIFFER",
                          first_error.empty() ? "" : "; " + first_error)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::vector<std::string> expected_failures;
  std::vector<std::string> only;
#ifdef HRCPLAN_CLI_PATH
  std::string cli = HRCPLAN_CLI_PATH;
#else
  std::string cli;
#endif
  app.add_option("--expected-failures", expected_failures, "criteria known to fail")->delimiter(',');
  app.add_option("--only", only, "run only these criteria")->delimiter(',');
  app.add_option("--cli", cli, "path of the hrcplan tool");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {"rl_graph_equivalence", rl_graph_equivalence},
      {"baseline_ordering", baseline_ordering},
      {"oracle_equivalence", oracle_equivalence},
      {"stochastic_trends", stochastic_trends},
      {"demdp_properties", demdp_properties},
      {"intent_filter", intent_filter},
      {"cli_reproducibility", [&] { return cli_reproducibility(cli); }},
  };
  const std::set<std::string> expected(expected_failures.begin(), expected_failures.end());
  int unexpected = 0;
  int failed = 0;
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.name) == only.end()) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, fmt::format("aborted: {}", e.what())};
      ++unexpected;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << fmt::format("{} {} [{:.0f}s]: {}", o.pass ? "PASS" : "FAIL", c.name, secs, o.detail) << std::endl;
    if (!o.pass) {
      ++failed;
      if (!expected.count(c.name)) ++unexpected;
    } else if (expected.count(c.name)) {
      std::cout << fmt::format("note: {} was listed as an expected failure but passed", c.name) << std::endl;
    }
  }
  std::cout << fmt::format("{} criteria failed, {} unexpectedly", failed, unexpected) << std::endl;
  return unexpected == 0 ? 0 : 1;
}
