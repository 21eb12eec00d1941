#include <gtest/gtest.h>

#include <algorithm>
#include <map>

#include "hrcplan/bench.hpp"
#include "support.hpp"

using namespace hrc;

namespace {

int count_cap(const Htm& htm, Capability c) {
  int n = 0;
  for (ActionId id = 1; id <= static_cast<ActionId>(htm.size()); ++id) n += htm.action(id).capability == c;
  return n;
}

BenchSuite small_suite(int workers) {
  BenchSuite suite;
  suite.scenario_name = "n8";
  suite.htm = std::make_shared<const Htm>(generate_random_htm(8, 4));
  suite.scenario = hrc::test::deterministic_scenario();
  suite.trials = 200;
  suite.seed = 42;
  suite.workers = workers;
  suite.train.episodes = 2000;
  return suite;
}

}  // namespace

TEST(RandomHtm, Composition) {
  for (int n : {4, 8, 16, 24, 32}) {
    const Htm htm = generate_random_htm(n, 7);
    EXPECT_EQ(htm.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(count_cap(htm, Capability::Joint), n / 4);
    EXPECT_EQ(count_cap(htm, Capability::RobotOnly), n / 2);
    EXPECT_EQ(count_cap(htm, Capability::Either), n / 4);
    EXPECT_EQ(count_cap(htm, Capability::HumanOnly), 0);
  }
}

TEST(RandomHtm, DeterministicInSeed) {
  EXPECT_EQ(to_json(generate_random_htm(8, 3)), to_json(generate_random_htm(8, 3)));
  EXPECT_NE(to_json(generate_random_htm(8, 3)), to_json(generate_random_htm(8, 4)));
}

TEST(RandomHtm, RejectsBadSizes) {
  EXPECT_THROW(generate_random_htm(6, 1), ConfigError);
  EXPECT_THROW(generate_random_htm(0, 1), ConfigError);
}

TEST(RandomHtm, DurationsAreUniformOnFourToSixteen) {
  long count = 0;
  double sum = 0.0;
  std::map<int, int> hist;
  for (std::uint64_t seed = 1; count < 100000; ++seed) {
    const Htm htm = generate_random_htm(32, seed);
    for (ActionId id = 1; id <= 32; ++id) {
      const auto& a = htm.action(id);
      EXPECT_GE(a.duration_r, 4);
      EXPECT_LE(a.duration_r, 16);
      ++hist[a.duration_r];
      sum += a.duration_r;
      ++count;
    }
  }
  EXPECT_NEAR(sum / static_cast<double>(count), 10.0, 0.1);
  EXPECT_EQ(hist.size(), 13u);
  const double expected = static_cast<double>(count) / 13.0;
  double chi2 = 0.0;
  for (const auto& [d, n] : hist) chi2 += (n - expected) * (n - expected) / expected;
  EXPECT_LT(chi2, 32.91);  // df=12, p=0.001
}

TEST(RandomHtm, TreeDepthIsBounded) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Htm htm = generate_random_htm(32, seed);
    std::vector<int> depth(htm.nodes().size(), 0);
    int max_depth = 0;
    for (std::size_t i = 0; i < htm.nodes().size(); ++i) {
      for (const auto& c : htm.nodes()[i].children) {
        if (const auto* r = std::get_if<HtmNode::Ref>(&c)) {
          depth[r->node] = depth[i] + 1;
          max_depth = std::max(max_depth, depth[r->node]);
        }
      }
    }
    EXPECT_LT(max_depth, 4);
  }
}

TEST(Bench, CsvIsIdenticalAcrossRunsAndWorkers) {
  const auto a = bench_csv(run_benchmark(small_suite(1)));
  const auto b = bench_csv(run_benchmark(small_suite(1)));
  const auto c = bench_csv(run_benchmark(small_suite(4)));
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  EXPECT_EQ(a.substr(0, a.find('\n')), "scenario,policy,trial,seed,steps,n_events,n_changes,n_failures");
  EXPECT_EQ(std::count(a.begin(), a.end(), '\n'), 1 + 4 * 200);
}

TEST(Bench, ReportedMeanMatchesRecords) {
  for (const auto& r : run_benchmark(small_suite(2))) {
    double sum = 0.0;
    for (const auto& e : r.records) sum += static_cast<double>(e.steps);
    EXPECT_DOUBLE_EQ(r.mean, sum / static_cast<double>(r.records.size()));
    EXPECT_EQ(r.trials, 200);
  }
}

TEST(Bench, GraphIsRefusedForStochasticScenarios) {
  BenchSuite suite = small_suite(1);
  suite.scenario.p_change = 0.1;
  suite.policies = {"graph"};
  try {
    run_benchmark(suite);
    FAIL() << "graph accepted a stochastic scenario";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("graph policy refused"), std::string::npos);
  }
  suite.policies = {"greedy", "random"};
  EXPECT_EQ(run_benchmark(suite).size(), 2u);
}

TEST(Bench, UnknownPolicyAndBadTrials) {
  BenchSuite suite = small_suite(1);
  suite.policies = {"ppo"};
  EXPECT_THROW(run_benchmark(suite), ConfigError);
  suite.policies = {"greedy"};
  suite.trials = 0;
  EXPECT_THROW(run_benchmark(suite), ConfigError);
}

TEST(Bench, SingleTrialHasZeroStd) {
  BenchSuite suite = small_suite(1);
  suite.trials = 1;
  suite.policies = {"random"};
  const auto r = run_benchmark(suite);
  ASSERT_EQ(r.size(), 1u);
  EXPECT_EQ(r[0].std, 0.0);
}

TEST(Summarize, EmptyResultsGiveHeaderOnly) {
  EXPECT_EQ(summarize({}), "policy\n------\n");
}

TEST(Summarize, OneColumnPerScenarioRowAligned) {
  std::vector<BenchResult> rs{{"chair", "graph", 10, 99.42, 1.24, {}},
                              {"chair", "random", 10, 117.94, 11.0, {}},
                              {"n8", "graph", 10, 80.0, 0.0, {}}};
  const std::string expected =
      "policy | chair        | n8        \n"
      "-------+--------------+-----------\n"
      "graph  | 99.4 [1.2]   | 80.0 [0.0]\n"
      "random | 117.9 [11.0] | -         \n";
  EXPECT_EQ(summarize(rs), expected);
  const std::string t = summarize(rs, true);
  EXPECT_EQ(t.substr(0, t.find('\n')), "scenario | graph      | random      ");
}

TEST(Bench, JsonCarriesCells) {
  std::vector<BenchResult> rs{{"chair", "graph", 10, 99.42, 1.24, {}}};
  const std::string j = bench_json(rs);
  EXPECT_NE(j.find("\"cell\": \"99.4 [1.2]\""), std::string::npos);
}
