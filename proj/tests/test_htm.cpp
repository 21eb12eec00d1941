#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "hrcplan/htm.hpp"
#include "hrcplan/world.hpp"
#include "support.hpp"

using namespace hrc;

namespace {

bool has(const std::vector<ActionId>& v, ActionId a) { return std::find(v.begin(), v.end(), a) != v.end(); }

TaskState with(std::size_t n, std::initializer_list<std::pair<ActionId, std::int8_t>> vals) {
  TaskState s(n);
  for (auto [id, v] : vals) s.set(id, v);
  return s;
}

}  // namespace

TEST(Htm, ChairShape) {
  const Htm h = chair_htm();
  EXPECT_EQ(h.size(), 10u);
  EXPECT_EQ(h.actions().size(), 20u);
  EXPECT_TRUE(h.action(5).is_joint());
  EXPECT_EQ(h.action(6).capability, Capability::RobotOnly);
  EXPECT_EQ(h.action(9).capability, Capability::HumanOnly);
  EXPECT_EQ(h.recovery_for(3), 13);
  EXPECT_EQ(h.base_of(13), 3);
  EXPECT_EQ(h.action(13).recovery_of, 3);
  EXPECT_EQ(h.action(13).capability, h.action(3).capability);
}

TEST(Htm, ChairPrecedence) {
  const Htm h = chair_htm();
  EXPECT_FALSE(precedence_satisfied(h, TaskState(10), 5));
  const auto rails = with(10, {{1, 1}, {2, 1}, {3, 1}, {4, 1}});
  EXPECT_TRUE(precedence_satisfied(h, rails, 5));
  EXPECT_TRUE(precedence_satisfied(h, TaskState(10), 1));
  EXPECT_TRUE(precedence_satisfied(h, TaskState(10), 4));
  EXPECT_FALSE(precedence_satisfied(h, rails, 9));
  auto screws = rails;
  for (ActionId a : {5, 6, 7, 8}) screws.set(a, 1);
  EXPECT_TRUE(precedence_satisfied(h, screws, 9));
  EXPECT_FALSE(precedence_satisfied(h, screws, 10));
}

TEST(Htm, ParseSingleLeaf) {
  const Htm h = parse_htm(R"({"actions":[{"id":1,"name":"x","capability":"robot_only","duration_h":3,"duration_r":5}],
                              "root":{"kind":"parallel","children":[{"leaf":1}]}})");
  EXPECT_EQ(h.size(), 1u);
  EXPECT_EQ(h.actions().size(), 2u);
  EXPECT_TRUE(precedence_satisfied(h, TaskState(1), 1));
}

TEST(Htm, ParseErrors) {
  EXPECT_THROW(parse_htm(R"({"actions":[{"id":1,"capability":"joint","duration_h":3,"duration_r":4}],
                             "root":{"kind":"sequential","children":[{"leaf":1}]}})"),
               ConfigError);
  EXPECT_THROW(parse_htm(R"({"actions":[{"id":1,"capability":"either","duration_h":3,"duration_r":4},
                                        {"id":1,"capability":"either","duration_h":3,"duration_r":4}],
                             "root":{"kind":"sequential","children":[{"leaf":1}]}})"),
               ConfigError);
  EXPECT_THROW(parse_htm(R"({"actions":[{"id":1,"capability":"either","duration_h":3,"duration_r":4}],
                             "root":{"kind":"alternative","children":[{"leaf":1}]}})"),
               ConfigError);
  EXPECT_THROW(parse_htm(R"({"actions":[{"id":1,"capability":"either","duration_h":3,"duration_r":4}],
                             "root":{"kind":"sequential","children":[{"leaf":1},{"leaf":1}]}})"),
               ConfigError);
  EXPECT_THROW(parse_htm(R"({"actions":[],"root":{"kind":"sequential","children":[]}})"), ConfigError);
  try {
    parse_htm("{\"actions\": [ 1, }");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("byte"), std::string::npos) << e.what();
  }
}

TEST(Htm, JsonRoundTrip) {
  const Htm h = chair_htm();
  const Htm back = parse_htm(to_json(h));
  ASSERT_EQ(back.size(), h.size());
  for (ActionId a = 1; a <= 20; ++a) {
    EXPECT_EQ(back.action(a).capability, h.action(a).capability);
    EXPECT_EQ(back.action(a).duration_h, h.action(a).duration_h);
    EXPECT_EQ(back.action(a).duration_r, h.action(a).duration_r);
  }
  std::mt19937_64 rng(7);
  for (int k = 0; k < 200; ++k) {
    std::vector<std::int8_t> v(10);
    for (auto& x : v) x = static_cast<std::int8_t>(rng() % 3) - 1;
    TaskState s(v);
    for (ActionId a = 1; a <= 10; ++a) EXPECT_EQ(precedence_satisfied(back, s, a), precedence_satisfied(h, s, a));
  }
}

TEST(Htm, IsComplete) {
  EXPECT_TRUE(is_complete(TaskState(std::vector<std::int8_t>{1, 1, 1})));
  EXPECT_FALSE(is_complete(TaskState(std::vector<std::int8_t>{1, 0, 1})));
  EXPECT_FALSE(is_complete(TaskState(std::vector<std::int8_t>{1, -1, 1})));
}

TEST(Feasibility, ChairExamples) {
  const Htm h = chair_htm();
  WorldState s;
  s.task = TaskState(10);
  s.detected = true;
  s.human_action = 1;
  s.t_h = 2;
  auto robot = feasible_actions(h, s, Agent::Robot);
  std::sort(robot.begin(), robot.end());
  EXPECT_EQ(robot, (std::vector<ActionId>{kIdle, 2, 3, 4}));

  WorldState undetected;
  undetected.task = TaskState(10);
  EXPECT_EQ(feasible_actions(h, undetected, Agent::Robot), std::vector<ActionId>{kIdle});
}

TEST(Feasibility, RecoveryAppearsAfterFailure) {
  const Htm h = chair_htm();
  WorldState s;
  s.task = with(10, {{3, -1}});
  s.detected = true;
  s.human_action = kIdle;
  const auto robot = feasible_actions(h, s, Agent::Robot);
  EXPECT_TRUE(has(robot, 13));
  EXPECT_FALSE(has(robot, 3));
  EXPECT_FALSE(has(robot, kIdle));
  EXPECT_TRUE(has(feasible_actions(h, s, Agent::Human), 13));
}

TEST(Feasibility, JointForcesRobot) {
  const Htm h = chair_htm();
  WorldState s;
  s.task = with(10, {{1, 1}, {2, 1}, {3, 1}, {4, 1}});
  s.detected = true;
  s.human_action = 5;
  s.human_waiting = true;
  EXPECT_EQ(feasible_actions(h, s, Agent::Robot), std::vector<ActionId>{5});
}

TEST(FeasibilityProperty, RandomStates) {
  const Htm h = chair_htm();
  std::mt19937_64 rng(11);
  for (int k = 0; k < 20000; ++k) {
    WorldState s;
    std::vector<std::int8_t> v(10);
    for (auto& x : v) x = static_cast<std::int8_t>(rng() % 3) - 1;
    s.task = TaskState(v);
    s.detected = rng() % 4 != 0;
    if (s.detected) {
      WorldState probe = s;
      probe.human_action = kIdle;
      const auto options = feasible_actions(h, probe, Agent::Human);
      s.human_action = options[rng() % options.size()];
    } else {
      s.human_action = kUnknown;
    }
    for (Agent ag : {Agent::Robot, Agent::Human}) {
      const auto f = feasible_actions(h, s, ag);
      ASSERT_FALSE(f.empty());
      for (ActionId a : f) {
        if (a == kIdle) continue;
        const ActionId base = h.base_of(a);
        ASSERT_NE(s.task[base], TaskState::kDone);
        ASSERT_TRUE(precedence_satisfied(h, s.task, a));
        if (ag == Agent::Robot) ASSERT_NE(h.action(a).capability, Capability::HumanOnly);
        if (ag == Agent::Human) ASSERT_NE(h.action(a).capability, Capability::RobotOnly);
        if (h.is_recovery(a)) ASSERT_EQ(s.task[base], TaskState::kFailed);
      }
    }
  }
}

TEST(PrecedenceProperty, MonotoneUnderCompletion) {
  const Htm h = chair_htm();
  std::mt19937_64 rng(5);
  for (int k = 0; k < 20000; ++k) {
    std::vector<std::int8_t> v(10);
    for (auto& x : v) x = static_cast<std::int8_t>(rng() % 3) - 1;
    const TaskState before(v);
    const auto j = static_cast<std::size_t>(rng() % 10);
    if (v[j] != 0) continue;
    v[j] = 1;
    const TaskState after(v);
    for (ActionId a = 1; a <= 10; ++a) {
      if (precedence_satisfied(h, before, a)) ASSERT_TRUE(precedence_satisfied(h, after, a));
    }
  }
}
