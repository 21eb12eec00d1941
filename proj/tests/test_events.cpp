#include <gtest/gtest.h>

#include <cmath>

#include "hrcplan/events.hpp"
#include "support.hpp"

using namespace hrc;
using namespace hrc::test;

namespace {

WorldState detected(std::size_t n, ActionId human, int t_h, ActionId robot = kIdle, int t_r = 0) {
  WorldState s;
  s.task = TaskState(n);
  s.detected = true;
  s.human_action = human;
  s.t_h = t_h;
  s.robot_action = robot;
  s.t_r = t_r;
  return s;
}

}  // namespace

TEST(Lifespan, DetectionIsPointMass) {
  auto htm = flat({act(1, Capability::Either, 8, 8)});
  auto sc = deterministic_scenario(3);
  WorldState s;
  s.task = TaskState(1);
  const Pmf p = lifespan_pmf(*htm, sc, s, kIdle, EventKind::D);
  EXPECT_DOUBLE_EQ(p.prob(3), 1.0);
  EXPECT_EQ(feasible_events(*htm, sc, s), std::vector<EventKind>{EventKind::D});
  EXPECT_EQ(event_probabilities(*htm, sc, s, kIdle).at(EventKind::D), 1.0);
}

TEST(Lifespan, HumanResidual) {
  auto htm = flat({act(1, Capability::Either, 8, 8), act(2, Capability::Either, 6, 6)}, NodeKind::Independent);
  const Pmf p = lifespan_pmf(*htm, deterministic_scenario(2), detected(2, 1, 5), kIdle, EventKind::H);
  EXPECT_DOUBLE_EQ(p.prob(3), 1.0);
}

TEST(Lifespan, ChangeWindowFromCurrentInstant) {
  // Human duration 6, detection at 2: change offsets 1..3 after detection.
  auto htm = flat({act(1, Capability::HumanOnly, 6, 6)});
  ScenarioConfig sc = deterministic_scenario(2);
  sc.p_change = 0.5;
  sc.change_rate = 0.5;
  const Pmf p = lifespan_pmf(*htm, sc, detected(1, 1, 2), kIdle, EventKind::C);
  EXPECT_NEAR(p.prob(1), 0.5065, 5e-5);
  EXPECT_NEAR(p.prob(2), 0.3072, 5e-5);
  EXPECT_NEAR(p.prob(3), 0.1863, 5e-5);
}

TEST(FeasibleEvents, Pruning) {
  auto htm = flat({act(1, Capability::Either, 8, 8), act(2, Capability::Either, 6, 6)}, NodeKind::Independent);
  ScenarioConfig sc = deterministic_scenario(2);
  EXPECT_EQ(feasible_events(*htm, sc, detected(2, 1, 3)), std::vector<EventKind>{EventKind::H});
  sc.p_change = 0.2;
  EXPECT_EQ(feasible_events(*htm, sc, detected(2, 1, 3, 2, 1)),
            (std::vector<EventKind>{EventKind::H, EventKind::R, EventKind::C}));
  EXPECT_EQ(feasible_events(*htm, sc, detected(2, kIdle, 3, 2, 1)), std::vector<EventKind>{EventKind::R});
}

TEST(EventProbabilities, NoChangeMeansNoC) {
  auto htm = flat({act(1, Capability::Either, 8, 8), act(2, Capability::Either, 6, 6)}, NodeKind::Independent);
  const auto p = event_probabilities(*htm, deterministic_scenario(2), detected(2, 1, 2), 2);
  EXPECT_EQ(p.count(EventKind::C), 0u);
  EXPECT_DOUBLE_EQ(p.at(EventKind::R), 1.0);  // robot 6 < human residual 6: tie goes to R
  EXPECT_DOUBLE_EQ(p.at(EventKind::H), 0.0);
}

TEST(EventProbabilities, RobotOutlastsChangeWindow) {
  auto htm = flat({act(1, Capability::HumanOnly, 6, 6), act(2, Capability::RobotOnly, 20, 20)}, NodeKind::Independent);
  ScenarioConfig sc = deterministic_scenario(2);
  sc.p_change = 0.2;
  const auto p = event_probabilities(*htm, sc, detected(2, 1, 2), 2);
  EXPECT_NEAR(p.at(EventKind::C), 0.2, 1e-15);
  EXPECT_NEAR(p.at(EventKind::H), 0.8, 1e-15);
  EXPECT_NEAR(p.at(EventKind::R), 0.0, 1e-15);
}

TEST(EventProbabilities, ChangeVersusRobotEnumeration) {
  // Human duration 5, detection 2: window {1,2} after detection. Robot needs 2.
  auto htm = flat({act(1, Capability::HumanOnly, 5, 5), act(2, Capability::RobotOnly, 2, 2)}, NodeKind::Independent);
  ScenarioConfig sc = deterministic_scenario(2);
  sc.p_change = 1.0;
  sc.change_rate = 1e-12;  // flat weights over the window
  const auto p = event_probabilities(*htm, sc, detected(2, 1, 2), 2);
  EXPECT_NEAR(p.at(EventKind::C), 0.5, 1e-9);
  EXPECT_NEAR(p.at(EventKind::R), 0.5, 1e-9);
}

TEST(EventProbabilities, HumanEventDueNowIsStillPending) {
  // After an R event tied with C or H at the same instant, the tied event fires
  // next with zero delay; the new robot action cannot pre-empt it.
  auto htm = flat({act(1, Capability::HumanOnly, 5, 5), act(2, Capability::RobotOnly, 1, 1)}, NodeKind::Independent);
  ScenarioConfig sc = deterministic_scenario(2);
  sc.p_change = 1.0;
  sc.change_rate = 1e-12;  // change at t_h 3 or 4, equally likely
  const auto p = event_probabilities(*htm, sc, detected(2, 1, 3), 2);
  EXPECT_NEAR(p.at(EventKind::C), 0.5, 1e-9);
  EXPECT_NEAR(p.at(EventKind::R), 0.5, 1e-9);

  const auto q = event_probabilities(*htm, deterministic_scenario(2), detected(2, 1, 5), 2);
  EXPECT_DOUBLE_EQ(q.at(EventKind::H), 1.0);
  EXPECT_DOUBLE_EQ(q.at(EventKind::R), 0.0);
}

TEST(EventProbabilities, SumToOneOnStochasticStates) {
  const Htm h = chair_htm();
  ScenarioConfig sc;
  sc.p_change = 0.4;
  sc.duration_cv = 0.2;
  for (int th = 2; th < 12; ++th) {
    for (int tr = 0; tr < 12; ++tr) {
      const auto p = event_probabilities(h, sc, detected(10, 1, th, 2, tr), 2);
      double total = 0.0;
      for (const auto& [k, q] : p) {
        EXPECT_GE(q, 0.0);
        total += q;
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}
