#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "hrcplan/pmf.hpp"
#include "hrcplan/rng.hpp"
#include "hrcplan/scenario.hpp"
#include "hrcplan/world.hpp"

namespace hrc {

/// Source of every random draw the transition rules make. Durations and
/// outcomes are drawn when an action starts.
class Sampler {
 public:
  virtual ~Sampler() = default;
  virtual int duration(const ActionSpec& a, Agent agent, double cv, int min_value) = 0;
  virtual bool fails(double p) = 0;
  virtual bool change_pending(double p_change) = 0;
  virtual int change_offset(const Pmf& offsets) = 0;
  virtual int detection_delay(ActionId human_choice, int nominal) = 0;
};

/// Nominal durations, no failures, no changes of mind, fixed detection delay.
class NominalSampler final : public Sampler {
 public:
  int duration(const ActionSpec& a, Agent agent, double, int min_value) override;
  bool fails(double) override { return false; }
  bool change_pending(double) override { return false; }
  int change_offset(const Pmf& offsets) override { return offsets.min(); }
  int detection_delay(ActionId, int nominal) override { return nominal; }
};

class RandomSampler final : public Sampler {
 public:
  using DetectionModel = std::function<int(ActionId human_choice, Rng& rng)>;

  explicit RandomSampler(std::uint64_t seed, DetectionModel detection = {})
      : rng_(seed), detection_(std::move(detection)) {}

  int duration(const ActionSpec& a, Agent agent, double cv, int min_value) override;
  bool fails(double p) override;
  bool change_pending(double p_change) override;
  int change_offset(const Pmf& offsets) override { return offsets.sample(rng_); }
  int detection_delay(ActionId human_choice, int nominal) override;

  Rng& rng() noexcept { return rng_; }

 private:
  Rng rng_;
  DetectionModel detection_;
};

/// Hidden simulator state: sampled durations, outcomes and pending change of mind.
struct HiddenState {
  ActionId human_choice = kIdle;  // true current human action
  bool joint_pending = false;     // human holds a joint action that has not started
  int human_duration = 0;
  bool human_fails = false;
  int detect_at = 0;   // t_h at which D fires
  int change_at = -1;  // t_h at which C fires, -1 when none
  int robot_duration = 0;
  bool robot_fails = false;
  ActionId abandoned = kIdle;  // action dropped by the last change of mind

  friend bool operator==(const HiddenState&, const HiddenState&) = default;
};

enum class Pending : std::uint8_t {
  Human,  // human decision point: call choose_human
  Robot,  // robot decision point: call choose_robot
  Event,  // an event was applied (StopMode::EachEvent only)
  Done,
};

enum class StopMode : std::uint8_t { Decision, EachEvent };

/// Discrete-event transition kernel. A copyable value: planners branch by
/// copying it at human decision points.
class Engine {
 public:
  Engine(std::shared_ptr<const Htm> htm, ScenarioConfig scenario);

  /// Fresh episode: s_a all zero, human decision pending, robot decision due.
  void reset();

  Pending pending() const noexcept;
  bool done() const noexcept { return done_; }

  const Htm& htm() const noexcept { return *htm_; }
  std::shared_ptr<const Htm> htm_ptr() const noexcept { return htm_; }
  const ScenarioConfig& scenario() const noexcept { return scenario_; }
  const WorldState& state() const noexcept { return state_; }
  const HiddenState& hidden() const noexcept { return hidden_; }
  long clock() const noexcept { return clock_; }
  bool redeciding() const noexcept { return redecide_; }

  std::vector<ActionId> robot_options() const { return feasible_actions(*htm_, state_, Agent::Robot); }
  std::vector<ActionId> human_options() const { return feasible_actions(*htm_, state_, Agent::Human); }

  /// At Pending::Human. An idle human asked to re-decide who stays idle keeps
  /// the current (already detected) idle state.
  void choose_human(ActionId choice, Sampler& sampler);
  /// At Pending::Robot.
  void choose_robot(ActionId action, Sampler& sampler);

  /// Interactive change of mind: the in-progress individual human action is
  /// abandoned one step from now.
  bool can_change_mind() const noexcept;
  void request_change_of_mind();

  /// Applies events until the next decision point (or after one event).
  Pending advance(std::vector<EventRecord>* log = nullptr, StopMode mode = StopMode::Decision);

  int events() const noexcept { return n_events_; }
  int changes() const noexcept { return n_changes_; }
  int failures() const noexcept { return n_failures_; }

 private:
  struct Next {
    EventKind kind;
    int tau;
  };

  bool next_event(Next& out) const;
  void apply(const Next& ev, std::vector<EventRecord>* log);
  void finish(ActionId id, bool fails);
  bool completes_task(ActionId id) const;
  bool human_individual_active() const noexcept;

  std::shared_ptr<const Htm> htm_;
  ScenarioConfig scenario_;
  WorldState state_;
  HiddenState hidden_;
  long clock_ = 0;
  bool need_human_ = false;
  bool robot_due_ = false;
  bool redecide_ = false;
  bool done_ = false;
  int n_events_ = 0;
  int n_changes_ = 0;
  int n_failures_ = 0;
};

}  // namespace hrc
