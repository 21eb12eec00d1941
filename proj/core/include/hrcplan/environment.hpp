#pragma once

#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hrcplan/engine.hpp"
#include "hrcplan/human.hpp"

namespace hrc {

struct StepResult {
  WorldState state;
  double reward = 0.0;  // minus the steps elapsed during the step
  bool done = false;
  std::vector<EventRecord> events;
};

/// Episodic interface over the engine with a simulated human: reset() and
/// step() return at robot decision points only.
class Environment {
 public:
  using EventObserver = std::function<void(const EventRecord&, const Engine&)>;

  Environment(std::shared_ptr<const Htm> htm, ScenarioConfig scenario,
              std::shared_ptr<const HumanModel> human = default_human());

  /// Seeds the sampler and human streams (scenario seed when absent).
  const WorldState& reset(std::optional<std::uint64_t> seed = std::nullopt);
  StepResult step(ActionId robot_choice);

  std::vector<ActionId> feasible() const { return engine_.robot_options(); }
  const WorldState& state() const noexcept { return engine_.state(); }
  const Engine& engine() const noexcept { return engine_; }
  const Htm& htm() const noexcept { return engine_.htm(); }
  std::shared_ptr<const Htm> htm_ptr() const noexcept { return engine_.htm_ptr(); }
  const ScenarioConfig& scenario() const noexcept { return engine_.scenario(); }
  const HumanModel& human() const noexcept { return *human_; }
  bool done() const noexcept { return engine_.done(); }
  long makespan() const noexcept { return engine_.clock(); }

  /// Called after every applied event (enables per-event stepping).
  void set_observer(EventObserver obs) { observer_ = std::move(obs); }

 private:
  void settle(std::vector<EventRecord>& events);

  Engine engine_;
  std::shared_ptr<const HumanModel> human_;
  std::optional<RandomSampler> sampler_;
  Rng human_rng_;
  EventObserver observer_;
};

/// One line-delimited JSON record per event:
/// {"k","event","dt","action","success","state":{...},"robot_action","reward"}.
std::string trace_record_json(long k, const EventRecord& ev, const WorldState& s);
std::string state_json(const WorldState& s);

}  // namespace hrc
