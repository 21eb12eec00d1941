#include "hrcplan/environment.hpp"

#include <nlohmann/json.hpp>

#include "hrcplan/intent.hpp"

namespace hrc {

Environment::Environment(std::shared_ptr<const Htm> htm, ScenarioConfig scenario,
                         std::shared_ptr<const HumanModel> human)
    : engine_(std::move(htm), std::move(scenario)), human_(std::move(human)) {
  if (!human_) human_ = default_human();
  reset();
}

const WorldState& Environment::reset(std::optional<std::uint64_t> seed) {
  const std::uint64_t s = seed.value_or(engine_.scenario().seed);
  RandomSampler::DetectionModel detection;
  if (engine_.scenario().intent.enabled) detection = intent_detection_model(engine_.htm_ptr(), engine_.scenario());
  sampler_.emplace(derive_seed(s, 1), std::move(detection));
  human_rng_.seed(derive_seed(s, 2));
  engine_.reset();
  std::vector<EventRecord> events;
  settle(events);
  return engine_.state();
}

void Environment::settle(std::vector<EventRecord>& events) {
  const StopMode mode = observer_ ? StopMode::EachEvent : StopMode::Decision;
  for (;;) {
    const std::size_t before = events.size();
    const Pending p = engine_.advance(&events, mode);
    if (observer_) {
      for (std::size_t i = before; i < events.size(); ++i) observer_(events[i], engine_);
    }
    if (p == Pending::Human) {
      engine_.choose_human(human_->sample(engine_, human_rng_), *sampler_);
      continue;
    }
    if (p == Pending::Event) continue;
    return;
  }
}

StepResult Environment::step(ActionId robot_choice) {
  if (engine_.done()) throw std::logic_error("step() called after the episode finished");
  const long start = engine_.clock();
  engine_.choose_robot(robot_choice, *sampler_);
  StepResult out;
  settle(out.events);
  out.state = engine_.state();
  out.reward = -static_cast<double>(engine_.clock() - start);
  out.done = engine_.done();
  return out;
}

namespace {

nlohmann::json state_obj(const WorldState& s) {
  std::vector<int> sa(s.task.values().begin(), s.task.values().end());
  return {{"s_a", sa},
          {"human_action", s.human_action},
          {"t_h", s.t_h},
          {"t_r", s.t_r},
          {"detected", s.detected},
          {"robot_action", s.robot_action},
          {"human_waiting", s.human_waiting}};
}

}  // namespace

std::string state_json(const WorldState& s) { return state_obj(s).dump(); }

std::string trace_record_json(long k, const EventRecord& ev, const WorldState& s) {
  nlohmann::json j = {{"k", k},
                      {"event", std::string(to_string(ev.kind))},
                      {"dt", ev.dt},
                      {"action", ev.action},
                      {"clock", ev.clock},
                      {"state", state_obj(s)},
                      {"robot_action", s.robot_action},
                      {"reward", -ev.dt}};
  if (ev.kind == EventKind::H || ev.kind == EventKind::R) j["success"] = ev.success;
  return j.dump();
}

}  // namespace hrc
