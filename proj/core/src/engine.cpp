#include "hrcplan/engine.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace hrc {

int NominalSampler::duration(const ActionSpec& a, Agent agent, double, int min_value) {
  return std::max(a.duration(agent), min_value);
}

int RandomSampler::duration(const ActionSpec& a, Agent agent, double cv, int min_value) {
  return sample_duration(a.duration(agent), cv, min_value, rng_);
}

bool RandomSampler::fails(double p) {
  if (p <= 0.0) return false;
  return uniform01(rng_) < p;
}

bool RandomSampler::change_pending(double p_change) {
  if (p_change <= 0.0) return false;
  return uniform01(rng_) < p_change;
}

int RandomSampler::detection_delay(ActionId human_choice, int nominal) {
  if (!detection_) return nominal;
  return std::max(1, detection_(human_choice, rng_));
}

Engine::Engine(std::shared_ptr<const Htm> htm, ScenarioConfig scenario)
    : htm_(std::move(htm)), scenario_(std::move(scenario)) {
  if (!htm_ || htm_->size() == 0) throw ConfigError("empty HTM");
  scenario_.validate();
  reset();
}

void Engine::reset() {
  state_ = WorldState{};
  state_.task = TaskState(htm_->size());
  hidden_ = HiddenState{};
  clock_ = 0;
  need_human_ = true;
  robot_due_ = true;
  redecide_ = false;
  done_ = false;
  n_events_ = n_changes_ = n_failures_ = 0;
}

Pending Engine::pending() const noexcept {
  if (done_) return Pending::Done;
  if (need_human_) return Pending::Human;
  if (robot_due_) return Pending::Robot;
  return Pending::Event;
}

bool Engine::human_individual_active() const noexcept {
  return hidden_.human_choice != kIdle && !hidden_.joint_pending &&
         !(state_.robot_action == hidden_.human_choice && htm_->action(hidden_.human_choice).is_joint());
}

void Engine::choose_human(ActionId choice, Sampler& sampler) {
  if (pending() != Pending::Human) throw std::logic_error("no human decision pending");
  auto options = human_options();
  if (std::find(options.begin(), options.end(), choice) == options.end())
    throw InfeasibleAction(fmt::format("human action {} is not feasible", choice));

  need_human_ = false;
  hidden_.abandoned = kIdle;
  if (redecide_ && choice == kIdle) {
    redecide_ = false;
    return;
  }
  redecide_ = false;

  hidden_.human_choice = choice;
  hidden_.joint_pending = false;
  hidden_.human_duration = 0;
  hidden_.human_fails = false;
  hidden_.change_at = -1;
  hidden_.detect_at = sampler.detection_delay(choice, scenario_.detect_delay);
  state_.human_action = kUnknown;
  state_.detected = false;
  state_.human_waiting = false;
  state_.t_h = 0;

  if (choice == kIdle) return;
  const ActionSpec& spec = htm_->action(choice);
  if (spec.is_joint()) {
    hidden_.joint_pending = true;
    return;
  }
  hidden_.human_duration = sampler.duration(spec, Agent::Human, scenario_.cv_of(spec), hidden_.detect_at + 1);
  hidden_.human_fails = sampler.fails(scenario_.p_fail_of(spec));
  if (sampler.change_pending(scenario_.p_change)) {
    const int window = hidden_.human_duration - hidden_.detect_at - 1;
    if (window >= 1) {
      hidden_.change_at = hidden_.detect_at + sampler.change_offset(truncated_exponential(scenario_.change_rate, window));
    }
  }
}

void Engine::choose_robot(ActionId action, Sampler& sampler) {
  if (pending() != Pending::Robot) throw std::logic_error("no robot decision pending");
  auto options = robot_options();
  if (std::find(options.begin(), options.end(), action) == options.end())
    throw InfeasibleAction(fmt::format("robot action {} is not feasible", action));

  robot_due_ = false;
  state_.t_r = 0;
  state_.robot_action = action;
  if (action == kIdle) return;

  const ActionSpec& spec = htm_->action(action);
  const int d = sampler.duration(spec, Agent::Robot, scenario_.cv_of(spec), 1);
  const bool fails = sampler.fails(scenario_.p_fail_of(spec));
  hidden_.robot_duration = d;
  hidden_.robot_fails = fails;
  if (spec.is_joint()) {
    // The waiting human and the robot start together with one shared duration.
    hidden_.joint_pending = false;
    hidden_.human_duration = d;
    hidden_.human_fails = fails;
    state_.human_waiting = false;
    state_.t_h = 0;
  }
}

bool Engine::can_change_mind() const noexcept {
  return !done_ && state_.detected && human_individual_active() && hidden_.change_at < 0 &&
         state_.t_h + 1 < hidden_.human_duration;
}

void Engine::request_change_of_mind() {
  if (!can_change_mind()) throw InfeasibleAction("change of mind requires a detected individual action in progress");
  hidden_.change_at = state_.t_h + 1;
}

bool Engine::completes_task(ActionId id) const {
  const ActionId base = htm_->base_of(id);
  const auto values = state_.task.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (static_cast<ActionId>(i + 1) == base) continue;
    if (values[i] != TaskState::kDone) return false;
  }
  return true;
}

bool Engine::next_event(Next& out) const {
  const bool robot_active = state_.robot_action != kIdle;
  const bool joint_running = robot_active && state_.robot_action == hidden_.human_choice &&
                             htm_->action(state_.robot_action).is_joint() && !hidden_.joint_pending;

  if (!state_.detected) {
    const int tau_d = hidden_.detect_at - state_.t_h;
    // A robot completion that ends the whole task is not held back for detection.
    if (robot_active && !joint_running && !hidden_.robot_fails && completes_task(state_.robot_action)) {
      const int tau_r = std::max(0, hidden_.robot_duration - state_.t_r);
      if (tau_r <= tau_d) {
        out = {EventKind::R, tau_r};
        return true;
      }
    }
    out = {EventKind::D, std::max(0, tau_d)};
    return true;
  }

  bool found = false;
  auto consider = [&](EventKind k, int tau) {
    tau = std::max(0, tau);
    if (!found || tau < out.tau) {
      out = {k, tau};
      found = true;
    }
  };
  // Candidate order fixes tie-breaking: R before H before C.
  if (robot_active && !joint_running) consider(EventKind::R, hidden_.robot_duration - state_.t_r);
  if (joint_running || human_individual_active()) consider(EventKind::H, hidden_.human_duration - state_.t_h);
  if (hidden_.change_at >= 0) consider(EventKind::C, hidden_.change_at - state_.t_h);
  return found;
}

void Engine::finish(ActionId id, bool fails) {
  const ActionId base = htm_->base_of(id);
  if (fails) {
    state_.task.set(base, TaskState::kFailed);
    ++n_failures_;
  } else {
    state_.task.set(base, TaskState::kDone);
  }
}

void Engine::apply(const Next& ev, std::vector<EventRecord>* log) {
  clock_ += ev.tau;
  state_.t_h += ev.tau;
  if (state_.robot_action != kIdle) state_.t_r += ev.tau;
  ++n_events_;

  EventRecord rec{ev.kind, ev.tau, kIdle, true, clock_};

  switch (ev.kind) {
    case EventKind::D: {
      state_.detected = true;
      state_.human_action = hidden_.human_choice;
      state_.human_waiting = hidden_.joint_pending;
      rec.action = hidden_.human_choice;
      if (state_.robot_action == kIdle) robot_due_ = true;
      break;
    }
    case EventKind::R: {
      const ActionId a = state_.robot_action;
      finish(a, hidden_.robot_fails);
      rec.action = a;
      rec.success = !hidden_.robot_fails;
      state_.robot_action = kIdle;
      state_.t_r = 0;
      robot_due_ = true;
      if (state_.detected && hidden_.human_choice == kIdle) {
        need_human_ = true;
        redecide_ = true;
      }
      break;
    }
    case EventKind::H: {
      const ActionId a = hidden_.human_choice;
      finish(a, hidden_.human_fails);
      rec.action = a;
      rec.success = !hidden_.human_fails;
      if (state_.robot_action == a) {  // joint action: both agents are released
        state_.robot_action = kIdle;
        state_.t_r = 0;
      }
      hidden_.human_choice = kIdle;
      hidden_.change_at = -1;
      state_.human_action = kUnknown;
      state_.human_waiting = false;
      state_.detected = false;
      state_.t_h = 0;
      need_human_ = true;
      break;
    }
    case EventKind::C: {
      rec.action = hidden_.human_choice;
      hidden_.abandoned = hidden_.human_choice;
      hidden_.human_choice = kIdle;
      hidden_.change_at = -1;
      state_.human_action = kUnknown;
      state_.human_waiting = false;
      state_.detected = false;
      state_.t_h = 0;
      state_.robot_action = kIdle;
      state_.t_r = 0;
      robot_due_ = true;
      need_human_ = true;
      ++n_changes_;
      break;
    }
  }
  if (log) log->push_back(rec);
  if (state_.task.complete()) done_ = true;
}

Pending Engine::advance(std::vector<EventRecord>* log, StopMode mode) {
  for (;;) {
    if (done_) return Pending::Done;
    if (need_human_) return Pending::Human;
    Next ev{};
    const bool has_event = next_event(ev);
    if (robot_due_ && (!has_event || ev.tau > 0)) return Pending::Robot;
    if (!has_event) throw std::logic_error("deadlock: no feasible event and no decision pending");
    apply(ev, log);
    if (mode == StopMode::EachEvent) return done_ ? Pending::Done : Pending::Event;
  }
}

}  // namespace hrc
