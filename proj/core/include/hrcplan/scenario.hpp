#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hrcplan/htm.hpp"

namespace hrc {

/// Couples the D event to the intent filter instead of a fixed delay.
struct IntentDetection {
  bool enabled = false;
  double threshold = 0.8;
  double noise_std = 0.02;  // meters
  int max_steps = 50;
};

struct ScenarioConfig {
  double p_change = 0.0;     // probability an individual human action is abandoned
  int detect_delay = 2;      // steps before the robot recognizes a human action
  double change_rate = 0.3;  // truncated-exponential rate of the change-of-mind time
  double gamma = 1.0;
  std::optional<double> duration_cv;  // overrides every action's cv when set
  std::optional<double> p_fail;       // overrides every action's p_fail when set
  std::uint64_t seed = 0;
  IntentDetection intent;

  void validate() const;

  double cv_of(const ActionSpec& a) const { return duration_cv.value_or(a.duration_cv); }
  double p_fail_of(const ActionSpec& a) const { return p_fail.value_or(a.p_fail); }

  /// No failures, no change of mind, nominal durations for every action.
  bool deterministic(const Htm& htm) const;
  /// Failures or changes of mind possible (graph solving is refused).
  bool has_stochastic_events(const Htm& htm) const;
};

ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);
std::string to_json(const ScenarioConfig& s, int indent = 2);

}  // namespace hrc
