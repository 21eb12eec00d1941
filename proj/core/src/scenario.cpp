#include "hrcplan/scenario.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace hrc {

using nlohmann::json;

void ScenarioConfig::validate() const {
  if (!(p_change >= 0.0 && p_change <= 1.0)) throw ConfigError("p_change must lie in [0,1]");
  if (detect_delay < 1) throw ConfigError("detect_delay must be >= 1");
  if (!(change_rate > 0.0)) throw ConfigError("change_rate must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0,1]");
  if (duration_cv && !(*duration_cv >= 0.0)) throw ConfigError("duration_cv must be >= 0");
  if (p_fail && !(*p_fail >= 0.0 && *p_fail <= 1.0)) throw ConfigError("p_fail must lie in [0,1]");
  if (intent.enabled && !(intent.threshold > 0.0 && intent.threshold < 1.0))
    throw ConfigError("intent threshold must lie in (0,1)");
}

bool ScenarioConfig::deterministic(const Htm& htm) const {
  if (has_stochastic_events(htm)) return false;
  if (intent.enabled) return false;
  for (const auto& a : htm.actions()) {
    if (cv_of(a) > 0.0) return false;
  }
  return true;
}

bool ScenarioConfig::has_stochastic_events(const Htm& htm) const {
  if (p_change > 0.0) return true;
  for (const auto& a : htm.actions()) {
    if (p_fail_of(a) > 0.0) return true;
  }
  return false;
}

ScenarioConfig parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("scenario syntax error at byte {}: {}", e.byte, e.what()));
  }
  if (!doc.is_object()) throw ConfigError("scenario document must be a JSON object");
  ScenarioConfig s;
  try {
    s.p_change = doc.value("p_change", s.p_change);
    s.detect_delay = doc.value("detect_delay", s.detect_delay);
    s.change_rate = doc.value("change_rate", s.change_rate);
    s.gamma = doc.value("gamma", s.gamma);
    if (doc.contains("duration_cv") && !doc["duration_cv"].is_null()) s.duration_cv = doc["duration_cv"].get<double>();
    if (doc.contains("p_fail") && !doc["p_fail"].is_null()) s.p_fail = doc["p_fail"].get<double>();
    s.seed = doc.value("seed", s.seed);
    if (auto it = doc.find("intent_detection"); it != doc.end()) {
      s.intent.enabled = it->value("enabled", true);
      s.intent.threshold = it->value("threshold", s.intent.threshold);
      s.intent.noise_std = it->value("noise_std", s.intent.noise_std);
      s.intent.max_steps = it->value("max_steps", s.intent.max_steps);
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("scenario field has the wrong type: {}", e.what()));
  }
  s.validate();
  return s;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string to_json(const ScenarioConfig& s, int indent) {
  json j = {{"p_change", s.p_change},
            {"detect_delay", s.detect_delay},
            {"change_rate", s.change_rate},
            {"gamma", s.gamma},
            {"seed", s.seed}};
  j["duration_cv"] = s.duration_cv ? json(*s.duration_cv) : json();
  if (s.p_fail) j["p_fail"] = *s.p_fail;
  if (s.intent.enabled) {
    j["intent_detection"] = {{"enabled", true},
                             {"threshold", s.intent.threshold},
                             {"noise_std", s.intent.noise_std},
                             {"max_steps", s.intent.max_steps}};
  }
  return j.dump(indent);
}

}  // namespace hrc
