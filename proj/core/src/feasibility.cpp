#include "hrcplan/world.hpp"

namespace hrc {

std::string_view to_string(EventKind e) {
  switch (e) {
    case EventKind::H: return "H";
    case EventKind::R: return "R";
    case EventKind::D: return "D";
    case EventKind::C: return "C";
  }
  return "?";
}

namespace {

// Not yet done, not blocked by ordering, and (for recovery) the base failed.
bool available(const Htm& htm, const TaskState& task, ActionId id) {
  const ActionId base = htm.base_of(id);
  const auto progress = task[base];
  if (htm.is_recovery(id)) {
    if (progress != TaskState::kFailed) return false;
  } else if (progress != TaskState::kPending) {
    return false;
  }
  return precedence_satisfied(htm, task, base);
}

}  // namespace

std::vector<ActionId> feasible_actions(const Htm& htm, const WorldState& s, Agent agent) {
  std::vector<ActionId> out;
  const auto count = static_cast<ActionId>(2 * htm.size());

  if (agent == Agent::Robot) {
    if (!s.detected) return {kIdle};
    if (s.human_action > 0 && htm.action(s.human_action).is_joint()) return {s.human_action};
    if (s.human_action != kIdle) out.push_back(kIdle);
    for (ActionId id = 1; id <= count; ++id) {
      const auto& a = htm.action(id);
      if (!a.allows(Agent::Robot) || a.is_joint()) continue;
      if (id == s.human_action) continue;
      if (available(htm, s.task, id)) out.push_back(id);
    }
    if (out.empty()) out.push_back(kIdle);
    return out;
  }

  out.push_back(kIdle);
  for (ActionId id = 1; id <= count; ++id) {
    const auto& a = htm.action(id);
    if (!a.allows(Agent::Human)) continue;
    if (id == s.robot_action) continue;
    if (available(htm, s.task, id)) out.push_back(id);
  }
  return out;
}

}  // namespace hrc
