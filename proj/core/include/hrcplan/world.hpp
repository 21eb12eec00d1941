#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "hrcplan/htm.hpp"

namespace hrc {

/// Observable DE-MDP state (s_a, human action, t_h, t_r, d) plus the robot's
/// own action so the environment is self-contained.
struct WorldState {
  TaskState task;
  ActionId human_action = kUnknown;  // kUnknown until detected; then kIdle or an action id
  int t_h = 0;                       // steps since the current human action started
  int t_r = 0;                       // steps since the current robot action started
  bool detected = false;
  ActionId robot_action = kIdle;
  bool human_waiting = false;  // detected human holds a joint action until the robot joins

  bool joint_in_progress(const Htm& htm) const {
    return robot_action != kIdle && robot_action == human_action && htm.action(robot_action).is_joint();
  }

  friend bool operator==(const WorldState&, const WorldState&) = default;
};

enum class EventKind : std::uint8_t { H, R, D, C };

std::string_view to_string(EventKind e);

struct EventRecord {
  EventKind kind = EventKind::D;
  int dt = 0;              // steps since the previous event
  ActionId action = kIdle;  // finishing (H/R), detected (D) or abandoned (C) action
  bool success = true;     // H/R only
  long clock = 0;          // absolute step count after the event
};

/// Feasible set A_f for one agent. Robot: {idle} while undetected, exactly the
/// joint action once the human holds one, idle excluded when the human idles.
/// Human: always includes idle.
std::vector<ActionId> feasible_actions(const Htm& htm, const WorldState& s, Agent agent);

}  // namespace hrc
