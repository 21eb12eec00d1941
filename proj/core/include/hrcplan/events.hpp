#pragma once

#include <map>
#include <vector>

#include "hrcplan/pmf.hpp"
#include "hrcplan/scenario.hpp"
#include "hrcplan/world.hpp"

namespace hrc {

/// Gamma(s): {D} while undetected; otherwise the subset of {H, R, C} that can fire.
std::vector<EventKind> feasible_events(const Htm& htm, const ScenarioConfig& sc, const WorldState& s);

/// Time-to-event distribution l(s, a, e). `robot_action` is the robot's
/// action over the coming interval: its in-progress action, or a newly chosen
/// one (elapsed 0). Throws std::invalid_argument when e is not feasible.
Pmf lifespan_pmf(const Htm& htm, const ScenarioConfig& sc, const WorldState& s, ActionId robot_action, EventKind e);

/// Probability that each event is the next to fire under robot action `a`.
/// Exact for the simulator's generative model (durations and the pending
/// change of mind drawn at action start, ties resolved R, H, C).
std::map<EventKind, double> event_probabilities(const Htm& htm, const ScenarioConfig& sc, const WorldState& s,
                                                ActionId robot_action);

}  // namespace hrc
