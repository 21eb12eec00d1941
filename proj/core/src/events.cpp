#include "hrcplan/events.hpp"

#include <algorithm>
#include <stdexcept>

#include <fmt/format.h>

namespace hrc {

namespace {

enum class HumanPhase { Idle, Waiting, Individual, Joint };

HumanPhase phase_of(const Htm& htm, const WorldState& s, ActionId robot_action) {
  if (s.human_action <= 0) return HumanPhase::Idle;
  if (htm.action(s.human_action).is_joint()) {
    if (s.joint_in_progress(htm) || robot_action == s.human_action) return HumanPhase::Joint;
    return HumanPhase::Waiting;
  }
  return HumanPhase::Individual;
}

ActionId effective_robot_action(const WorldState& s, ActionId a) {
  if (s.robot_action != kIdle) {
    if (a != kIdle && a != s.robot_action)
      throw std::invalid_argument(fmt::format("robot is executing {} not {}", s.robot_action, a));
    return s.robot_action;
  }
  return a;
}

// One consistent (human duration, change time) hypothesis with its weight.
struct HumanHypothesis {
  int h_rem;   // steps until H
  int c_rem;   // steps until C, -1 for none
  double w;
};

// Posterior over hidden human quantities given elapsed t_h and that neither H
// nor C fired before t_h. An H or C due exactly at t_h is still pending (it lost
// a tie to R at this instant) and fires next with zero remaining time.
std::vector<HumanHypothesis> human_hypotheses(const Htm& htm, const ScenarioConfig& sc, const WorldState& s) {
  const ActionSpec& spec = htm.action(s.human_action);
  const int detect = sc.detect_delay;
  Pmf durations = duration_pmf(spec.duration_h, sc.cv_of(spec), detect + 1);
  std::vector<HumanHypothesis> out;
  double total = 0.0;
  for (const auto& [dur, pd] : durations.entries()) {
    if (dur < s.t_h) continue;
    const int window = dur - detect - 1;
    const double pc = sc.p_change;
    const double p_none = (window >= 1) ? (1.0 - pc) : 1.0;
    if (p_none > 0.0) {
      out.push_back({dur - s.t_h, -1, pd * p_none});
      total += pd * p_none;
    }
    if (window >= 1 && pc > 0.0) {
      Pmf offsets = truncated_exponential(sc.change_rate, window);
      for (const auto& [k, pk] : offsets.entries()) {
        const int at = detect + k;
        if (at < s.t_h) continue;
        out.push_back({dur - s.t_h, at - s.t_h, pd * pc * pk});
        total += pd * pc * pk;
      }
    }
  }
  if (total <= 0.0) throw std::invalid_argument("inconsistent state: human action should already have ended");
  for (auto& h : out) h.w /= total;
  return out;
}

Pmf robot_residual(const Htm& htm, const ScenarioConfig& sc, const WorldState& s, ActionId a) {
  const ActionSpec& spec = htm.action(a);
  const int elapsed = (s.robot_action == a) ? s.t_r : 0;
  Pmf r = duration_pmf(spec.duration_r, sc.cv_of(spec), 1).residual(elapsed);
  if (r.empty()) throw std::invalid_argument("inconsistent state: robot action should already have ended");
  return r;
}

}  // namespace

std::vector<EventKind> feasible_events(const Htm& htm, const ScenarioConfig& sc, const WorldState& s) {
  if (!s.detected) return {EventKind::D};
  std::vector<EventKind> out;
  const HumanPhase ph = phase_of(htm, s, s.robot_action);
  if (ph == HumanPhase::Individual || ph == HumanPhase::Joint) out.push_back(EventKind::H);
  if (s.robot_action != kIdle && ph != HumanPhase::Joint) out.push_back(EventKind::R);
  if (ph == HumanPhase::Individual && sc.p_change > 0.0) out.push_back(EventKind::C);
  return out;
}

Pmf lifespan_pmf(const Htm& htm, const ScenarioConfig& sc, const WorldState& s, ActionId robot_action, EventKind e) {
  const ActionId a = effective_robot_action(s, robot_action);
  auto infeasible = [&] {
    return std::invalid_argument(fmt::format("event {} is not feasible in this state", to_string(e)));
  };
  if (!s.detected) {
    if (e != EventKind::D) throw infeasible();
    return Pmf::point(std::max(1, sc.detect_delay - s.t_h));
  }
  const HumanPhase ph = phase_of(htm, s, a);
  switch (e) {
    case EventKind::D:
      throw infeasible();
    case EventKind::H: {
      if (ph == HumanPhase::Joint) {
        const ActionSpec& spec = htm.action(s.human_action);
        const int elapsed = s.joint_in_progress(htm) ? s.t_h : 0;
        return duration_pmf(spec.duration_r, sc.cv_of(spec), 1).residual(elapsed);
      }
      if (ph != HumanPhase::Individual) throw infeasible();
      const ActionSpec& spec = htm.action(s.human_action);
      return duration_pmf(spec.duration_h, sc.cv_of(spec), sc.detect_delay + 1).residual(s.t_h);
    }
    case EventKind::R: {
      if (a == kIdle || ph == HumanPhase::Joint) throw infeasible();
      return robot_residual(htm, sc, s, a);
    }
    case EventKind::C: {
      if (ph != HumanPhase::Individual || sc.p_change <= 0.0) throw infeasible();
      std::vector<Pmf::Entry> mass;
      for (const auto& h : human_hypotheses(htm, sc, s)) {
        if (h.c_rem > 0) mass.emplace_back(h.c_rem, h.w);
      }
      Pmf p(std::move(mass));
      if (p.empty()) throw infeasible();
      return p.normalized();
    }
  }
  throw infeasible();
}

std::map<EventKind, double> event_probabilities(const Htm& htm, const ScenarioConfig& sc, const WorldState& s,
                                                ActionId robot_action) {
  if (!s.detected) return {{EventKind::D, 1.0}};
  const ActionId a = effective_robot_action(s, robot_action);
  const HumanPhase ph = phase_of(htm, s, a);

  std::map<EventKind, double> out;
  if (ph == HumanPhase::Joint) {
    out[EventKind::H] = 1.0;
    return out;
  }
  if (ph == HumanPhase::Idle || ph == HumanPhase::Waiting) {
    if (a == kIdle) throw std::invalid_argument("no event can fire: robot and human both idle");
    out[EventKind::R] = 1.0;
    return out;
  }

  const auto hyps = human_hypotheses(htm, sc, s);
  Pmf robot = (a != kIdle) ? robot_residual(htm, sc, s, a) : Pmf();
  double p_h = 0.0, p_r = 0.0, p_c = 0.0;
  for (const auto& h : hyps) {
    auto human_first = [&](double w) {
      if (h.c_rem >= 0) p_c += w;  // C precedes H by construction
      else p_h += w;
    };
    if (robot.empty()) {
      human_first(h.w);
      continue;
    }
    for (const auto& [r, pr] : robot.entries()) {
      const double w = h.w * pr;
      const int human_tau = h.c_rem >= 0 ? h.c_rem : h.h_rem;
      if (r <= human_tau) p_r += w;  // R wins ties against both H and C
      else human_first(w);
    }
  }
  out[EventKind::H] = p_h;
  out[EventKind::R] = p_r;
  if (sc.p_change > 0.0) out[EventKind::C] = p_c;
  if (a == kIdle) out.erase(EventKind::R);
  return out;
}

}  // namespace hrc
