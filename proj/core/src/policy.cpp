#include "hrcplan/policy.hpp"

namespace hrc {

ActionId GreedyPolicy::act(const Htm& htm, const WorldState&, std::span<const ActionId> feasible, Rng&) const {
  ActionId best = kIdle;
  int best_d = 0;
  for (ActionId a : feasible) {
    if (a == kIdle) continue;
    const int d = htm.action(a).duration_r;
    if (best == kIdle || d < best_d || (d == best_d && a < best)) {
      best = a;
      best_d = d;
    }
  }
  return best;
}

ActionId RandomPolicy::act(const Htm&, const WorldState&, std::span<const ActionId> feasible, Rng& rng) const {
  return feasible[uniform_index(rng, feasible.size())];
}

}  // namespace hrc
