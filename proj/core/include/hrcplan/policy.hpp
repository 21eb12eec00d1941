#pragma once

#include <memory>
#include <span>
#include <string>

#include "hrcplan/rng.hpp"
#include "hrcplan/world.hpp"

namespace hrc {

/// Robot policy over the observable state. `feasible` is never empty.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual ActionId act(const Htm& htm, const WorldState& s, std::span<const ActionId> feasible, Rng& rng) const = 0;
};

/// Lowest nominal robot duration among feasible non-idle actions; ties to the
/// lowest id; idle only when it is the sole option.
class GreedyPolicy final : public Policy {
 public:
  std::string name() const override { return "greedy"; }
  ActionId act(const Htm& htm, const WorldState& s, std::span<const ActionId> feasible, Rng& rng) const override;
};

/// Uniform over the feasible set.
class RandomPolicy final : public Policy {
 public:
  std::string name() const override { return "random"; }
  ActionId act(const Htm& htm, const WorldState& s, std::span<const ActionId> feasible, Rng& rng) const override;
};

}  // namespace hrc
