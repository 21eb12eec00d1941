#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "hrcplan/engine.hpp"

namespace hrc {

using ChoiceDistribution = std::vector<std::pair<ActionId, double>>;

/// The uncontrollable human agent, queried at human decision points.
class HumanModel {
 public:
  virtual ~HumanModel() = default;
  virtual std::string name() const = 0;
  /// Probability of each choice; planners expand these as chance branches.
  virtual ChoiceDistribution distribution(const Engine& engine) const = 0;
  ActionId sample(const Engine& engine, Rng& rng) const;
};

/// Uniform over feasible non-idle actions (the action just abandoned by a
/// change of mind is skipped when others exist); idle when nothing is feasible.
class UniformHuman final : public HumanModel {
 public:
  std::string name() const override { return "uniform"; }
  ChoiceDistribution distribution(const Engine& engine) const override;
};

/// Deterministic human: always the lowest-id candidate of UniformHuman.
class LowestIdHuman final : public HumanModel {
 public:
  std::string name() const override { return "lowest_id"; }
  ChoiceDistribution distribution(const Engine& engine) const override;
};

/// Candidates the simulated human picks from (non-idle, abandoned excluded
/// when alternatives remain). Empty means idle.
std::vector<ActionId> human_candidates(const Engine& engine);

std::shared_ptr<const HumanModel> default_human();

}  // namespace hrc
