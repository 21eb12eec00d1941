#pragma once

#include <array>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hrcplan/engine.hpp"

namespace hrc {

using Point = std::array<double, 3>;  // meters; 2D points leave z = 0

struct Goal {
  int id = 1;
  Point position{};
  ActionId action = kIdle;
};

struct GoalSet {
  std::vector<Goal> goals;
  double rho = 0.9;  // self-transition probability

  std::size_t size() const noexcept { return goals.size(); }
  /// Throws ConfigError when empty, rho outside [0,1] or non-finite positions.
  void validate() const;
};

struct Observation {
  Point position{};
  Point velocity{};  // meters / step
  int t = 0;
};

struct Belief {
  std::vector<double> probs;

  static Belief uniform(std::size_t n);
  double sum() const;
};

struct IntentParams {
  double lambda = 1.0;  // proximity decay per meter
  double kappa = 2.0;   // alignment concentration
  double eps_v = 0.01;  // speed below which alignment is 1
};

struct FeatureLikelihood {
  double proximity = 1.0;
  double alignment = 1.0;
  double value() const noexcept { return proximity * alignment; }
};

std::vector<FeatureLikelihood> feature_likelihoods(const Observation& obs, const GoalSet& goals,
                                                   const IntentParams& params = {});
std::vector<double> likelihoods(const Observation& obs, const GoalSet& goals, const IntentParams& params = {});

/// Transition-matrix prediction step.
Belief predict(const Belief& b, double rho);

struct UpdateResult {
  Belief belief;
  bool degenerate = false;  // unnormalised posterior was all zero; belief reset to uniform
};

/// Predict, weight by `lik`, normalise.
UpdateResult update_with_likelihoods(const Belief& b, std::span<const double> lik, double rho);
UpdateResult belief_update(const Belief& b, const Observation& obs, const GoalSet& goals,
                           const IntentParams& params = {});

/// Goal id with the largest posterior; ties to the lowest id.
int map_goal(const Belief& b, const GoalSet& goals);

struct TrajectoryOptions {
  double speed = 0.25;  // meters / step
  double noise_std = 0.0;
  std::optional<int> switch_at;  // step at which the target changes
  int switch_goal = 0;           // target goal id after the switch
  int max_steps = 1000;
};

/// Straight-line motion at constant speed toward the goal plus isotropic
/// position noise; stops on arrival. Velocities are finite differences of the
/// noiseless path.
std::vector<Observation> simulate_trajectory(const Point& start, int goal_id, const GoalSet& goals,
                                             const TrajectoryOptions& opts, Rng& rng);

/// Runs the filter over a sequence, returning the belief after each update.
std::vector<UpdateResult> run_filter(std::span<const Observation> obs, const GoalSet& goals, Belief prior,
                                     const IntentParams& params = {});

GoalSet parse_goals(std::string_view json_text);
GoalSet load_goals(const std::string& path);

/// Goals for an HTM: one per base action on a circle of radius 2 m around the
/// hand's start position. Recovery actions share their base action's goal.
GoalSet goals_for(const Htm& htm, double rho = 0.9);

/// Detection latency from the filter: steps until the MAP goal is the chosen
/// action's goal with posterior above the threshold (scenario intent
/// settings), never less than 1. Idle is detected after the scenario delay.
RandomSampler::DetectionModel intent_detection_model(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario);

}  // namespace hrc
