#pragma once

#include <atomic>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hrcplan/environment.hpp"
#include "hrcplan/policy.hpp"
#include "hrcplan/state_key.hpp"

namespace hrc {

/// Robot action space: idle plus every action the robot may perform, ascending.
std::vector<ActionId> robot_action_space(const Htm& htm);

class QTable {
 public:
  struct Row {
    std::vector<double> q;
    std::vector<std::uint32_t> visits;
  };

  QTable() = default;
  QTable(std::vector<ActionId> actions, KeyOptions key);

  const std::vector<ActionId>& actions() const noexcept { return actions_; }
  const KeyOptions& key_options() const noexcept { return key_; }
  std::size_t index_of(ActionId a) const;
  std::string key(const WorldState& s) const { return encode_state(s, key_); }

  const Row* find(const std::string& key) const;
  Row& row(const std::string& key);
  std::size_t size() const noexcept { return rows_.size(); }
  const std::unordered_map<std::string, Row>& rows() const noexcept { return rows_; }

  /// Highest-valued visited action among `feasible` (ties to the lowest id);
  /// nullopt when the state or all its feasible actions are unvisited.
  std::optional<ActionId> best_visited(const std::string& key, std::span<const ActionId> feasible) const;

  std::string to_json() const;
  static QTable from_json(std::string_view text);
  friend bool operator==(const QTable& a, const QTable& b);

 private:
  std::vector<ActionId> actions_;
  std::vector<int> index_;  // ActionId -> column, -1 when absent
  KeyOptions key_;
  std::unordered_map<std::string, Row> rows_;
};

enum class LearningRate : std::uint8_t {
  Constant,  // alpha = lr
  Visits,    // alpha = max(lr_min, 1 / visits(s, a)^lr_power)
};

struct TrainConfig {
  long episodes = 200'000;
  double lr = 0.1;
  LearningRate lr_schedule = LearningRate::Constant;
  double lr_power = 1.0;
  double lr_min = 0.0;
  double eps_start = 0.3;
  double eps_end = 0.01;
  double eps_decay_fraction = 0.8;  // share of episodes over which epsilon decays linearly
  long eval_interval = 0;           // 0 disables the training curve
  int eval_episodes = 100;
  std::uint64_t seed = 0;
  double value_cap = 1e7;  // |Q| above this aborts training
  KeyOptions key;

  void validate() const;
  double epsilon(long episode) const;
};

struct CurvePoint {
  long episode = 0;
  double eval_mean = 0.0;
  double eval_std = 0.0;
};

struct TrainResult {
  QTable table;
  std::vector<CurvePoint> curve;
  long updates = 0;
  long mask_checks = 0;  // updates whose action was verified against the feasible set
};

/// Episodic Q-learning with epsilon-greedy exploration restricted to the
/// feasible robot actions. Forced choices (one feasible action) are taken
/// without an update and their reward is carried into the next update.
/// Throws std::runtime_error when a value exceeds the cap.
TrainResult train(Environment& env, const TrainConfig& cfg);

/// Training curve as CSV: episode,eval_mean,eval_std.
std::string curve_csv(const std::vector<CurvePoint>& curve);

/// Greedy policy over a frozen table. Unknown states use the greedy baseline.
class QPolicy final : public Policy {
 public:
  explicit QPolicy(std::shared_ptr<const QTable> table) : table_(std::move(table)) {}
  std::string name() const override { return "rl"; }
  ActionId act(const Htm& htm, const WorldState& s, std::span<const ActionId> feasible, Rng& rng) const override;
  const QTable& table() const noexcept { return *table_; }
  long misses() const noexcept { return misses_.load(); }

 private:
  std::shared_ptr<const QTable> table_;
  mutable std::atomic<long> misses_{0};
};

}  // namespace hrc
