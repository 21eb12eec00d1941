#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "hrcplan/types.hpp"

namespace hrc {

struct ActionSpec {
  ActionId id = 0;
  std::string name;
  Capability capability = Capability::Either;
  int duration_h = 1;  // in base steps
  int duration_r = 1;
  double duration_cv = 0.1;
  double p_fail = 0.0;
  std::optional<ActionId> recovery_of;

  bool allows(Agent agent) const noexcept;
  bool is_joint() const noexcept { return capability == Capability::Joint; }
  int duration(Agent agent) const noexcept {
    return agent == Agent::Human ? duration_h : duration_r;
  }
};

enum class NodeKind : std::uint8_t { Sequential, Independent, Parallel };

std::string_view to_string(NodeKind k);

struct HtmNode {
  struct Leaf {
    ActionId action;
  };
  struct Ref {
    std::size_t node;  // index into Htm::nodes()
  };
  using Child = std::variant<Leaf, Ref>;

  NodeKind kind = NodeKind::Sequential;
  std::vector<Child> children;
};

/// Per-action progress: -1 failed, 0 not attempted, +1 completed. Indexed by base id.
class TaskState {
 public:
  static constexpr std::int8_t kFailed = -1;
  static constexpr std::int8_t kPending = 0;
  static constexpr std::int8_t kDone = 1;

  TaskState() = default;
  explicit TaskState(std::size_t n) : values_(n, kPending) {}
  explicit TaskState(std::vector<std::int8_t> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::int8_t operator[](ActionId base) const { return values_.at(static_cast<std::size_t>(base - 1)); }
  void set(ActionId base, std::int8_t v);
  std::span<const std::int8_t> values() const noexcept { return values_; }

  bool complete() const noexcept;

  friend bool operator==(const TaskState&, const TaskState&) = default;

 private:
  std::vector<std::int8_t> values_;
};

/// Hierarchical task model: action table (base + recovery) and the
/// sequential/independent/parallel tree that orders base actions.
class Htm {
 public:
  /// Validates and derives precedence. `actions` holds the N base actions
  /// (ids 1..N, any order); recovery actions are generated unless supplied
  /// in `recovery_overrides` (ids N+1..2N).
  Htm(std::vector<ActionSpec> actions, std::vector<HtmNode> nodes,
      std::vector<ActionSpec> recovery_overrides = {});

  /// Number of base actions N.
  std::size_t size() const noexcept { return n_; }
  /// All 2N actions, index id-1.
  std::span<const ActionSpec> actions() const noexcept { return actions_; }
  const ActionSpec& action(ActionId id) const;
  bool is_base(ActionId id) const noexcept { return id >= 1 && id <= static_cast<ActionId>(n_); }
  bool is_recovery(ActionId id) const noexcept {
    return id > static_cast<ActionId>(n_) && id <= static_cast<ActionId>(2 * n_);
  }
  bool contains(ActionId id) const noexcept { return is_base(id) || is_recovery(id); }
  /// Base action a recovery restores, or the id itself for base actions.
  ActionId base_of(ActionId id) const;
  ActionId recovery_for(ActionId base) const;

  const std::vector<HtmNode>& nodes() const noexcept { return nodes_; }
  std::size_t root() const noexcept { return 0; }

  /// Base actions that must be completed before `base` may start.
  std::span<const ActionId> prerequisites(ActionId base) const;

  /// Counts of the robot / human action spaces (including idle).
  std::size_t robot_action_count() const noexcept;
  std::size_t human_action_count() const noexcept;

 private:
  void derive_precedence();

  std::size_t n_ = 0;
  std::vector<ActionSpec> actions_;
  std::vector<HtmNode> nodes_;
  std::vector<std::vector<ActionId>> prereq_;
};

/// True iff every predecessor of `action` under sequential ancestors is
/// completed. Recovery ids are checked against their base action.
bool precedence_satisfied(const Htm& htm, const TaskState& s, ActionId action);

bool is_complete(const TaskState& s);

/// Parses the JSON HTM document. Throws ConfigError with a position or path.
Htm parse_htm(std::string_view text);
Htm load_htm(const std::string& path);
std::string to_json(const Htm& htm, int indent = 2);

/// Ten-action chair assembly: four rails, joint side transport, three
/// robot-placed screws, screwing and seat placement.
Htm chair_htm();

}  // namespace hrc
