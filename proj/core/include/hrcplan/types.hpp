#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hrc {

/// Action identifiers: 0 is idle, 1..N are base actions, N+1..2N recovery actions.
using ActionId = int;

inline constexpr ActionId kIdle = 0;
/// Human action not yet detected by the robot.
inline constexpr ActionId kUnknown = -1;

enum class Capability : std::uint8_t { HumanOnly = 0, RobotOnly = 1, Either = 2, Joint = 3 };

enum class Agent : std::uint8_t { Human, Robot };

std::string_view to_string(Capability c);
std::string_view to_string(Agent a);

/// Malformed input documents or invalid configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A size or depth budget was exhausted (CLI exit code 3).
class BudgetExceeded : public std::runtime_error {
 public:
  BudgetExceeded(const std::string& what, std::size_t reached)
      : std::runtime_error(what), reached_(reached) {}
  std::size_t reached() const noexcept { return reached_; }

 private:
  std::size_t reached_;
};

/// A robot or human choice outside the current feasible set.
class InfeasibleAction : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace hrc
