#pragma once

#include <string>
#include <string_view>

#include "hrcplan/world.hpp"

namespace hrc {

struct KeyOptions {
  int bucket_h = 1;  // t_h bucket width (1 = exact)
  int bucket_r = 1;
};

/// Compact binary key of the observable state: s_a, human action, waiting
/// flag, bucketed t_h and t_r, d, robot action. Injective for bucket width 1.
std::string encode_state(const WorldState& s, const KeyOptions& opts = {});

/// Human-readable form of a key, e.g. "sa=0+-0|h=3|w=0|th=4|tr=0|d=1|r=0".
std::string describe_key(std::string_view key);
/// Inverse of describe_key. Throws ConfigError on malformed text.
std::string parse_key(std::string_view text);

}  // namespace hrc
