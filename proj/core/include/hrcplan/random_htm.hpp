#pragma once

#include <cstdint>

#include "hrcplan/htm.hpp"

namespace hrc {

struct RandomHtmOptions {
  int min_duration = 4;
  int max_duration = 16;
  double duration_cv = 0.1;
  int max_depth = 4;
};

/// n actions (n divisible by 4): n/4 joint, n/2 robot_only, n/4 either, in a
/// seeded random order. One nominal duration per action, uniform in
/// [min_duration, max_duration], shared by both agents. Tree: each node splits
/// its contiguous id range into 2-4 groups with a uniformly drawn kind; groups
/// of one action and nodes at max_depth become leaves.
Htm generate_random_htm(int n, std::uint64_t seed, const RandomHtmOptions& opts = {});

}  // namespace hrc
