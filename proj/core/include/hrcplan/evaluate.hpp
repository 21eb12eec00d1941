#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hrcplan/environment.hpp"
#include "hrcplan/policy.hpp"

namespace hrc {

struct EpisodeRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  long steps = 0;  // makespan
  int n_events = 0;
  int n_changes = 0;
  int n_failures = 0;
};

struct Stats {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single episode
  std::vector<EpisodeRecord> episodes;

  /// "mean [std]" with one decimal.
  std::string cell() const;
};

Stats summarize_makespans(std::vector<EpisodeRecord> episodes);

struct EvalOptions {
  int workers = 1;  // <= 0: hardware concurrency
  std::shared_ptr<const HumanModel> human = default_human();
};

/// Seed of trial i: derive_seed(seed, kEpisodeStream, i).
inline constexpr std::uint64_t kEpisodeStream = 7;

/// Runs one episode on `env` (reset with `seed`) and returns its record.
EpisodeRecord run_episode(const Policy& policy, Environment& env, std::uint64_t seed);

/// n independent seeded episodes, split across workers; results are reduced in
/// trial order so output does not depend on the worker count.
Stats evaluate(const Policy& policy, std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario, int n_episodes,
               std::uint64_t seed, const EvalOptions& opts = {});

}  // namespace hrc
