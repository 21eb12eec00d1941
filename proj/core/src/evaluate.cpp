#include "hrcplan/evaluate.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

#include <fmt/format.h>

namespace hrc {

std::string Stats::cell() const { return fmt::format("{:.1f} [{:.1f}]", mean, std); }

Stats summarize_makespans(std::vector<EpisodeRecord> episodes) {
  Stats s;
  const auto n = static_cast<double>(episodes.size());
  if (!episodes.empty()) {
    double sum = 0.0;
    for (const auto& e : episodes) sum += static_cast<double>(e.steps);
    s.mean = sum / n;
    if (episodes.size() > 1) {
      double ss = 0.0;
      for (const auto& e : episodes) ss += (static_cast<double>(e.steps) - s.mean) * (static_cast<double>(e.steps) - s.mean);
      s.std = std::sqrt(ss / (n - 1.0));
    }
  }
  s.episodes = std::move(episodes);
  return s;
}

EpisodeRecord run_episode(const Policy& policy, Environment& env, std::uint64_t seed) {
  env.reset(seed);
  Rng rng(derive_seed(seed, 3));
  while (!env.done()) {
    const auto feasible = env.feasible();
    env.step(policy.act(env.htm(), env.state(), feasible, rng));
  }
  const Engine& e = env.engine();
  EpisodeRecord r;
  r.seed = seed;
  r.steps = env.makespan();
  r.n_events = e.events();
  r.n_changes = e.changes();
  r.n_failures = e.failures();
  return r;
}

Stats evaluate(const Policy& policy, std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario, int n_episodes,
               std::uint64_t seed, const EvalOptions& opts) {
  if (n_episodes < 1) throw ConfigError("n_episodes must be at least 1");
  std::vector<EpisodeRecord> out(static_cast<std::size_t>(n_episodes));
  int workers = opts.workers > 0 ? opts.workers : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min(workers, n_episodes);

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::atomic<bool> failed{false};
  auto work = [&] {
    try {
      Environment env(htm, scenario, opts.human);
      for (int i = next++; i < n_episodes && !failed; i = next++) {
        const std::uint64_t s = derive_seed(seed, kEpisodeStream, static_cast<std::uint64_t>(i));
        auto rec = run_episode(policy, env, s);
        rec.trial = i;
        out[static_cast<std::size_t>(i)] = rec;
      }
    } catch (...) {
      if (!failed.exchange(true)) error = std::current_exception();
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (error) std::rethrow_exception(error);
  return summarize_makespans(std::move(out));
}

}  // namespace hrc
