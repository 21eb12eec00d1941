#include "hrcplan/intent.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace hrc {

namespace {

double dot(const Point& a, const Point& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
double norm(const Point& a) { return std::sqrt(dot(a, a)); }
Point sub(const Point& a, const Point& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }

bool finite(const Point& p) { return std::isfinite(p[0]) && std::isfinite(p[1]) && std::isfinite(p[2]); }

const Goal& goal_by_id(const GoalSet& goals, int id) {
  for (const auto& g : goals.goals) {
    if (g.id == id) return g;
  }
  throw ConfigError(fmt::format("unknown goal id {}", id));
}

}  // namespace

void GoalSet::validate() const {
  if (goals.empty()) throw ConfigError("goal set is empty");
  if (!(rho >= 0.0 && rho <= 1.0)) throw ConfigError(fmt::format("rho {} outside [0,1]", rho));
  for (const auto& g : goals) {
    if (!finite(g.position)) throw ConfigError(fmt::format("goal {} has a non-finite position", g.id));
  }
}

Belief Belief::uniform(std::size_t n) { return Belief{std::vector<double>(n, 1.0 / static_cast<double>(n))}; }

double Belief::sum() const {
  double s = 0.0;
  for (double p : probs) s += p;
  return s;
}

std::vector<FeatureLikelihood> feature_likelihoods(const Observation& obs, const GoalSet& goals,
                                                   const IntentParams& params) {
  std::vector<FeatureLikelihood> out;
  out.reserve(goals.size());
  const double speed = norm(obs.velocity);
  for (const auto& g : goals.goals) {
    const Point to_goal = sub(g.position, obs.position);
    const double dist = norm(to_goal);
    FeatureLikelihood f;
    f.proximity = std::exp(-params.lambda * dist);
    if (speed >= params.eps_v && dist > 1e-12) {
      const double cos_phi = std::clamp(dot(obs.velocity, to_goal) / (speed * dist), -1.0, 1.0);
      f.alignment = std::exp(params.kappa * (cos_phi - 1.0));
    }
    out.push_back(f);
  }
  return out;
}

std::vector<double> likelihoods(const Observation& obs, const GoalSet& goals, const IntentParams& params) {
  std::vector<double> out;
  for (const auto& f : feature_likelihoods(obs, goals, params)) out.push_back(f.value());
  return out;
}

Belief predict(const Belief& b, double rho) {
  const std::size_t n = b.probs.size();
  if (n <= 1) return b;
  const double off = (1.0 - rho) / static_cast<double>(n - 1);
  const double total = b.sum();
  Belief out{std::vector<double>(n)};
  for (std::size_t i = 0; i < n; ++i) out.probs[i] = rho * b.probs[i] + off * (total - b.probs[i]);
  return out;
}

UpdateResult update_with_likelihoods(const Belief& b, std::span<const double> lik, double rho) {
  if (lik.size() != b.probs.size()) throw std::invalid_argument("likelihood/belief size mismatch");
  UpdateResult r{predict(b, rho), false};
  double z = 0.0;
  for (std::size_t i = 0; i < lik.size(); ++i) {
    r.belief.probs[i] *= lik[i];
    z += r.belief.probs[i];
  }
  if (!(z > 0.0) || !std::isfinite(z)) {
    r.belief = Belief::uniform(lik.size());
    r.degenerate = true;
    return r;
  }
  for (double& p : r.belief.probs) p /= z;
  return r;
}

UpdateResult belief_update(const Belief& b, const Observation& obs, const GoalSet& goals,
                           const IntentParams& params) {
  const auto lik = likelihoods(obs, goals, params);
  return update_with_likelihoods(b, lik, goals.rho);
}

int map_goal(const Belief& b, const GoalSet& goals) {
  if (b.probs.size() != goals.size() || goals.goals.empty()) throw std::invalid_argument("belief/goal size mismatch");
  std::size_t best = 0;
  for (std::size_t i = 1; i < b.probs.size(); ++i) {
    const double p = b.probs[i];
    const double q = b.probs[best];
    if (p > q || (p == q && goals.goals[i].id < goals.goals[best].id)) best = i;
  }
  return goals.goals[best].id;
}

std::vector<Observation> simulate_trajectory(const Point& start, int goal_id, const GoalSet& goals,
                                             const TrajectoryOptions& opts, Rng& rng) {
  const Goal* target = &goal_by_id(goals, goal_id);
  std::normal_distribution<double> noise(0.0, opts.noise_std > 0 ? opts.noise_std : 1.0);
  std::vector<Observation> out;
  Point pos = start;
  for (int t = 1; t <= opts.max_steps; ++t) {
    if (opts.switch_at && t == *opts.switch_at) target = &goal_by_id(goals, opts.switch_goal);
    const Point to_goal = sub(target->position, pos);
    const double dist = norm(to_goal);
    Point step{};
    if (dist > 0.0) {
      const double len = std::min(opts.speed, dist);
      for (int k = 0; k < 3; ++k) step[k] = to_goal[k] / dist * len;
    }
    for (int k = 0; k < 3; ++k) pos[k] += step[k];
    Observation o;
    o.t = t;
    o.velocity = step;
    o.position = pos;
    if (opts.noise_std > 0.0) {
      for (int k = 0; k < 3; ++k) o.position[k] += noise(rng);
    }
    out.push_back(o);
    if (norm(sub(target->position, pos)) <= 1e-12 && !(opts.switch_at && t < *opts.switch_at)) break;
  }
  return out;
}

std::vector<UpdateResult> run_filter(std::span<const Observation> obs, const GoalSet& goals, Belief prior,
                                     const IntentParams& params) {
  std::vector<UpdateResult> out;
  out.reserve(obs.size());
  for (const auto& o : obs) {
    out.push_back(belief_update(prior, o, goals, params));
    prior = out.back().belief;
  }
  return out;
}

GoalSet parse_goals(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("goal set: {}", e.what()));
  }
  GoalSet gs;
  try {
    gs.rho = j.value("rho", 0.9);
    for (const auto& g : j.at("goals")) {
      Goal goal;
      goal.id = g.at("id").get<int>();
      const auto pos = g.at("position").get<std::vector<double>>();
      if (pos.size() < 2 || pos.size() > 3) throw ConfigError(fmt::format("goal {}: position must be 2D or 3D", goal.id));
      for (std::size_t k = 0; k < pos.size(); ++k) goal.position[k] = pos[k];
      goal.action = g.value("action", kIdle);
      gs.goals.push_back(goal);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("goal set: {}", e.what()));
  }
  gs.validate();
  return gs;
}

GoalSet load_goals(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open goal file '{}'", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_goals(ss.str());
}

GoalSet goals_for(const Htm& htm, double rho) {
  GoalSet gs;
  gs.rho = rho;
  const auto n = static_cast<int>(htm.size());
  for (int i = 0; i < n; ++i) {
    const double angle = 2.0 * std::numbers::pi * i / n;
    gs.goals.push_back(Goal{i + 1, Point{2.0 * std::cos(angle), 2.0 * std::sin(angle), 0.0}, i + 1});
  }
  return gs;
}

RandomSampler::DetectionModel intent_detection_model(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario) {
  auto goals = std::make_shared<const GoalSet>(goals_for(*htm));
  const IntentDetection cfg = scenario.intent;
  const int fallback = scenario.detect_delay;
  return [htm, goals, cfg, fallback](ActionId choice, Rng& rng) -> int {
    if (choice == kIdle) return fallback;
    const int goal = htm->base_of(choice);
    TrajectoryOptions opts;
    opts.noise_std = cfg.noise_std;
    opts.max_steps = cfg.max_steps;
    const auto obs = simulate_trajectory(Point{}, goal, *goals, opts, rng);
    Belief b = Belief::uniform(goals->size());
    int t = 0;
    for (const auto& o : obs) {
      ++t;
      b = belief_update(b, o, *goals).belief;
      const int g = map_goal(b, *goals);
      if (g == goal && b.probs[static_cast<std::size_t>(g - 1)] >= cfg.threshold) return std::max(1, t);
    }
    return std::max(1, std::min(cfg.max_steps, t + 1));
  };
}

}  // namespace hrc
