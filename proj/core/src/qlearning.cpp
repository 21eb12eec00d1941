#include "hrcplan/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "hrcplan/evaluate.hpp"

namespace hrc {

std::vector<ActionId> robot_action_space(const Htm& htm) {
  std::vector<ActionId> out{kIdle};
  for (const auto& a : htm.actions()) {
    if (a.allows(Agent::Robot)) out.push_back(a.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

QTable::QTable(std::vector<ActionId> actions, KeyOptions key) : actions_(std::move(actions)), key_(key) {
  const ActionId top = actions_.empty() ? 0 : *std::max_element(actions_.begin(), actions_.end());
  index_.assign(static_cast<std::size_t>(top + 1), -1);
  for (std::size_t i = 0; i < actions_.size(); ++i) index_[static_cast<std::size_t>(actions_[i])] = static_cast<int>(i);
}

std::size_t QTable::index_of(ActionId a) const {
  if (a < 0 || static_cast<std::size_t>(a) >= index_.size() || index_[static_cast<std::size_t>(a)] < 0)
    throw std::out_of_range(fmt::format("action {} is outside the robot action space", a));
  return static_cast<std::size_t>(index_[static_cast<std::size_t>(a)]);
}

const QTable::Row* QTable::find(const std::string& key) const {
  auto it = rows_.find(key);
  return it == rows_.end() ? nullptr : &it->second;
}

QTable::Row& QTable::row(const std::string& key) {
  auto [it, inserted] = rows_.try_emplace(key);
  if (inserted) {
    it->second.q.assign(actions_.size(), 0.0);
    it->second.visits.assign(actions_.size(), 0);
  }
  return it->second;
}

std::optional<ActionId> QTable::best_visited(const std::string& key, std::span<const ActionId> feasible) const {
  const Row* r = find(key);
  if (!r) return std::nullopt;
  std::optional<ActionId> best;
  double best_q = 0.0;
  for (ActionId a : feasible) {
    const std::size_t i = index_of(a);
    if (r->visits[i] == 0) continue;
    if (!best || r->q[i] > best_q || (r->q[i] == best_q && a < *best)) {
      best = a;
      best_q = r->q[i];
    }
  }
  return best;
}

std::string QTable::to_json() const {
  nlohmann::json states = nlohmann::json::object();
  std::map<std::string, const Row*> sorted;
  for (const auto& [k, r] : rows_) sorted.emplace(describe_key(k), &r);
  for (const auto& [text, r] : sorted) states[text] = {{"q", r->q}, {"n", r->visits}};
  nlohmann::json j{{"kind", "q_table"},
                   {"actions", actions_},
                   {"bucket_h", key_.bucket_h},
                   {"bucket_r", key_.bucket_r},
                   {"states", states}};
  return j.dump(1);
}

QTable QTable::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.value("kind", "") != "q_table") throw ConfigError("not a Q-table checkpoint");
    KeyOptions key{j.value("bucket_h", 1), j.value("bucket_r", 1)};
    QTable t(j.at("actions").get<std::vector<ActionId>>(), key);
    for (const auto& [k, v] : j.at("states").items()) {
      Row& r = t.row(parse_key(k));
      r.q = v.at("q").get<std::vector<double>>();
      r.visits = v.at("n").get<std::vector<std::uint32_t>>();
      if (r.q.size() != t.actions_.size() || r.visits.size() != t.actions_.size())
        throw ConfigError(fmt::format("checkpoint row '{}' has the wrong width", k));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("Q-table checkpoint: {}", e.what()));
  }
}

bool operator==(const QTable& a, const QTable& b) {
  if (a.actions_ != b.actions_ || a.rows_.size() != b.rows_.size()) return false;
  for (const auto& [k, r] : a.rows_) {
    const QTable::Row* o = b.find(k);
    if (!o || o->q != r.q || o->visits != r.visits) return false;
  }
  return true;
}

void TrainConfig::validate() const {
  if (episodes < 1) throw ConfigError("episodes must be positive");
  if (!(lr > 0.0 && lr <= 1.0)) throw ConfigError("learning rate must be in (0, 1]");
  for (double e : {eps_start, eps_end}) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("epsilon must be in [0, 1]");
  }
  if (!(eps_decay_fraction > 0.0 && eps_decay_fraction <= 1.0)) throw ConfigError("eps_decay_fraction must be in (0, 1]");
  if (key.bucket_h < 1 || key.bucket_r < 1) throw ConfigError("bucket widths must be at least 1");
}

double TrainConfig::epsilon(long episode) const {
  const double horizon = eps_decay_fraction * static_cast<double>(episodes);
  if (static_cast<double>(episode) >= horizon) return eps_end;
  return eps_start + (eps_end - eps_start) * static_cast<double>(episode) / horizon;
}

namespace {

struct Trainer {
  Environment& env;
  const TrainConfig& cfg;
  QTable& table;
  Rng rng;
  long updates = 0;
  long mask_checks = 0;

  ActionId select(const std::string& key, std::span<const ActionId> feasible, double eps) {
    if (uniform01(rng) < eps) return feasible[uniform_index(rng, feasible.size())];
    const QTable::Row& r = table.row(key);
    ActionId best = feasible.front();
    double best_q = r.q[table.index_of(best)];
    for (ActionId a : feasible) {
      const double q = r.q[table.index_of(a)];
      if (q > best_q || (q == best_q && a < best)) {
        best = a;
        best_q = q;
      }
    }
    return best;
  }

  // Steps through forced choices, returning discounted reward and discount.
  std::pair<double, double> carry(double reward) {
    double ret = reward;
    double discount = env.scenario().gamma;
    while (!env.done()) {
      const auto f = env.feasible();
      if (f.size() != 1) break;
      ret += discount * env.step(f.front()).reward;
      discount *= env.scenario().gamma;
    }
    return {ret, discount};
  }

  void update(const std::string& key, const WorldState& s, ActionId a, double target) {
    // Masking guard: only feasible (state, action) pairs may be written.
    const auto feasible = feasible_actions(env.htm(), s, Agent::Robot);
    ++mask_checks;
    if (std::find(feasible.begin(), feasible.end(), a) == feasible.end())
      throw std::logic_error(fmt::format("masking violated: update of infeasible action {}", a));
    QTable::Row& r = table.row(key);
    const std::size_t i = table.index_of(a);
    ++r.visits[i];
    double alpha = cfg.lr;
    if (cfg.lr_schedule == LearningRate::Visits)
      alpha = std::max(cfg.lr_min, std::min(cfg.lr, 1.0 / std::pow(static_cast<double>(r.visits[i]), cfg.lr_power)));
    r.q[i] += alpha * (target - r.q[i]);
    ++updates;
    if (!std::isfinite(r.q[i]) || std::abs(r.q[i]) > cfg.value_cap)
      throw std::runtime_error(fmt::format("Q-learning diverged: Q({}, {}) = {} after {} updates (cap {})",
                                           describe_key(key), a, r.q[i], updates, cfg.value_cap));
  }

  double max_q(const std::string& key, std::span<const ActionId> feasible) {
    const QTable::Row& r = table.row(key);
    double best = -std::numeric_limits<double>::infinity();
    for (ActionId a : feasible) best = std::max(best, r.q[table.index_of(a)]);
    return best;
  }

  void episode(long ep) {
    env.reset(derive_seed(cfg.seed, 21, static_cast<std::uint64_t>(ep)));
    const double eps = cfg.epsilon(ep);
    carry(0.0);
    while (!env.done()) {
      const WorldState s = env.state();
      const auto feasible = env.feasible();
      const std::string key = table.key(s);
      const ActionId a = select(key, feasible, eps);
      const auto [ret, discount] = carry(env.step(a).reward);
      double target = ret;
      if (!env.done()) {
        const auto next = env.feasible();
        target += discount * max_q(table.key(env.state()), next);
      }
      update(key, s, a, target);
    }
  }
};

}  // namespace

TrainResult train(Environment& env, const TrainConfig& cfg) {
  cfg.validate();
  TrainResult out;
  out.table = QTable(robot_action_space(env.htm()), cfg.key);
  Trainer t{env, cfg, out.table, Rng(derive_seed(cfg.seed, 20))};
  auto snapshot = [&](long ep) {
    QPolicy pol(std::make_shared<const QTable>(out.table));
    const Stats st = evaluate(pol, env.htm_ptr(), env.scenario(), cfg.eval_episodes, derive_seed(cfg.seed, 22),
                              EvalOptions{1, default_human()});
    out.curve.push_back({ep, st.mean, st.std});
  };
  for (long ep = 0; ep < cfg.episodes; ++ep) {
    if (cfg.eval_interval > 0 && ep % cfg.eval_interval == 0 && ep > 0) snapshot(ep);
    t.episode(ep);
  }
  if (cfg.eval_interval > 0) snapshot(cfg.episodes);
  out.updates = t.updates;
  out.mask_checks = t.mask_checks;
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& curve) {
  std::string out = "episode,eval_mean,eval_std\n";
  for (const auto& p : curve) out += fmt::format("{},{:.4f},{:.4f}\n", p.episode, p.eval_mean, p.eval_std);
  return out;
}

ActionId QPolicy::act(const Htm& htm, const WorldState& s, std::span<const ActionId> feasible, Rng& rng) const {
  if (feasible.size() == 1) return feasible.front();
  if (auto a = table_->best_visited(table_->key(s), feasible)) return *a;
  ++misses_;
  return GreedyPolicy().act(htm, s, feasible, rng);
}

}  // namespace hrc
