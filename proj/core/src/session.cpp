#include "hrcplan/session.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "hrcplan/bench.hpp"

namespace hrc {

namespace {

using nlohmann::json;

class SessionSampler final : public Sampler {
 public:
  explicit SessionSampler(std::uint64_t seed) : inner_(seed) {}
  int duration(const ActionSpec& a, Agent agent, double cv, int min_value) override {
    return inner_.duration(a, agent, cv, min_value);
  }
  bool fails(double p) override { return inner_.fails(p); }
  bool change_pending(double) override { return false; }
  int change_offset(const Pmf& offsets) override { return inner_.change_offset(offsets); }
  int detection_delay(ActionId human_choice, int nominal) override {
    return inner_.detection_delay(human_choice, nominal);
  }

 private:
  RandomSampler inner_;
};

// Robot decision that is due before any further event (zero-time events go first).
bool robot_decision_next(const Engine& engine) {
  if (engine.pending() != Pending::Robot) return false;
  Engine probe = engine;
  std::vector<EventRecord> events;
  return probe.advance(&events, StopMode::EachEvent) == Pending::Robot && events.empty();
}

json parse_object(std::string_view text, const char* what) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("malformed {}: {}", what, e.what()));
  }
  if (!j.is_object()) throw ConfigError(fmt::format("{} must be a JSON object", what));
  return j;
}

}  // namespace

std::string_view to_string(Awaiting a) {
  switch (a) {
    case Awaiting::Choice: return "choice";
    case Awaiting::Continue: return "continue";
    case Awaiting::Nothing: return "nothing";
  }
  return "nothing";
}

std::string_view to_string(SessionStatus s) {
  switch (s) {
    case SessionStatus::AwaitingHumanChoice: return "awaiting_human_choice";
    case SessionStatus::Advancing: return "advancing";
    case SessionStatus::Done: return "done";
  }
  return "done";
}

HumanChoice HumanChoice::parse(std::string_view text) {
  const json j = parse_object(text, "choice");
  if (!j.contains("type") || !j["type"].is_string()) throw ConfigError("choice needs a string \"type\"");
  const std::string type = j["type"].get<std::string>();
  HumanChoice c;
  if (type == "idle") {
    c.type = Type::Idle;
  } else if (type == "change_of_mind") {
    c.type = Type::ChangeOfMind;
  } else if (type == "continue") {
    c.type = Type::Continue;
  } else if (type == "action") {
    if (!j.contains("action_id") || !j["action_id"].is_number_integer())
      throw ConfigError("choice of type \"action\" needs an integer \"action_id\"");
    c.type = Type::Action;
    c.action = j["action_id"].get<ActionId>();
  } else {
    throw ConfigError(fmt::format("unknown choice type '{}'", type));
  }
  return c;
}

std::string Frame::to_json() const {
  json j = {{"seq", seq},
            {"k", k},
            {"dt", dt},
            {"event", event},
            {"event_action", event_action},
            {"s_a", s_a},
            {"human_action", human_action},
            {"robot_action", robot_action},
            {"detected", detected},
            {"human_waiting", human_waiting},
            {"clock", clock},
            {"reward", -clock},
            {"feasible_human", feasible_human},
            {"awaiting", std::string(to_string(awaiting))},
            {"can_change_mind", can_change_mind},
            {"done", done}};
  if (done) j["makespan"] = clock;
  return j.dump();
}

std::unique_ptr<Sampler> make_session_sampler(std::uint64_t seed) {
  return std::make_unique<SessionSampler>(derive_seed(seed, 1));
}

Session::Session(std::string id, std::shared_ptr<const Htm> htm, ScenarioConfig scenario,
                 std::shared_ptr<const Policy> policy, std::uint64_t seed)
    : id_(std::move(id)),
      policy_(std::move(policy)),
      policy_name_(policy_ ? policy_->name() : ""),
      seed_(seed),
      engine_(std::move(htm), std::move(scenario)),
      sampler_(make_session_sampler(seed)),
      policy_rng_(derive_seed(seed, 3)) {
  if (!policy_) throw ConfigError("session needs a robot policy");
  engine_.reset();
  emit(nullptr);
  run();
}

Awaiting Session::awaiting() const noexcept {
  if (engine_.done()) return Awaiting::Nothing;
  return engine_.pending() == Pending::Human ? Awaiting::Choice : Awaiting::Continue;
}

std::vector<ActionId> Session::feasible_human() const {
  if (engine_.done() || engine_.pending() != Pending::Human) return {};
  return engine_.human_options();
}

void Session::emit(const EventRecord* ev) {
  Frame f;
  f.seq = static_cast<long>(frames_.size());
  f.k = engine_.events();
  if (ev) {
    f.dt = ev->dt;
    f.event = std::string(to_string(ev->kind));
    f.event_action = ev->action;
  } else {
    f.event = "start";
  }
  const WorldState& s = engine_.state();
  f.s_a.assign(s.task.values().begin(), s.task.values().end());
  f.human_action = s.human_action;
  f.robot_action = s.robot_action;
  f.detected = s.detected;
  f.human_waiting = s.human_waiting;
  f.clock = engine_.clock();
  f.done = engine_.done();
  frames_.push_back(std::move(f));
}

void Session::run() {
  status_ = SessionStatus::Advancing;
  auto settle_robot = [&] {
    while (robot_decision_next(engine_)) {
      const auto options = engine_.robot_options();
      const ActionId a = policy_->act(engine_.htm(), engine_.state(), options, policy_rng_);
      if (std::find(options.begin(), options.end(), a) == options.end())
        throw std::logic_error(fmt::format("policy '{}' chose infeasible action {}", policy_name_, a));
      inputs_.push_back(SessionInput{SessionInput::Kind::Robot, a, engine_.events()});
      engine_.choose_robot(a, *sampler_);
    }
  };
  // the start frame already shows the state before any robot decision
  for (;;) {
    settle_robot();
    if (engine_.done() || engine_.pending() == Pending::Human) break;
    std::vector<EventRecord> events;
    engine_.advance(&events, StopMode::EachEvent);
    settle_robot();
    for (const auto& ev : events) emit(&ev);
    if (engine_.done() || engine_.pending() == Pending::Human) break;
    if (engine_.can_change_mind()) break;
  }
  status_ = engine_.done() ? SessionStatus::Done : SessionStatus::AwaitingHumanChoice;
  Frame& last = frames_.back();
  last.done = engine_.done();
  last.awaiting = awaiting();
  last.feasible_human = feasible_human();
  last.can_change_mind = engine_.can_change_mind();
}

std::vector<Frame> Session::submit(const HumanChoice& choice) {
  if (status_ == SessionStatus::Done) throw std::logic_error("session is done");
  const std::size_t first = frames_.size();
  const Awaiting now = awaiting();
  auto refuse = [&](std::string_view why) {
    std::string allowed;
    if (now == Awaiting::Choice) {
      allowed = fmt::format("actions {}", fmt::join(feasible_human(), ","));
    } else {
      allowed = engine_.can_change_mind() ? "continue, change_of_mind" : "continue";
    }
    throw InfeasibleAction(fmt::format("{}; allowed: {}", why, allowed));
  };
  switch (choice.type) {
    case HumanChoice::Type::Action:
    case HumanChoice::Type::Idle: {
      if (now != Awaiting::Choice) refuse("no human decision is pending");
      const ActionId a = choice.type == HumanChoice::Type::Idle ? kIdle : choice.action;
      const auto options = feasible_human();
      if (std::find(options.begin(), options.end(), a) == options.end())
        refuse(fmt::format("action {} is not feasible", a));
      inputs_.push_back(SessionInput{SessionInput::Kind::Human, a, engine_.events()});
      engine_.choose_human(a, *sampler_);
      break;
    }
    case HumanChoice::Type::ChangeOfMind:
      if (now != Awaiting::Continue || !engine_.can_change_mind())
        refuse("change of mind needs a detected individual action in progress");
      inputs_.push_back(SessionInput{SessionInput::Kind::ChangeOfMind, kIdle, engine_.events()});
      engine_.request_change_of_mind();
      break;
    case HumanChoice::Type::Continue:
      if (now != Awaiting::Continue) refuse("a human decision is pending");
      break;
  }
  run();
  return {frames_.begin() + static_cast<std::ptrdiff_t>(first), frames_.end()};
}

Engine replay_session(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario, std::uint64_t seed,
                      const std::vector<SessionInput>& inputs, int until_events) {
  Engine engine(std::move(htm), scenario);
  engine.reset();
  const auto sampler = make_session_sampler(seed);
  std::size_t i = 0;
  for (;;) {
    if (i < inputs.size() && inputs[i].at_event == engine.events()) {
      const SessionInput& in = inputs[i++];
      switch (in.kind) {
        case SessionInput::Kind::Human: engine.choose_human(in.action, *sampler); break;
        case SessionInput::Kind::Robot: engine.choose_robot(in.action, *sampler); break;
        case SessionInput::Kind::ChangeOfMind: engine.request_change_of_mind(); break;
      }
      continue;
    }
    if (engine.done() || (i == inputs.size() && engine.events() >= until_events)) break;
    if (engine.pending() == Pending::Human) throw std::logic_error("input log ends at a human decision");
    std::vector<EventRecord> events;
    if (engine.advance(&events, StopMode::EachEvent) == Pending::Robot && events.empty())
      throw std::logic_error("input log is missing a robot decision");
  }
  if (i != inputs.size()) throw std::logic_error("input log continues past the end of the episode");
  return engine;
}

SessionRequest SessionRequest::parse(std::string_view text) {
  const json j = parse_object(text, "session request");
  SessionRequest r;
  if (j.contains("htm")) {
    const auto& h = j["htm"];
    if (h.is_string()) {
      r.htm_ref = h.get<std::string>();
    } else if (h.is_object()) {
      r.htm_ref = h.dump();
    } else {
      throw ConfigError("\"htm\" must be a reference string or an HTM document");
    }
  }
  if (j.contains("scenario")) {
    if (!j["scenario"].is_object()) throw ConfigError("\"scenario\" must be an object");
    r.scenario = parse_scenario(j["scenario"].dump());
  }
  if (j.contains("policy")) {
    if (!j["policy"].is_string()) throw ConfigError("\"policy\" must be a string");
    r.policy = j["policy"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) throw ConfigError("\"seed\" must be a non-negative integer");
    r.seed = j["seed"].get<std::uint64_t>();
  }
  return r;
}

namespace {

std::shared_ptr<const Htm> resolve_htm(const std::string& ref) {
  if (ref == "chair") return std::make_shared<const Htm>(chair_htm());
  if (ref.rfind("random:", 0) == 0) {
    int n = 0;
    unsigned long long seed = 0;
    char tail = 0;
    if (std::sscanf(ref.c_str() + 7, "%d,%llu%c", &n, &seed, &tail) != 2)
      throw ConfigError(fmt::format("bad random HTM reference '{}' (expected random:n,seed)", ref));
    return std::make_shared<const Htm>(generate_random_htm(n, seed));
  }
  if (!ref.empty() && ref.front() == '{') return std::make_shared<const Htm>(parse_htm(ref));
  throw ConfigError(fmt::format("unknown HTM reference '{}'", ref));
}

}  // namespace

std::shared_ptr<const Policy> SessionManager::policy_for(const std::string& htm_key, std::shared_ptr<const Htm> htm,
                                                         const SessionRequest& req) {
  if (req.policy == "greedy") return std::make_shared<const GreedyPolicy>();
  if (req.policy == "random") return std::make_shared<const RandomPolicy>();
  if (req.policy != "graph" && req.policy != "rl")
    throw ConfigError(fmt::format("unknown policy '{}' (expected graph, rl, greedy or random)", req.policy));
  const std::string cache_key =
      fmt::format("{}\n{}\n{}\n{}", req.policy, htm_key, to_json(req.scenario, -1), req.policy == "rl" ? req.seed : 0);
  {
    std::lock_guard lock(mu_);
    if (auto it = policy_cache_.find(cache_key); it != policy_cache_.end()) return it->second;
  }
  BenchSuite suite;
  suite.scenario_name = "session";
  suite.htm = std::move(htm);
  suite.scenario = req.scenario;
  suite.seed = req.seed;
  suite.train.episodes = opts_.rl_episodes;
  suite.graph_max_nodes = opts_.graph_max_nodes;
  auto policy = make_policy(req.policy, suite);
  std::lock_guard lock(mu_);
  return policy_cache_.emplace(cache_key, std::move(policy)).first->second;
}

std::shared_ptr<SessionManager::Entry> SessionManager::create(const SessionRequest& req) {
  req.scenario.validate();
  auto htm = resolve_htm(req.htm_ref);
  auto policy = policy_for(req.htm_ref, htm, req);
  std::string id;
  {
    std::lock_guard lock(mu_);
    id = fmt::format("s{:016x}", derive_seed(opts_.id_seed, 0x1d, counter_++));
  }
  auto entry = std::make_shared<Entry>(id, std::move(htm), req.scenario, std::move(policy), req.seed);
  std::lock_guard lock(mu_);
  sessions_.emplace(id, entry);
  return entry;
}

std::shared_ptr<SessionManager::Entry> SessionManager::find(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

bool SessionManager::remove(const std::string& id) {
  std::shared_ptr<Entry> entry;
  {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) return false;
    entry = it->second;
    sessions_.erase(it);
  }
  {
    std::lock_guard lock(entry->mu);
    entry->closed = true;
  }
  entry->changed.notify_all();
  return true;
}

std::size_t SessionManager::size() const {
  std::lock_guard lock(mu_);
  return sessions_.size();
}

namespace {

json frames_json(const std::vector<Frame>& frames) {
  json arr = json::array();
  for (const auto& f : frames) arr.push_back(json::parse(f.to_json()));
  return arr;
}

ApiResponse error(int status, std::string_view message, json extra = json::object()) {
  extra["error"] = message;
  return {status, extra.dump()};
}

}  // namespace

std::string session_json(const Session& s) {
  json j = {{"id", s.id()},
            {"status", std::string(to_string(s.status()))},
            {"policy", s.policy_name()},
            {"seed", s.seed()},
            {"awaiting", std::string(to_string(s.awaiting()))},
            {"feasible_human", s.feasible_human()},
            {"can_change_mind", s.engine().can_change_mind()},
            {"n_frames", s.frames().size()},
            {"frame", json::parse(s.last_frame().to_json())}};
  if (s.engine().done()) j["makespan"] = s.engine().clock();
  return j.dump();
}

ApiResponse handle_api(SessionManager& manager, std::string_view method, std::string_view target,
                       std::string_view body) {
  std::string_view path = target.substr(0, target.find('?'));
  if (path.size() > 1 && path.back() == '/') path.remove_suffix(1);
  constexpr std::string_view prefix = "/sessions";
  if (path.substr(0, prefix.size()) != prefix || (path.size() > prefix.size() && path[prefix.size()] != '/'))
    return error(404, "not found");
  std::string_view rest = path.substr(prefix.size());
  if (rest.empty()) {
    if (method != "POST") return error(405, "method not allowed");
    try {
      auto entry = manager.create(SessionRequest::parse(body.empty() ? "{}" : body));
      std::lock_guard lock(entry->mu);
      json j = json::parse(session_json(entry->session));
      j["frames"] = frames_json(entry->session.frames());
      return {201, j.dump()};
    } catch (const ConfigError& e) {
      return error(400, e.what());
    } catch (const BudgetExceeded& e) {
      return error(422, e.what());
    }
  }
  rest.remove_prefix(1);
  const std::size_t slash = rest.find('/');
  const std::string id(rest.substr(0, slash));
  const std::string_view sub = slash == std::string_view::npos ? std::string_view{} : rest.substr(slash + 1);
  auto entry = manager.find(id);
  if (!entry) return error(404, fmt::format("unknown session '{}'", id));
  if (sub.empty()) {
    if (method == "GET") {
      std::lock_guard lock(entry->mu);
      return {200, session_json(entry->session)};
    }
    if (method == "DELETE") {
      manager.remove(id);
      return {204, ""};
    }
    return error(405, "method not allowed");
  }
  if (sub == "choice") {
    if (method != "POST") return error(405, "method not allowed");
    HumanChoice choice;
    try {
      choice = HumanChoice::parse(body);
    } catch (const ConfigError& e) {
      return error(400, e.what());
    }
    std::vector<Frame> frames;
    {
      std::lock_guard lock(entry->mu);
      Session& s = entry->session;
      if (entry->closed) return error(410, "session closed");
      try {
        frames = s.submit(choice);
      } catch (const InfeasibleAction& e) {
        return error(409, e.what(),
                     {{"feasible_human", s.feasible_human()},
                      {"awaiting", std::string(to_string(s.awaiting()))},
                      {"can_change_mind", s.engine().can_change_mind()}});
      } catch (const std::logic_error& e) {
        return error(409, e.what(), {{"status", std::string(to_string(s.status()))}});
      }
    }
    entry->changed.notify_all();
    json j = {{"frames", frames_json(frames)}};
    return {200, j.dump()};
  }
  return error(404, "not found");
}

}  // namespace hrc
