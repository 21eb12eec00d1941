#pragma once

#include <condition_variable>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hrcplan/engine.hpp"
#include "hrcplan/policy.hpp"

namespace hrc {

/// Input of the human client. `Continue` lets a paused in-progress action run on.
struct HumanChoice {
  enum class Type : std::uint8_t { Action, Idle, ChangeOfMind, Continue };
  Type type = Type::Idle;
  ActionId action = kIdle;

  /// {"type":"action"|"idle"|"change_of_mind"|"continue","action_id"?}
  static HumanChoice parse(std::string_view json);
};

enum class SessionStatus : std::uint8_t { AwaitingHumanChoice, Advancing, Done };
std::string_view to_string(SessionStatus s);

/// What the client may send at a pause.
enum class Awaiting : std::uint8_t {
  Choice,    // human decision point: an action from feasible_human (0 = idle)
  Continue,  // own action in progress: continue or change_of_mind
  Nothing,   // episode finished
};
std::string_view to_string(Awaiting a);

struct Frame {
  long seq = 0;
  int k = 0;  // events applied so far
  int dt = 0;
  std::string event;  // "start", "H", "R", "D" or "C"
  ActionId event_action = kIdle;
  std::vector<int> s_a;
  ActionId human_action = kUnknown;
  ActionId robot_action = kIdle;
  bool detected = false;
  bool human_waiting = false;
  long clock = 0;
  std::vector<ActionId> feasible_human;  // non-empty only when awaiting a choice
  Awaiting awaiting = Awaiting::Nothing;
  bool can_change_mind = false;
  bool done = false;

  /// "reward" is minus the clock; "makespan" only on the terminal frame.
  std::string to_json() const;
};

/// One client or policy input, stamped with the number of events applied before it.
struct SessionInput {
  enum class Kind : std::uint8_t { Human, Robot, ChangeOfMind };
  Kind kind = Kind::Human;
  ActionId action = kIdle;
  int at_event = 0;
  friend bool operator==(const SessionInput&, const SessionInput&) = default;
};

/// Interactive episode where the client plays the human. Sampled changes of
/// mind are disabled: only the client triggers C. Not thread-safe; the manager
/// serialises access.
class Session {
 public:
  Session(std::string id, std::shared_ptr<const Htm> htm, ScenarioConfig scenario,
          std::shared_ptr<const Policy> policy, std::uint64_t seed);

  const std::string& id() const noexcept { return id_; }
  SessionStatus status() const noexcept { return status_; }
  const Engine& engine() const noexcept { return engine_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& policy_name() const noexcept { return policy_name_; }

  /// Applies a choice and advances to the next pause. Returns the new frames.
  /// Throws InfeasibleAction (with the allowed set in the message) or
  /// std::logic_error when the session is done.
  std::vector<Frame> submit(const HumanChoice& choice);

  const std::vector<Frame>& frames() const noexcept { return frames_; }
  const Frame& last_frame() const { return frames_.back(); }
  const std::vector<SessionInput>& inputs() const noexcept { return inputs_; }
  /// Human choices allowed now (0 = idle); empty unless awaiting a choice.
  std::vector<ActionId> feasible_human() const;
  Awaiting awaiting() const noexcept;

 private:
  void run();
  void emit(const EventRecord* ev);

  std::string id_;
  std::shared_ptr<const Policy> policy_;
  std::string policy_name_;
  std::uint64_t seed_;
  Engine engine_;
  std::unique_ptr<Sampler> sampler_;
  Rng policy_rng_;
  SessionStatus status_ = SessionStatus::Advancing;
  std::vector<Frame> frames_;
  std::vector<SessionInput> inputs_;
};

/// Sampler used by sessions: random durations and outcomes, no sampled C.
std::unique_ptr<Sampler> make_session_sampler(std::uint64_t seed);

/// Re-applies a session's input log to a fresh engine through the transition
/// rules, stopping once `until_events` events are applied and the log is used up.
Engine replay_session(std::shared_ptr<const Htm> htm, const ScenarioConfig& scenario, std::uint64_t seed,
                      const std::vector<SessionInput>& inputs, int until_events);

struct SessionRequest {
  std::string htm_ref = "chair";  // "chair", "random:n,seed", or an inline HTM document
  ScenarioConfig scenario;
  std::string policy = "greedy";  // greedy, random, graph or rl
  std::uint64_t seed = 0;

  /// {"htm": "chair" | "random:8,1" | {...}, "scenario": {...}, "policy": "...", "seed": n}
  static SessionRequest parse(std::string_view json);
};

struct ManagerOptions {
  long rl_episodes = 50'000;
  std::size_t graph_max_nodes = 1'000'000;
  std::uint64_t id_seed = 0x5e55;
};

/// Thread-safe registry of live sessions. Mutations of one session are
/// serialised by its own lock; different sessions proceed independently.
class SessionManager {
 public:
  struct Entry {
    std::mutex mu;
    std::condition_variable changed;
    Session session;
    bool closed = false;
    Entry(std::string id, std::shared_ptr<const Htm> htm, ScenarioConfig sc, std::shared_ptr<const Policy> p,
          std::uint64_t seed)
        : session(std::move(id), std::move(htm), std::move(sc), std::move(p), seed) {}
  };

  explicit SessionManager(ManagerOptions opts = {}) : opts_(opts) {}

  /// Throws ConfigError for unknown HTM or policy references.
  std::shared_ptr<Entry> create(const SessionRequest& req);
  std::shared_ptr<Entry> find(const std::string& id) const;
  bool remove(const std::string& id);
  std::size_t size() const;

 private:
  std::shared_ptr<const Policy> policy_for(const std::string& htm_key, std::shared_ptr<const Htm> htm,
                                           const SessionRequest& req);

  ManagerOptions opts_;
  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::map<std::string, std::shared_ptr<const Policy>> policy_cache_;
  std::uint64_t counter_ = 0;
};

struct ApiResponse {
  int status = 200;
  std::string body;  // JSON
};

/// Transport-independent router for the session endpoints:
/// POST /sessions, GET /sessions/{id}, POST /sessions/{id}/choice, DELETE /sessions/{id}.
ApiResponse handle_api(SessionManager& manager, std::string_view method, std::string_view target,
                       std::string_view body);

/// Session state document returned by GET /sessions/{id}.
std::string session_json(const Session& s);

}  // namespace hrc
