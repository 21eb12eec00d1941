#include "hrcplan/htm.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace hrc {

using nlohmann::json;

std::string_view to_string(Capability c) {
  switch (c) {
    case Capability::HumanOnly: return "human_only";
    case Capability::RobotOnly: return "robot_only";
    case Capability::Either: return "either";
    case Capability::Joint: return "joint";
  }
  return "?";
}

std::string_view to_string(Agent a) { return a == Agent::Human ? "human" : "robot"; }

std::string_view to_string(NodeKind k) {
  switch (k) {
    case NodeKind::Sequential: return "sequential";
    case NodeKind::Independent: return "independent";
    case NodeKind::Parallel: return "parallel";
  }
  return "?";
}

bool ActionSpec::allows(Agent agent) const noexcept {
  switch (capability) {
    case Capability::HumanOnly: return agent == Agent::Human;
    case Capability::RobotOnly: return agent == Agent::Robot;
    case Capability::Either:
    case Capability::Joint: return true;
  }
  return false;
}

TaskState::TaskState(std::vector<std::int8_t> values) : values_(std::move(values)) {
  for (auto v : values_) {
    if (v < kFailed || v > kDone) throw std::invalid_argument("task state entries must be in {-1,0,1}");
  }
}

void TaskState::set(ActionId base, std::int8_t v) {
  if (v < kFailed || v > kDone) throw std::invalid_argument("task state entries must be in {-1,0,1}");
  values_.at(static_cast<std::size_t>(base - 1)) = v;
}

bool TaskState::complete() const noexcept {
  return std::all_of(values_.begin(), values_.end(), [](std::int8_t v) { return v == kDone; });
}

bool is_complete(const TaskState& s) { return s.complete(); }

namespace {

void validate_spec(const ActionSpec& a) {
  auto fail = [&](const std::string& why) {
    throw ConfigError(fmt::format("action {} ('{}'): {}", a.id, a.name, why));
  };
  if (a.is_joint() && a.duration_h != a.duration_r) fail("joint action with unequal durations");
  if (a.allows(Agent::Human) && a.duration_h < 1) fail("duration_h must be >= 1");
  if (a.allows(Agent::Robot) && a.duration_r < 1) fail("duration_r must be >= 1");
  if (!(a.p_fail >= 0.0 && a.p_fail <= 1.0)) fail("p_fail must lie in [0,1]");
  if (!(a.duration_cv >= 0.0)) fail("duration_cv must be >= 0");
}

}  // namespace

Htm::Htm(std::vector<ActionSpec> actions, std::vector<HtmNode> nodes,
         std::vector<ActionSpec> recovery_overrides)
    : nodes_(std::move(nodes)) {
  n_ = actions.size();
  if (n_ == 0) throw ConfigError("HTM has no actions");
  if (nodes_.empty()) throw ConfigError("HTM has no root node");

  std::sort(actions.begin(), actions.end(),
            [](const ActionSpec& a, const ActionSpec& b) { return a.id < b.id; });
  for (std::size_t i = 0; i < n_; ++i) {
    if (i > 0 && actions[i].id == actions[i - 1].id)
      throw ConfigError(fmt::format("duplicate action id {}", actions[i].id));
    if (actions[i].id != static_cast<ActionId>(i + 1))
      throw ConfigError(fmt::format("base action ids must be 1..{} (found {})", n_, actions[i].id));
    if (actions[i].recovery_of)
      throw ConfigError(fmt::format("action {} marked recovery_of within the base range", actions[i].id));
    validate_spec(actions[i]);
  }

  actions_ = std::move(actions);
  actions_.reserve(2 * n_);
  for (std::size_t i = 0; i < n_; ++i) {
    ActionSpec r = actions_[i];
    r.id = static_cast<ActionId>(n_ + i + 1);
    r.name = "recover " + actions_[i].name;
    r.recovery_of = actions_[i].id;
    actions_.push_back(std::move(r));
  }
  std::vector<bool> overridden(n_, false);
  for (auto& r : recovery_overrides) {
    if (!is_recovery(r.id)) throw ConfigError(fmt::format("recovery action id {} outside {}..{}", r.id, n_ + 1, 2 * n_));
    const ActionId base = r.id - static_cast<ActionId>(n_);
    if (r.recovery_of && *r.recovery_of != base)
      throw ConfigError(fmt::format("recovery action {} must recover action {}", r.id, base));
    auto slot = static_cast<std::size_t>(base - 1);
    if (overridden[slot]) throw ConfigError(fmt::format("duplicate action id {}", r.id));
    overridden[slot] = true;
    r.recovery_of = base;
    if (r.name.empty()) r.name = "recover " + actions_[slot].name;
    validate_spec(r);
    actions_[n_ + slot] = std::move(r);
  }

  derive_precedence();
}

const ActionSpec& Htm::action(ActionId id) const {
  if (!contains(id)) throw std::out_of_range(fmt::format("unknown action id {}", id));
  return actions_[static_cast<std::size_t>(id - 1)];
}

ActionId Htm::base_of(ActionId id) const {
  if (is_base(id)) return id;
  if (is_recovery(id)) return id - static_cast<ActionId>(n_);
  throw std::out_of_range(fmt::format("unknown action id {}", id));
}

ActionId Htm::recovery_for(ActionId base) const {
  if (!is_base(base)) throw std::out_of_range(fmt::format("not a base action: {}", base));
  return base + static_cast<ActionId>(n_);
}

std::span<const ActionId> Htm::prerequisites(ActionId base) const {
  return prereq_.at(static_cast<std::size_t>(base_of(base) - 1));
}

std::size_t Htm::robot_action_count() const noexcept {
  return 1 + static_cast<std::size_t>(std::count_if(actions_.begin(), actions_.end(), [](const ActionSpec& a) {
           return a.capability != Capability::HumanOnly;
         }));
}

std::size_t Htm::human_action_count() const noexcept {
  return 1 + static_cast<std::size_t>(std::count_if(actions_.begin(), actions_.end(), [](const ActionSpec& a) {
           return a.capability != Capability::RobotOnly;
         }));
}

void Htm::derive_precedence() {
  prereq_.assign(n_, {});
  std::vector<int> seen(n_, 0);
  std::vector<int> visiting(nodes_.size(), 0);

  // Collects the leaves of a subtree; appends each leaf's prerequisites from
  // enclosing sequential nodes as it goes.
  auto collect = [&](auto&& self, std::size_t node_idx, const std::vector<ActionId>& inherited,
                     std::vector<ActionId>& leaves_out) -> void {
    if (node_idx >= nodes_.size()) throw ConfigError(fmt::format("node reference {} out of range", node_idx));
    if (visiting[node_idx]) throw ConfigError("HTM tree is not acyclic or shares a subtree");
    visiting[node_idx] = 1;
    const HtmNode& node = nodes_[node_idx];
    if (node.children.empty()) throw ConfigError(fmt::format("node {} has no children", node_idx));
    std::vector<ActionId> prefix = inherited;
    for (const auto& child : node.children) {
      std::vector<ActionId> child_leaves;
      if (const auto* leaf = std::get_if<HtmNode::Leaf>(&child)) {
        if (!is_base(leaf->action)) {
          throw ConfigError(is_recovery(leaf->action)
                                ? fmt::format("recovery action {} cannot be a leaf", leaf->action)
                                : fmt::format("leaf references unknown action {}", leaf->action));
        }
        auto slot = static_cast<std::size_t>(leaf->action - 1);
        if (++seen[slot] > 1) throw ConfigError(fmt::format("action {} appears in more than one leaf", leaf->action));
        prereq_[slot] = prefix;
        child_leaves.push_back(leaf->action);
      } else {
        self(self, std::get<HtmNode::Ref>(child).node, prefix, child_leaves);
      }
      if (node.kind == NodeKind::Sequential) prefix.insert(prefix.end(), child_leaves.begin(), child_leaves.end());
      leaves_out.insert(leaves_out.end(), child_leaves.begin(), child_leaves.end());
    }
  };

  std::vector<ActionId> all;
  collect(collect, 0, {}, all);
  for (std::size_t i = 0; i < n_; ++i) {
    if (!seen[i]) throw ConfigError(fmt::format("action {} does not appear in any leaf", i + 1));
    std::sort(prereq_[i].begin(), prereq_[i].end());
  }
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!visiting[i]) throw ConfigError(fmt::format("node {} is not connected to the root", i));
  }
}

bool precedence_satisfied(const Htm& htm, const TaskState& s, ActionId action) {
  for (ActionId p : htm.prerequisites(action)) {
    if (s[p] != TaskState::kDone) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// JSON document

namespace {

Capability parse_capability(const json& v, const std::string& where) {
  if (v.is_number_integer()) {
    int c = v.get<int>();
    if (c < 0 || c > 3) throw ConfigError(fmt::format("{}: capability must be 0..3", where));
    return static_cast<Capability>(c);
  }
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "human_only" || s == "human") return Capability::HumanOnly;
    if (s == "robot_only" || s == "robot") return Capability::RobotOnly;
    if (s == "either") return Capability::Either;
    if (s == "joint") return Capability::Joint;
  }
  throw ConfigError(fmt::format("{}: unknown capability {}", where, v.dump()));
}

NodeKind parse_kind(const json& v, const std::string& where) {
  if (v.is_string()) {
    auto s = v.get<std::string>();
    if (s == "sequential") return NodeKind::Sequential;
    if (s == "independent") return NodeKind::Independent;
    if (s == "parallel") return NodeKind::Parallel;
  }
  throw ConfigError(fmt::format("{}: unknown node kind {}", where, v.dump()));
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(fmt::format("{}: missing field '{}'", where, key));
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(fmt::format("{}: field '{}' has the wrong type", where, key));
  }
}

ActionSpec parse_action(const json& a, const std::string& where, bool recovery) {
  if (!a.is_object()) throw ConfigError(where + ": action must be an object");
  ActionSpec spec;
  spec.id = field<int>(a, "id", where);
  spec.name = a.value("name", fmt::format("A{}", spec.id));
  if (recovery) {
    // Recovery overrides: every parameter optional, filled from the base later.
    if (a.contains("recovery_of")) spec.recovery_of = field<int>(a, "recovery_of", where);
    return spec;
  }
  if (!a.contains("capability")) throw ConfigError(where + ": missing field 'capability'");
  spec.capability = parse_capability(a.at("capability"), where);
  spec.duration_h = a.contains("duration_h") ? field<int>(a, "duration_h", where) : 0;
  spec.duration_r = a.contains("duration_r") ? field<int>(a, "duration_r", where) : 0;
  if (spec.capability == Capability::HumanOnly && !a.contains("duration_h"))
    throw ConfigError(where + ": missing field 'duration_h'");
  if (spec.capability == Capability::RobotOnly && !a.contains("duration_r"))
    throw ConfigError(where + ": missing field 'duration_r'");
  if (spec.capability == Capability::HumanOnly && spec.duration_r == 0) spec.duration_r = spec.duration_h;
  if (spec.capability == Capability::RobotOnly && spec.duration_h == 0) spec.duration_h = spec.duration_r;
  if (spec.capability == Capability::Either || spec.capability == Capability::Joint) {
    if (!a.contains("duration_h") && !a.contains("duration_r"))
      throw ConfigError(where + ": missing field 'duration_h'");
    if (spec.duration_h == 0) spec.duration_h = spec.duration_r;
    if (spec.duration_r == 0) spec.duration_r = spec.duration_h;
  }
  spec.duration_cv = a.value("duration_cv", 0.1);
  spec.p_fail = a.value("p_fail", 0.0);
  return spec;
}

void parse_node(const json& j, const std::string& where, std::vector<HtmNode>& nodes, std::size_t slot) {
  if (!j.is_object()) throw ConfigError(where + ": node must be an object");
  HtmNode node;
  node.kind = parse_kind(j.contains("kind") ? j.at("kind") : json(), where);
  auto it = j.find("children");
  if (it == j.end() || !it->is_array()) throw ConfigError(where + ": node needs a 'children' array");
  for (std::size_t i = 0; i < it->size(); ++i) {
    const json& c = (*it)[i];
    std::string cw = fmt::format("{}/children/{}", where, i);
    if (c.is_object() && c.contains("leaf")) {
      node.children.emplace_back(HtmNode::Leaf{field<int>(c, "leaf", cw)});
    } else {
      std::size_t child_slot = nodes.size();
      nodes.emplace_back();
      parse_node(c, cw, nodes, child_slot);
      node.children.emplace_back(HtmNode::Ref{child_slot});
    }
  }
  nodes[slot] = std::move(node);
}

}  // namespace

Htm parse_htm(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("HTM syntax error at byte {}: {}", e.byte, e.what()));
  }
  if (!doc.is_object()) throw ConfigError("HTM document must be a JSON object");
  auto acts = doc.find("actions");
  if (acts == doc.end() || !acts->is_array()) throw ConfigError("/actions: missing array");

  std::vector<ActionSpec> base;
  std::vector<json> recovery_json;
  std::vector<int> ids;
  for (std::size_t i = 0; i < acts->size(); ++i) {
    const json& a = (*acts)[i];
    std::string where = fmt::format("/actions/{}", i);
    if (a.is_object() && a.contains("recovery_of")) {
      recovery_json.push_back(a);
      continue;
    }
    base.push_back(parse_action(a, where, false));
  }
  // Duplicate detection over all ids before construction for a clearer message.
  for (const auto& a : base) ids.push_back(a.id);
  for (const auto& r : recovery_json) ids.push_back(r.value("id", -1));
  std::sort(ids.begin(), ids.end());
  if (auto d = std::adjacent_find(ids.begin(), ids.end()); d != ids.end())
    throw ConfigError(fmt::format("duplicate action id {}", *d));

  const json* root = nullptr;
  if (auto r = doc.find("root"); r != doc.end()) root = &*r;
  if (!root) throw ConfigError("/root: missing node");

  std::vector<HtmNode> nodes(1);
  if (root->is_object() && root->contains("leaf")) {
    // Degenerate tree: a bare leaf as root.
    nodes[0].kind = NodeKind::Sequential;
    nodes[0].children.emplace_back(HtmNode::Leaf{field<int>(*root, "leaf", "/root")});
  } else {
    parse_node(*root, "/root", nodes, 0);
  }

  // Recovery overrides start from the base action's parameters.
  std::vector<ActionSpec> overrides;
  std::size_t n = base.size();
  for (const auto& rj : recovery_json) {
    std::string where = fmt::format("/actions (id {})", rj.value("id", -1));
    int id = field<int>(rj, "id", where);
    int of = field<int>(rj, "recovery_of", where);
    auto b = std::find_if(base.begin(), base.end(), [&](const ActionSpec& s) { return s.id == of; });
    if (b == base.end()) throw ConfigError(fmt::format("{}: recovery_of unknown action {}", where, of));
    ActionSpec r = *b;
    r.id = id;
    r.name = rj.value("name", "recover " + b->name);
    if (rj.contains("capability")) r.capability = parse_capability(rj["capability"], where);
    r.duration_h = rj.value("duration_h", r.duration_h);
    r.duration_r = rj.value("duration_r", r.duration_r);
    r.duration_cv = rj.value("duration_cv", r.duration_cv);
    r.p_fail = rj.value("p_fail", r.p_fail);
    r.recovery_of = of;
    if (id != of + static_cast<int>(n))
      throw ConfigError(fmt::format("{}: recovery id must equal base id + N ({})", where, of + static_cast<int>(n)));
    overrides.push_back(std::move(r));
  }
  return Htm(std::move(base), std::move(nodes), std::move(overrides));
}

Htm load_htm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open HTM file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_htm(ss.str());
}

namespace {

json node_json(const Htm& htm, std::size_t idx) {
  const HtmNode& node = htm.nodes()[idx];
  json children = json::array();
  for (const auto& c : node.children) {
    if (const auto* leaf = std::get_if<HtmNode::Leaf>(&c)) {
      children.push_back({{"leaf", leaf->action}});
    } else {
      children.push_back(node_json(htm, std::get<HtmNode::Ref>(c).node));
    }
  }
  return {{"kind", std::string(to_string(node.kind))}, {"children", std::move(children)}};
}

json action_json(const ActionSpec& a) {
  json j = {{"id", a.id},
            {"name", a.name},
            {"capability", std::string(to_string(a.capability))},
            {"duration_h", a.duration_h},
            {"duration_r", a.duration_r},
            {"duration_cv", a.duration_cv},
            {"p_fail", a.p_fail}};
  if (a.recovery_of) j["recovery_of"] = *a.recovery_of;
  return j;
}

bool same_params(const ActionSpec& a, const ActionSpec& b) {
  return a.capability == b.capability && a.duration_h == b.duration_h && a.duration_r == b.duration_r &&
         a.duration_cv == b.duration_cv && a.p_fail == b.p_fail;
}

}  // namespace

std::string to_json(const Htm& htm, int indent) {
  json actions = json::array();
  for (ActionId id = 1; id <= static_cast<ActionId>(htm.size()); ++id) actions.push_back(action_json(htm.action(id)));
  // Only recovery actions that differ from their base are written out.
  for (ActionId id = 1; id <= static_cast<ActionId>(htm.size()); ++id) {
    const auto& r = htm.action(htm.recovery_for(id));
    if (!same_params(r, htm.action(id)) || r.name != "recover " + htm.action(id).name)
      actions.push_back(action_json(r));
  }
  json doc = {{"actions", std::move(actions)}, {"root", node_json(htm, htm.root())}};
  return doc.dump(indent);
}

Htm chair_htm() {
  auto act = [](ActionId id, std::string name, Capability c, int dh, int dr) {
    ActionSpec a;
    a.id = id;
    a.name = std::move(name);
    a.capability = c;
    a.duration_h = dh;
    a.duration_r = dr;
    return a;
  };
  std::vector<ActionSpec> actions = {
      act(1, "rail 1", Capability::Either, 8, 10),
      act(2, "rail 2", Capability::Either, 8, 10),
      act(3, "rail 3", Capability::Either, 8, 10),
      act(4, "rail 4", Capability::Either, 8, 10),
      act(5, "left side transport", Capability::Joint, 14, 14),
      act(6, "screw 1", Capability::RobotOnly, 6, 6),
      act(7, "screw 2", Capability::RobotOnly, 6, 6),
      act(8, "screw 3", Capability::RobotOnly, 6, 6),
      act(9, "screwing", Capability::HumanOnly, 16, 16),
      act(10, "seat", Capability::HumanOnly, 8, 8),
  };
  using L = HtmNode::Leaf;
  using R = HtmNode::Ref;
  std::vector<HtmNode> nodes(3);
  nodes[0] = {NodeKind::Sequential, {R{1}, L{5}, R{2}, L{9}, L{10}}};
  nodes[1] = {NodeKind::Independent, {L{1}, L{2}, L{3}, L{4}}};
  nodes[2] = {NodeKind::Independent, {L{6}, L{7}, L{8}}};
  return Htm(std::move(actions), std::move(nodes));
}

}  // namespace hrc
