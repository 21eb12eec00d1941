#pragma once

#include <memory>
#include <vector>

#include "hrcplan/htm.hpp"
#include "hrcplan/scenario.hpp"

namespace hrc::test {

inline ActionSpec act(ActionId id, Capability cap, int dh, int dr, double cv = 0.0, double p_fail = 0.0) {
  ActionSpec a;
  a.id = id;
  a.name = "a" + std::to_string(id);
  a.capability = cap;
  a.duration_h = dh;
  a.duration_r = dr;
  a.duration_cv = cv;
  a.p_fail = p_fail;
  return a;
}

/// Flat tree of one kind over all actions.
inline std::shared_ptr<const Htm> flat(std::vector<ActionSpec> actions, NodeKind kind = NodeKind::Sequential) {
  HtmNode root;
  root.kind = kind;
  for (const auto& a : actions) root.children.emplace_back(HtmNode::Leaf{a.id});
  return std::make_shared<const Htm>(std::move(actions), std::vector<HtmNode>{root});
}

inline ScenarioConfig deterministic_scenario(int detect_delay = 2) {
  ScenarioConfig sc;
  sc.detect_delay = detect_delay;
  sc.duration_cv = 0.0;
  sc.p_fail = 0.0;
  return sc;
}

}  // namespace hrc::test
