#include "hrcplan/random_htm.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "hrcplan/rng.hpp"

namespace hrc {

namespace {

std::size_t build(std::vector<HtmNode>& nodes, ActionId first, ActionId last, int depth, const RandomHtmOptions& opts,
                  Rng& rng) {
  const std::size_t id = nodes.size();
  nodes.emplace_back();
  nodes[id].kind = static_cast<NodeKind>(uniform_index(rng, 3));
  const int count = last - first + 1;
  if (depth >= opts.max_depth || count <= 2) {
    for (ActionId a = first; a <= last; ++a) nodes[id].children.emplace_back(HtmNode::Leaf{a});
    return id;
  }
  const int groups = std::min(count, 2 + static_cast<int>(uniform_index(rng, 3)));
  // Random composition of `count` into `groups` positive parts.
  std::vector<int> cuts;
  for (int c = 1; c < count; ++c) cuts.push_back(c);
  std::shuffle(cuts.begin(), cuts.end(), rng);
  cuts.resize(static_cast<std::size_t>(groups - 1));
  std::sort(cuts.begin(), cuts.end());
  cuts.push_back(count);
  int begin = 0;
  for (int end : cuts) {
    const ActionId lo = first + begin;
    const ActionId hi = first + end - 1;
    if (lo == hi) {
      nodes[id].children.emplace_back(HtmNode::Leaf{lo});
    } else {
      const std::size_t child = build(nodes, lo, hi, depth + 1, opts, rng);
      nodes[id].children.emplace_back(HtmNode::Ref{child});
    }
    begin = end;
  }
  return id;
}

}  // namespace

Htm generate_random_htm(int n, std::uint64_t seed, const RandomHtmOptions& opts) {
  if (n < 4 || n % 4 != 0) throw ConfigError(fmt::format("random HTM size {} must be a positive multiple of 4", n));
  if (opts.min_duration < 1 || opts.max_duration < opts.min_duration) throw ConfigError("invalid duration range");
  Rng rng(derive_seed(seed, 0x48544d));
  std::vector<Capability> caps;
  caps.insert(caps.end(), static_cast<std::size_t>(n / 4), Capability::Joint);
  caps.insert(caps.end(), static_cast<std::size_t>(n / 2), Capability::RobotOnly);
  caps.insert(caps.end(), static_cast<std::size_t>(n / 4), Capability::Either);
  std::shuffle(caps.begin(), caps.end(), rng);

  std::uniform_int_distribution<int> dur(opts.min_duration, opts.max_duration);
  std::vector<ActionSpec> actions;
  for (int i = 0; i < n; ++i) {
    ActionSpec a;
    a.id = i + 1;
    a.name = fmt::format("A{}", i + 1);
    a.capability = caps[static_cast<std::size_t>(i)];
    a.duration_h = a.duration_r = dur(rng);
    a.duration_cv = opts.duration_cv;
    actions.push_back(a);
  }
  std::vector<HtmNode> nodes;
  build(nodes, 1, n, 1, opts, rng);
  return Htm(std::move(actions), std::move(nodes));
}

}  // namespace hrc
