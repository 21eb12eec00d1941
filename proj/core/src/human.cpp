#include "hrcplan/human.hpp"

#include <algorithm>

namespace hrc {

std::vector<ActionId> human_candidates(const Engine& engine) {
  std::vector<ActionId> out;
  for (ActionId a : engine.human_options()) {
    if (a != kIdle) out.push_back(a);
  }
  const ActionId dropped = engine.hidden().abandoned;
  if (dropped != kIdle && out.size() > 1) {
    out.erase(std::remove(out.begin(), out.end(), dropped), out.end());
  }
  return out;
}

ActionId HumanModel::sample(const Engine& engine, Rng& rng) const {
  const auto dist = distribution(engine);
  if (dist.size() == 1) return dist.front().first;
  double u = uniform01(rng);
  for (const auto& [a, p] : dist) {
    if (u < p) return a;
    u -= p;
  }
  return dist.back().first;
}

ChoiceDistribution UniformHuman::distribution(const Engine& engine) const {
  const auto cands = human_candidates(engine);
  if (cands.empty()) return {{kIdle, 1.0}};
  ChoiceDistribution out;
  const double p = 1.0 / static_cast<double>(cands.size());
  for (ActionId a : cands) out.emplace_back(a, p);
  return out;
}

ChoiceDistribution LowestIdHuman::distribution(const Engine& engine) const {
  const auto cands = human_candidates(engine);
  return {{cands.empty() ? kIdle : cands.front(), 1.0}};
}

std::shared_ptr<const HumanModel> default_human() {
  static const auto model = std::make_shared<const UniformHuman>();
  return model;
}

}  // namespace hrc
