#include "popsync/mdp.hpp"

#include <algorithm>
#include <stdexcept>

#include "popsync/solver.hpp"

namespace popsync {

namespace {

struct MdpGraph {
  const Mdp* m;
  std::uint32_t n_states() const { return m->n_states(); }
  std::uint32_t n_actions() const { return m->n_actions(); }
  std::span<const StateId> successors(StateId s, ActionId a) const {
    return m->successors(s, a);
  }
};

std::vector<StateId> sorted_unique(std::vector<StateId> ids) {
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

void check_ids(const Mdp& mdp, const std::vector<StateId>& ids, const char* what) {
  for (StateId s : ids)
    if (s >= mdp.n_states())
      throw std::invalid_argument(std::string(what) + ": unknown state id " +
                                  std::to_string(s));
}

}  // namespace

std::optional<StateId> Mdp::state_with_label(std::string_view label) const {
  for (StateId s = 0; s < n_states(); ++s)
    for (const std::string& l : states[s].labels)
      if (l == label)
        return s;
  return std::nullopt;
}

std::optional<StateId> Mdp::state_named(std::string_view name) const {
  for (StateId s = 0; s < n_states(); ++s)
    if (states[s].name == name)
      return s;
  return std::nullopt;
}

std::optional<ActionId> Mdp::action_named(std::string_view name) const {
  for (ActionId a = 0; a < n_actions(); ++a)
    if (actions[a] == name)
      return a;
  return std::nullopt;
}

bool Strategy::in_region(StateId s) const {
  return std::binary_search(region.begin(), region.end(), s);
}

std::vector<std::string> validate(const Mdp& mdp) {
  std::vector<std::string> violations;
  if (mdp.trans.size() != std::size_t{mdp.n_states()} * mdp.n_actions()) {
    violations.push_back("trans not total: expected " +
                         std::to_string(std::size_t{mdp.n_states()} * mdp.n_actions()) +
                         " entries, found " + std::to_string(mdp.trans.size()));
    return violations;
  }
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      const Distribution& d = mdp.dist(s, a);
      std::string where = "state " + std::to_string(s) + " action " + std::to_string(a);
      if (d.support.empty()) {
        violations.push_back("trans not total: " + where + " has no distribution");
        continue;
      }
      if (d.support.size() != d.prob.size()) {
        violations.push_back(where + ": support/probability size mismatch");
        continue;
      }
      if (!std::is_sorted(d.support.begin(), d.support.end()) ||
          std::adjacent_find(d.support.begin(), d.support.end()) != d.support.end())
        violations.push_back(where + ": support not sorted and unique");
      Rational sum;
      bool positive = true;
      for (std::size_t i = 0; i < d.support.size(); ++i) {
        if (d.support[i] >= mdp.n_states())
          violations.push_back(where + ": successor id " + std::to_string(d.support[i]) +
                               " out of range");
        if (d.prob[i].num <= 0)
          positive = false;
        sum += d.prob[i];
      }
      if (!positive)
        violations.push_back(where + ": nonpositive probability");
      if (!sum.is_one())
        violations.push_back(where + ": distribution sums to " + sum.str());
    }
  }
  return violations;
}

std::vector<StateId> prob1(const Mdp& mdp, const std::vector<StateId>& target) {
  if (target.empty())
    throw std::invalid_argument("prob1: empty target");
  check_ids(mdp, target, "prob1");
  MdpGraph g{&mdp};
  detail::SupportSolver<MdpGraph> solver(g);
  detail::ReachFix fix = solver.solve(sorted_unique(target));
  std::vector<StateId> winset;
  for (StateId s = 0; s < mdp.n_states(); ++s)
    if (fix.win[s])
      winset.push_back(s);
  return winset;
}

Strategy extract_strategy(const Mdp& mdp, const std::vector<StateId>& winset,
                          const std::vector<StateId>& target) {
  if (target.empty())
    throw std::invalid_argument("extract_strategy: empty target");
  check_ids(mdp, winset, "extract_strategy");
  check_ids(mdp, target, "extract_strategy");
  std::vector<StateId> region = sorted_unique(winset);
  std::vector<StateId> targets = sorted_unique(target);

  std::vector<std::uint8_t> candidate(mdp.n_states(), 0);
  for (StateId s : region)
    candidate[s] = 1;

  MdpGraph g{&mdp};
  detail::SupportSolver<MdpGraph> solver(g);
  detail::ReachFix fix = solver.closure(targets, candidate);
  if (fix.win != candidate)
    throw std::invalid_argument("extract_strategy: not closed");

  std::vector<std::uint8_t> allowed = solver.allowed_actions(candidate);
  Strategy strat;
  strat.region = region;
  strat.choice = detail::extract_choices(g, fix, allowed, targets);
  return strat;
}

MarkovChain induced_chain(const Mdp& mdp, const Strategy& strategy, StateId initial) {
  if (initial >= mdp.n_states())
    throw std::invalid_argument("induced_chain: unknown initial state");
  MarkovChain chain;
  std::vector<StateId> queue{initial};
  std::vector<std::uint8_t> seen(mdp.n_states(), 0);
  seen[initial] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    StateId s = queue[head];
    auto it = strategy.choice.find(s);
    if (it == strategy.choice.end()) {
      if (!strategy.in_region(s))
        throw std::runtime_error("induced_chain: strategy undefined at state " +
                                 mdp.states[s].name);
      // Terminal in-region state: the chain never leaves it.
      chain.next.emplace(s, Distribution{{s}, {Rational::whole(1)}});
      continue;
    }
    const Distribution& d = mdp.dist(s, it->second);
    chain.next.emplace(s, d);
    for (StateId t : d.support)
      if (!seen[t]) {
        seen[t] = 1;
        queue.push_back(t);
      }
  }
  chain.states = std::move(queue);
  std::sort(chain.states.begin(), chain.states.end());
  return chain;
}

bool chain_almost_sure(const MarkovChain& chain, StateId initial,
                       const std::vector<StateId>& target) {
  if (chain.next.find(initial) == chain.next.end())
    throw std::invalid_argument("chain_almost_sure: initial state not in chain");
  // Dense re-index so the shared reachability check can run on spans.
  std::unordered_map<StateId, std::uint32_t> dense;
  dense.reserve(chain.states.size());
  for (std::uint32_t i = 0; i < chain.states.size(); ++i)
    dense.emplace(chain.states[i], i);
  std::vector<std::vector<std::uint32_t>> succ(chain.states.size());
  for (const auto& [s, d] : chain.next) {
    auto& out = succ[dense.at(s)];
    for (StateId t : d.support)
      out.push_back(dense.at(t));
  }
  std::vector<std::uint32_t> targets;
  for (StateId t : target) {
    auto it = dense.find(t);
    if (it != dense.end())
      targets.push_back(it->second);
  }
  return detail::reaches_target_from_everywhere(
      static_cast<std::uint32_t>(chain.states.size()), dense.at(initial), targets,
      [&](std::uint32_t s) -> const std::vector<std::uint32_t>& { return succ[s]; });
}

}  // namespace popsync
