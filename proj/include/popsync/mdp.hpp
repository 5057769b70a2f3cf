#ifndef POPSYNC_MDP_HPP
#define POPSYNC_MDP_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "popsync/rational.hpp"

namespace popsync {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;

// Probability distribution over states; support is sorted by state id,
// probabilities are positive exact rationals summing to one.
struct Distribution {
  std::vector<StateId> support;
  std::vector<Rational> prob;

  bool operator==(const Distribution&) const = default;
};

struct StateInfo {
  std::string name;
  std::vector<std::string> labels;

  bool operator==(const StateInfo&) const = default;
};

// Finite MDP with a total transition function: trans holds one Distribution
// per (state, action) pair at index state * actions.size() + action.
struct Mdp {
  std::vector<StateInfo> states;
  std::vector<std::string> actions;
  std::vector<Distribution> trans;

  std::uint32_t n_states() const { return static_cast<std::uint32_t>(states.size()); }
  std::uint32_t n_actions() const { return static_cast<std::uint32_t>(actions.size()); }

  std::size_t idx(StateId s, ActionId a) const { return std::size_t{s} * actions.size() + a; }
  const Distribution& dist(StateId s, ActionId a) const { return trans[idx(s, a)]; }
  Distribution& dist(StateId s, ActionId a) { return trans[idx(s, a)]; }

  std::span<const StateId> successors(StateId s, ActionId a) const {
    const Distribution& d = trans[idx(s, a)];
    return {d.support.data(), d.support.size()};
  }

  std::optional<StateId> state_with_label(std::string_view label) const;
  std::optional<StateId> state_named(std::string_view name) const;
  std::optional<ActionId> action_named(std::string_view name) const;

  bool operator==(const Mdp&) const = default;
};

// Returns a human-readable violation per broken invariant; empty means valid.
std::vector<std::string> validate(const Mdp& mdp);

// Memoryless deterministic strategy. choice is defined on region minus the
// states the strategy treats as terminal (it never leaves those); region is
// the declared winning set the choices stay inside.
struct Strategy {
  std::unordered_map<StateId, ActionId> choice;
  std::vector<StateId> region;  // sorted

  bool in_region(StateId s) const;
};

// States from which some strategy reaches target with probability one.
// Depends only on transition supports. Returns a sorted vector.
// Throws std::invalid_argument on an empty target.
std::vector<StateId> prob1(const Mdp& mdp, const std::vector<StateId>& target);

// Picks, for every winning non-target state, an action whose support stays in
// winset and makes progress toward target (smallest successor rank, then
// lowest action index). Throws std::invalid_argument("not closed") if winset
// is not a fixpoint of the prob1 iteration for this target.
Strategy extract_strategy(const Mdp& mdp, const std::vector<StateId>& winset,
                          const std::vector<StateId>& target);

// Markov chain over a subset of some id space; state ids are kept from the
// structure the chain was built from.
struct MarkovChain {
  std::vector<StateId> states;  // sorted
  std::unordered_map<StateId, Distribution> next;
};

// Chain induced by following the strategy from initial. States in the
// strategy's region without a choice become absorbing; a reachable state
// outside the region with no choice is an error naming the state.
MarkovChain induced_chain(const Mdp& mdp, const Strategy& strategy, StateId initial);

// True iff target is reached almost surely from initial: every state
// reachable from initial can reach target.
bool chain_almost_sure(const MarkovChain& chain, StateId initial,
                       const std::vector<StateId>& target);

// MDP document format: JSON with exact integer fractions.
std::string mdp_to_json(const Mdp& mdp);
Mdp mdp_from_json(std::string_view text);

}  // namespace popsync

#endif
