#ifndef POPSYNC_PILOT_HPP
#define POPSYNC_PILOT_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "popsync/product.hpp"
#include "popsync/reduction.hpp"

namespace popsync {

// Inputs for the explicit synchronizing strategy on a compiled MDP whose
// underlying game is won by player 1.
struct PilotContext {
  const Mdp* mdp = nullptr;
  const GadgetMap* gm = nullptr;
  const WinTable* wt = nullptr;
};

struct PilotUndefined : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Deterministic configuration -> action function:
//   - from the all-start configuration, play start;
//   - if a gadget came up empty after start, play its error action (counter
//     errors by ascending bit, then end for the waiting gadget, then the
//     control error);
//   - with control at W: end once the waiting gadget is empty, go once
//     exactly one component marks Ready, wait otherwise;
//   - with control at G: win once MC holds 0, else the winning game move;
//   - with control at A: next once AC holds 0, else decrement MC;
//   - with control at B: decrement AC;
//   - all components at Heaven: a no-op.
// Decrements always clear the lowest set bit. Throws PilotUndefined outside
// the pilot's reachable configurations.
ActionId pilot_action(const PilotContext& ctx, const Config& config);

struct PilotResult {
  bool certified = false;
  std::uint64_t reachable_configs = 0;
  std::string error;  // nonempty when the pilot could not be certified
};

// Builds the chain induced by pilot_action from the all-start configuration
// and checks that the End configuration is reached almost surely.
PilotResult verify_pilot(const PilotContext& ctx, std::uint32_t n,
                         std::uint64_t cap = 5'000'000);

}  // namespace popsync

#endif
