#ifndef POPSYNC_REDUCTION_HPP
#define POPSYNC_REDUCTION_HPP

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "popsync/countdown.hpp"
#include "popsync/mdp.hpp"

namespace popsync {

// How a state reacts to an action before resolution into transitions:
// successors lists explicit targets, angelic goes straight to Heaven,
// daemonic to Hell, ignore loops on the state itself.
struct BehaviorEntry {
  enum class Kind { Successors, Angelic, Daemonic, Ignore };
  Kind kind = Kind::Ignore;
  std::vector<StateId> successors;  // nonempty iff kind == Successors

  bool operator==(const BehaviorEntry&) const = default;
};

struct StateRole {
  enum class Kind {
    StartState,
    Heaven,
    Hell,
    Wait,
    Ready,
    GameVertex,   // index = vertex id
    McBit,        // index = bit, value = 0/1
    AcBit,
    ControlW,
    ControlG,
    ControlA,
    ControlB,
  };
  Kind kind;
  std::uint32_t index = 0;
  std::uint32_t value = 0;
};

struct ActionRole {
  enum class Kind {
    Start,
    End,
    Wait,
    Go,
    Win,
    Next,
    GameMove,     // index = vertex id, value = weight
    McDec,        // index = bit
    AcDec,
    McError,
    AcError,
    ControlError,
  };
  Kind kind;
  std::uint32_t index = 0;
  long long value = 0;
};

// Index from gadget roles to concrete state/action ids of the compiled MDP.
struct GadgetMap {
  StateId start_state = 0, heaven = 0, hell = 0;
  StateId wait_state = 0, ready = 0;
  StateId ctrl_w = 0, ctrl_g = 0, ctrl_a = 0, ctrl_b = 0;
  std::vector<StateId> game_vertex;                  // per game vertex
  std::vector<std::array<StateId, 2>> mc_bit;        // [bit][value]
  std::vector<std::array<StateId, 2>> ac_bit;

  ActionId a_start = 0, a_end = 0, a_wait = 0, a_go = 0, a_next = 0, a_win = 0, a_cerr = 0;
  std::vector<ActionId> a_game;                      // aligned with game_move
  std::vector<std::pair<std::uint32_t, long long>> game_move;  // (vertex, weight)
  std::vector<ActionId> a_mc_dec, a_mc_err, a_ac_dec, a_ac_err;

  std::uint32_t k_mc = 0, k_ac = 0;
  std::uint32_t min_sync_n = 0;  // 2 + k_mc + k_ac
  long long c0 = 0, d_max = 0;
  std::uint32_t init_vertex = 0;

  std::vector<StateRole> state_role;    // aligned with mdp states
  std::vector<ActionRole> action_role;  // aligned with mdp actions

  std::optional<ActionId> game_action(std::uint32_t vertex, long long weight) const;
};

struct CompileOptions {
  // Literal reading of the control-gadget error action: daemonic only on W
  // instead of on all four control states.
  bool literal_control_error = false;
};

struct CompileError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Compiled {
  Mdp mdp;
  GadgetMap gm;
};

// Number of bits needed to hold values up to c, at least one.
std::uint32_t counter_bits(long long c);

Compiled compile(const CountdownGame& game, const CompileOptions& options = {});

// Behavior of one (state, action) pair as compiled. Throws on unknown ids.
BehaviorEntry behavior(const Mdp& mdp, const GadgetMap& gm, StateId state, ActionId action);

// Deterministic DOT rendering, one cluster per gadget; angelic and daemonic
// reactions are styled apart from ordinary moves.
std::string export_dot(const Mdp& mdp, const GadgetMap& gm);

// Sidecar document with role tables and derived constants.
std::string gadget_map_to_json(const Mdp& mdp, const GadgetMap& gm);

}  // namespace popsync

#endif
