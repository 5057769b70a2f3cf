#include "popsync/reduction.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <optional>
#include <sstream>

#include <json.hpp>

namespace popsync {

namespace {

// Explicit declarations for one action column. Conflicting declarations for
// the same state are a compile error naming both sources; identical repeats
// are tolerated.
class Column {
 public:
  Column(const Mdp& mdp, ActionId action)
      : mdp_(mdp), action_(action), slot_(mdp.n_states()), source_(mdp.n_states()) {}

  void declare(StateId s, BehaviorEntry e, const char* src) {
    if (slot_[s]) {
      if (*slot_[s] == e)
        return;
      throw CompileError("conflicting behavior for state '" + mdp_.states[s].name +
                         "' under action '" + mdp_.actions[action_] + "': declared by " +
                         source_[s] + " and " + src);
    }
    slot_[s] = std::move(e);
    source_[s] = src;
  }

  void angelic(StateId s, const char* src) {
    declare(s, {BehaviorEntry::Kind::Angelic, {}}, src);
  }
  void daemonic(StateId s, const char* src) {
    declare(s, {BehaviorEntry::Kind::Daemonic, {}}, src);
  }
  void moves(StateId s, std::vector<StateId> succ, const char* src) {
    std::sort(succ.begin(), succ.end());
    succ.erase(std::unique(succ.begin(), succ.end()), succ.end());
    declare(s, {BehaviorEntry::Kind::Successors, std::move(succ)}, src);
  }

  const std::optional<BehaviorEntry>& slot(StateId s) const { return slot_[s]; }

 private:
  const Mdp& mdp_;
  ActionId action_;
  std::vector<std::optional<BehaviorEntry>> slot_;
  std::vector<std::string> source_;
};

bool is_control(const GadgetMap& gm, StateId s) {
  return s == gm.ctrl_w || s == gm.ctrl_g || s == gm.ctrl_a || s == gm.ctrl_b;
}

}  // namespace

std::uint32_t counter_bits(long long c) {
  return std::max<std::uint32_t>(
      1, static_cast<std::uint32_t>(std::bit_width(static_cast<unsigned long long>(c))));
}

std::optional<ActionId> GadgetMap::game_action(std::uint32_t vertex, long long weight) const {
  for (std::size_t i = 0; i < game_move.size(); ++i)
    if (game_move[i].first == vertex && game_move[i].second == weight)
      return a_game[i];
  return std::nullopt;
}

Compiled compile(const CountdownGame& game, const CompileOptions& options) {
  validate_game(game);
  Compiled out;
  Mdp& mdp = out.mdp;
  GadgetMap& gm = out.gm;

  gm.c0 = game.init_counter;
  gm.d_max = game.max_weight();
  gm.k_mc = counter_bits(gm.c0);
  gm.k_ac = counter_bits(gm.d_max);
  gm.min_sync_n = 2 + gm.k_mc + gm.k_ac;
  gm.init_vertex = game.init_vertex;

  auto add_state = [&](std::string name, StateRole role,
                       std::vector<std::string> labels = {}) {
    mdp.states.push_back({std::move(name), std::move(labels)});
    gm.state_role.push_back(role);
    return static_cast<StateId>(mdp.states.size() - 1);
  };
  using SK = StateRole::Kind;
  gm.start_state = add_state("Start", {SK::StartState}, {"start"});
  gm.heaven = add_state("Heaven", {SK::Heaven}, {"heaven"});
  gm.hell = add_state("Hell", {SK::Hell}, {"hell"});
  gm.wait_state = add_state("Wait", {SK::Wait});
  gm.ready = add_state("Ready", {SK::Ready});
  gm.ctrl_w = add_state("Ctrl.W", {SK::ControlW});
  gm.ctrl_g = add_state("Ctrl.G", {SK::ControlG});
  gm.ctrl_a = add_state("Ctrl.A", {SK::ControlA});
  gm.ctrl_b = add_state("Ctrl.B", {SK::ControlB});
  for (std::uint32_t v = 0; v < game.vertex_count(); ++v)
    gm.game_vertex.push_back(add_state("Game." + game.vertices[v], {SK::GameVertex, v}));
  for (std::uint32_t i = 0; i < gm.k_mc; ++i) {
    std::array<StateId, 2> bit{};
    for (std::uint32_t j = 0; j < 2; ++j)
      bit[j] = add_state("MC.Bit" + std::to_string(i) + "=" + std::to_string(j),
                         {SK::McBit, i, j});
    gm.mc_bit.push_back(bit);
  }
  for (std::uint32_t i = 0; i < gm.k_ac; ++i) {
    std::array<StateId, 2> bit{};
    for (std::uint32_t j = 0; j < 2; ++j)
      bit[j] = add_state("AC.Bit" + std::to_string(i) + "=" + std::to_string(j),
                         {SK::AcBit, i, j});
    gm.ac_bit.push_back(bit);
  }

  auto add_action = [&](std::string name, ActionRole role) {
    mdp.actions.push_back(std::move(name));
    gm.action_role.push_back(role);
    return static_cast<ActionId>(mdp.actions.size() - 1);
  };
  using AK = ActionRole::Kind;
  gm.a_start = add_action("start", {AK::Start});
  gm.a_end = add_action("end", {AK::End});
  gm.a_wait = add_action("wait", {AK::Wait});
  gm.a_go = add_action("go", {AK::Go});
  gm.a_next = add_action("next", {AK::Next});
  gm.a_win = add_action("win", {AK::Win});
  gm.a_cerr = add_action("err", {AK::ControlError});

  // One action per distinct (vertex, weight) pair, with the matching edges.
  std::map<std::pair<std::uint32_t, long long>, std::vector<StateId>> edges_of;
  for (const CountdownGame::Edge& e : game.edges)
    edges_of[{e.from, e.weight}].push_back(gm.game_vertex[e.to]);
  for (const auto& [vd, _] : edges_of) {
    gm.game_move.push_back(vd);
    gm.a_game.push_back(add_action("move(" + game.vertices[vd.first] + "," +
                                       std::to_string(vd.second) + ")",
                                   {AK::GameMove, vd.first, vd.second}));
  }
  for (std::uint32_t i = 0; i < gm.k_mc; ++i)
    gm.a_mc_dec.push_back(add_action("MC.dec" + std::to_string(i), {AK::McDec, i}));
  for (std::uint32_t i = 0; i < gm.k_mc; ++i)
    gm.a_mc_err.push_back(add_action("MC.err" + std::to_string(i), {AK::McError, i}));
  for (std::uint32_t i = 0; i < gm.k_ac; ++i)
    gm.a_ac_dec.push_back(add_action("AC.dec" + std::to_string(i), {AK::AcDec, i}));
  for (std::uint32_t i = 0; i < gm.k_ac; ++i)
    gm.a_ac_err.push_back(add_action("AC.err" + std::to_string(i), {AK::AcError, i}));

  // Per-action behavior columns. Remaining states fall back to the action's
  // fill rule; Heaven and Hell ignore everything.
  enum class Fill { GadgetDefault, Angelic, Daemonic };
  mdp.trans.resize(std::size_t{mdp.n_states()} * mdp.n_actions());
  auto finalize = [&](ActionId a, const Column& col, Fill fill) {
    for (StateId s = 0; s < mdp.n_states(); ++s) {
      BehaviorEntry entry;
      if (s == gm.heaven || s == gm.hell) {
        entry.kind = BehaviorEntry::Kind::Ignore;
      } else if (col.slot(s)) {
        entry = *col.slot(s);
      } else {
        switch (fill) {
          case Fill::Angelic:
            entry.kind = BehaviorEntry::Kind::Angelic;
            break;
          case Fill::Daemonic:
            entry.kind = BehaviorEntry::Kind::Daemonic;
            break;
          case Fill::GadgetDefault:
            entry.kind = is_control(gm, s) ? BehaviorEntry::Kind::Daemonic
                                           : BehaviorEntry::Kind::Ignore;
            break;
        }
      }
      std::vector<StateId> supp;
      switch (entry.kind) {
        case BehaviorEntry::Kind::Successors:
          supp = entry.successors;
          break;
        case BehaviorEntry::Kind::Angelic:
          supp = {gm.heaven};
          break;
        case BehaviorEntry::Kind::Daemonic:
          supp = {gm.hell};
          break;
        case BehaviorEntry::Kind::Ignore:
          supp = {s};
          break;
      }
      Distribution d;
      Rational p(1, static_cast<long long>(supp.size()));
      d.support = std::move(supp);
      d.prob.assign(d.support.size(), p);
      mdp.dist(s, a) = std::move(d);
    }
  };
  auto column = [&](ActionId a) { return Column(mdp, a); };
  auto bit_of = [](long long value, std::uint32_t i) -> std::uint32_t {
    return static_cast<std::uint32_t>((value >> i) & 1);
  };

  {  // start: initializes waiting, control and both counters
    Column col = column(gm.a_start);
    std::vector<StateId> targets{gm.wait_state, gm.ctrl_w};
    for (std::uint32_t i = 0; i < gm.k_mc; ++i)
      targets.push_back(gm.mc_bit[i][0]);
    for (std::uint32_t i = 0; i < gm.k_ac; ++i)
      targets.push_back(gm.ac_bit[i][0]);
    col.moves(gm.start_state, targets, "start targets");
    finalize(gm.a_start, col, Fill::Daemonic);
  }
  {  // end: wins once the waiting gadget is empty and no game is in flight.
     // Without the three mid-simulation control states being daemonic, a
     // strategy could drain the waiting gadget by herding every component to
     // Ready, play go and end immediately, winning any game at any n.
    Column col = column(gm.a_end);
    col.daemonic(gm.wait_state, "end at Wait");
    col.daemonic(gm.ready, "end at Ready");
    col.daemonic(gm.ctrl_g, "simulation in flight");
    col.daemonic(gm.ctrl_a, "simulation in flight");
    col.daemonic(gm.ctrl_b, "simulation in flight");
    col.daemonic(gm.start_state, "initial state");
    finalize(gm.a_end, col, Fill::Angelic);
  }
  {  // wait: shuffles the waiting gadget
    Column col = column(gm.a_wait);
    col.moves(gm.wait_state, {gm.wait_state, gm.ready}, "waiting split");
    col.moves(gm.ready, {gm.wait_state}, "ready returns");
    col.moves(gm.ctrl_w, {gm.ctrl_w}, "control loop");
    col.daemonic(gm.start_state, "initial state");
    finalize(gm.a_wait, col, Fill::GadgetDefault);
  }
  {  // go: isolation done, enter the game and load the main counter
    Column col = column(gm.a_go);
    col.moves(gm.ready, {gm.game_vertex[game.init_vertex]}, "ready to game");
    col.moves(gm.ctrl_w, {gm.ctrl_g}, "control W to G");
    for (std::uint32_t i = 0; i < gm.k_mc; ++i) {
      col.moves(gm.mc_bit[i][0], {gm.mc_bit[i][bit_of(gm.c0, i)]}, "MC set");
      col.daemonic(gm.mc_bit[i][1], "MC set needs zero");
    }
    col.daemonic(gm.start_state, "initial state");
    finalize(gm.a_go, col, Fill::GadgetDefault);
  }
  {  // next: one game round finished, auxiliary counter must be empty
    Column col = column(gm.a_next);
    for (std::uint32_t i = 0; i < gm.k_ac; ++i)
      col.daemonic(gm.ac_bit[i][1], "AC must hold zero");
    col.moves(gm.ctrl_a, {gm.ctrl_g}, "control A to G");
    col.daemonic(gm.start_state, "initial state");
    finalize(gm.a_next, col, Fill::GadgetDefault);
  }
  {  // win: claim the game is over; main counter must be empty
    Column col = column(gm.a_win);
    for (StateId v : gm.game_vertex)
      col.angelic(v, "game settled");
    for (std::uint32_t i = 0; i < gm.k_mc; ++i)
      col.daemonic(gm.mc_bit[i][1], "MC must hold zero");
    col.moves(gm.ctrl_g, {gm.ctrl_w}, "control G to W");
    col.daemonic(gm.start_state, "initial state");
    finalize(gm.a_win, col, Fill::GadgetDefault);
  }
  {  // control error: checks that the control gadget was initialized
    Column col = column(gm.a_cerr);
    col.daemonic(gm.ctrl_w, "control check");
    if (!options.literal_control_error) {
      col.daemonic(gm.ctrl_g, "control check");
      col.daemonic(gm.ctrl_a, "control check");
      col.daemonic(gm.ctrl_b, "control check");
    } else {
      col.angelic(gm.ctrl_g, "literal control error");
      col.angelic(gm.ctrl_a, "literal control error");
      col.angelic(gm.ctrl_b, "literal control error");
    }
    col.daemonic(gm.start_state, "initial state");
    finalize(gm.a_cerr, col, Fill::Angelic);
  }
  for (std::size_t gi = 0; gi < gm.a_game.size(); ++gi) {
    // game move (v, d): plays d from v and loads the auxiliary counter with d
    Column col = column(gm.a_game[gi]);
    auto [v, d] = gm.game_move[gi];
    col.moves(gm.game_vertex[v], edges_of.at({v, d}), "game edges");
    for (StateId other : gm.game_vertex)
      if (other != gm.game_vertex[v])
        col.daemonic(other, "wrong game vertex");
    for (std::uint32_t i = 0; i < gm.k_ac; ++i) {
      col.moves(gm.ac_bit[i][0], {gm.ac_bit[i][bit_of(d, i)]}, "AC set");
      col.daemonic(gm.ac_bit[i][1], "AC set needs zero");
    }
    col.moves(gm.ctrl_g, {gm.ctrl_a}, "control G to A");
    col.daemonic(gm.start_state, "initial state");
    finalize(gm.a_game[gi], col, Fill::GadgetDefault);
  }
  auto counter_dec = [&](const std::vector<std::array<StateId, 2>>& bits, std::uint32_t i,
                         ActionId a, StateId ctrl_from, StateId ctrl_to) {
    Column col = column(a);
    col.moves(bits[i][1], {bits[i][0]}, "clear bit");
    col.daemonic(bits[i][0], "bit already zero");
    for (std::uint32_t j = 0; j < i; ++j) {
      col.moves(bits[j][0], {bits[j][1]}, "borrow fill");
      col.daemonic(bits[j][1], "lower bit not zero");
    }
    col.moves(ctrl_from, {ctrl_to}, "control step");
    col.daemonic(gm.start_state, "initial state");
    finalize(a, col, Fill::GadgetDefault);
  };
  for (std::uint32_t i = 0; i < gm.k_mc; ++i)
    counter_dec(gm.mc_bit, i, gm.a_mc_dec[i], gm.ctrl_a, gm.ctrl_b);
  for (std::uint32_t i = 0; i < gm.k_ac; ++i)
    counter_dec(gm.ac_bit, i, gm.a_ac_dec[i], gm.ctrl_b, gm.ctrl_a);
  auto counter_err = [&](const std::vector<std::array<StateId, 2>>& bits, std::uint32_t i,
                         ActionId a) {
    Column col = column(a);
    col.daemonic(bits[i][0], "checked bit");
    col.daemonic(bits[i][1], "checked bit");
    col.daemonic(gm.start_state, "initial state");
    finalize(a, col, Fill::Angelic);
  };
  for (std::uint32_t i = 0; i < gm.k_mc; ++i)
    counter_err(gm.mc_bit, i, gm.a_mc_err[i]);
  for (std::uint32_t i = 0; i < gm.k_ac; ++i)
    counter_err(gm.ac_bit, i, gm.a_ac_err[i]);

  return out;
}

BehaviorEntry behavior(const Mdp& mdp, const GadgetMap& gm, StateId state, ActionId action) {
  if (state >= mdp.n_states())
    throw std::invalid_argument("behavior: unknown state id " + std::to_string(state));
  if (action >= mdp.n_actions())
    throw std::invalid_argument("behavior: unknown action id " + std::to_string(action));
  const Distribution& d = mdp.dist(state, action);
  BehaviorEntry entry;
  if (d.support.size() == 1 && d.support[0] == state) {
    entry.kind = BehaviorEntry::Kind::Ignore;
  } else if (d.support.size() == 1 && d.support[0] == gm.heaven) {
    entry.kind = BehaviorEntry::Kind::Angelic;
  } else if (d.support.size() == 1 && d.support[0] == gm.hell) {
    entry.kind = BehaviorEntry::Kind::Daemonic;
  } else {
    entry.kind = BehaviorEntry::Kind::Successors;
    entry.successors = d.support;
  }
  return entry;
}

namespace {

const char* state_role_name(StateRole::Kind k) {
  switch (k) {
    case StateRole::Kind::StartState: return "start_state";
    case StateRole::Kind::Heaven: return "heaven";
    case StateRole::Kind::Hell: return "hell";
    case StateRole::Kind::Wait: return "wait";
    case StateRole::Kind::Ready: return "ready";
    case StateRole::Kind::GameVertex: return "game_vertex";
    case StateRole::Kind::McBit: return "mc_bit";
    case StateRole::Kind::AcBit: return "ac_bit";
    case StateRole::Kind::ControlW: return "control_W";
    case StateRole::Kind::ControlG: return "control_G";
    case StateRole::Kind::ControlA: return "control_A";
    case StateRole::Kind::ControlB: return "control_B";
  }
  return "?";
}

const char* action_role_name(ActionRole::Kind k) {
  switch (k) {
    case ActionRole::Kind::Start: return "start";
    case ActionRole::Kind::End: return "end";
    case ActionRole::Kind::Wait: return "wait";
    case ActionRole::Kind::Go: return "go";
    case ActionRole::Kind::Win: return "win";
    case ActionRole::Kind::Next: return "next";
    case ActionRole::Kind::GameMove: return "game_move";
    case ActionRole::Kind::McDec: return "mc_dec";
    case ActionRole::Kind::AcDec: return "ac_dec";
    case ActionRole::Kind::McError: return "mc_error";
    case ActionRole::Kind::AcError: return "ac_error";
    case ActionRole::Kind::ControlError: return "control_error";
  }
  return "?";
}

int cluster_of(const GadgetMap& gm, StateId s) {
  switch (gm.state_role[s].kind) {
    case StateRole::Kind::StartState:
    case StateRole::Kind::Heaven:
    case StateRole::Kind::Hell: return 0;
    case StateRole::Kind::Wait:
    case StateRole::Kind::Ready: return 1;
    case StateRole::Kind::ControlW:
    case StateRole::Kind::ControlG:
    case StateRole::Kind::ControlA:
    case StateRole::Kind::ControlB: return 2;
    case StateRole::Kind::GameVertex: return 3;
    case StateRole::Kind::McBit: return 4;
    case StateRole::Kind::AcBit: return 5;
  }
  return 0;
}

}  // namespace

std::string export_dot(const Mdp& mdp, const GadgetMap& gm) {
  std::ostringstream os;
  os << "digraph compiled {\n  rankdir=LR;\n  node [shape=ellipse];\n";
  static const char* cluster_name[6] = {"special", "waiting", "control",
                                        "game", "mc", "ac"};
  for (int c = 0; c < 6; ++c) {
    os << "  subgraph cluster_" << cluster_name[c] << " {\n    label=\"" << cluster_name[c]
       << "\";\n";
    for (StateId s = 0; s < mdp.n_states(); ++s)
      if (cluster_of(gm, s) == c)
        os << "    s" << s << " [label=\"" << mdp.states[s].name << "\"];\n";
    os << "  }\n";
  }
  // One edge per (source, target, kind); labels aggregate the actions.
  std::map<std::tuple<StateId, StateId, int>, std::vector<std::string>> edges;
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      BehaviorEntry e = behavior(mdp, gm, s, a);
      switch (e.kind) {
        case BehaviorEntry::Kind::Ignore:
          break;
        case BehaviorEntry::Kind::Angelic:
          edges[{s, gm.heaven, 1}].push_back(mdp.actions[a]);
          break;
        case BehaviorEntry::Kind::Daemonic:
          edges[{s, gm.hell, 2}].push_back(mdp.actions[a]);
          break;
        case BehaviorEntry::Kind::Successors:
          for (StateId t : e.successors)
            edges[{s, t, 0}].push_back(mdp.actions[a]);
          break;
      }
    }
  }
  for (const auto& [key, labels] : edges) {
    auto [s, t, kind] = key;
    os << "  s" << s << " -> s" << t << " [label=\"";
    for (std::size_t i = 0; i < labels.size(); ++i)
      os << (i ? "," : "") << labels[i];
    os << "\"";
    if (kind == 1)
      os << ", style=dashed, color=darkgreen";
    else if (kind == 2)
      os << ", style=dotted, color=red";
    os << "];\n";
  }
  os << "}\n";
  return os.str();
}

std::string gadget_map_to_json(const Mdp& mdp, const GadgetMap& gm) {
  nlohmann::json doc;
  doc["k_mc"] = gm.k_mc;
  doc["k_ac"] = gm.k_ac;
  doc["min_sync_n"] = gm.min_sync_n;
  doc["c0"] = gm.c0;
  doc["d_max"] = gm.d_max;
  doc["states"] = nlohmann::json::array();
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    nlohmann::json st;
    st["id"] = s;
    st["name"] = mdp.states[s].name;
    st["role"] = state_role_name(gm.state_role[s].kind);
    if (gm.state_role[s].kind == StateRole::Kind::GameVertex)
      st["vertex"] = gm.state_role[s].index;
    if (gm.state_role[s].kind == StateRole::Kind::McBit ||
        gm.state_role[s].kind == StateRole::Kind::AcBit) {
      st["bit"] = gm.state_role[s].index;
      st["value"] = gm.state_role[s].value;
    }
    doc["states"].push_back(std::move(st));
  }
  doc["actions"] = nlohmann::json::array();
  for (ActionId a = 0; a < mdp.n_actions(); ++a) {
    nlohmann::json ac;
    ac["id"] = a;
    ac["name"] = mdp.actions[a];
    ac["role"] = action_role_name(gm.action_role[a].kind);
    if (gm.action_role[a].kind == ActionRole::Kind::GameMove) {
      ac["vertex"] = gm.action_role[a].index;
      ac["weight"] = gm.action_role[a].value;
    }
    if (gm.action_role[a].kind == ActionRole::Kind::McDec ||
        gm.action_role[a].kind == ActionRole::Kind::AcDec ||
        gm.action_role[a].kind == ActionRole::Kind::McError ||
        gm.action_role[a].kind == ActionRole::Kind::AcError)
      ac["bit"] = gm.action_role[a].index;
    doc["actions"].push_back(std::move(ac));
  }
  return doc.dump(2) + "\n";
}

}  // namespace popsync
