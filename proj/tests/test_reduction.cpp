#include <doctest.h>

#include <set>
#include <sstream>

#include "popsync/countdown.hpp"
#include "popsync/reduction.hpp"

using namespace popsync;

namespace {

const char* kBranchGame = "init v0 1\nedge v0 1 v0\nedge v0 1 u\nedge u 2 u\n";

using BK = BehaviorEntry::Kind;

BK kind(const Compiled& c, StateId s, ActionId a) { return behavior(c.mdp, c.gm, s, a).kind; }

// Marked counter states for a held value: one component on the matching side
// of every bit pair.
std::vector<StateId> counter_pattern(const std::vector<std::array<StateId, 2>>& bits,
                                     long long value) {
  std::vector<StateId> marked;
  for (std::size_t i = 0; i < bits.size(); ++i)
    marked.push_back(bits[i][(value >> i) & 1]);
  return marked;
}

bool daemonic_for_any(const Compiled& c, const std::vector<StateId>& marked, ActionId a) {
  for (StateId s : marked)
    if (kind(c, s, a) == BK::Daemonic)
      return true;
  return false;
}

}  // namespace

TEST_CASE("compile sizes match the construction formulas") {
  Compiled c = compile(parse_game(kBranchGame));
  CHECK(c.gm.k_mc == 1);
  CHECK(c.gm.k_ac == 2);
  CHECK(c.gm.min_sync_n == 5);
  CHECK(c.mdp.n_states() == 17);   // 9 + 2 vertices + 2*(1 + 2) bits
  CHECK(c.mdp.n_actions() == 15);  // 7 + 2 moves + 2*1 + 2*2

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CountdownGame g = random_game(3, 3, 4, seed);
    Compiled cc = compile(g);
    std::set<std::pair<std::uint32_t, long long>> moves;
    for (const CountdownGame::Edge& e : g.edges)
      moves.insert({e.from, e.weight});
    CHECK(cc.mdp.n_states() == 9 + g.vertex_count() + 2 * (cc.gm.k_mc + cc.gm.k_ac));
    CHECK(cc.mdp.n_actions() == 7 + moves.size() + 2 * cc.gm.k_mc + 2 * cc.gm.k_ac);
    CHECK(cc.gm.min_sync_n == 2 + cc.gm.k_mc + cc.gm.k_ac);
    CHECK(validate(cc.mdp).empty());
  }
}

TEST_CASE("counter_bits holds the value range") {
  CHECK(counter_bits(0) == 1);
  CHECK(counter_bits(1) == 1);
  CHECK(counter_bits(2) == 2);
  CHECK(counter_bits(3) == 2);
  CHECK(counter_bits(4) == 3);
  CHECK(counter_bits(15) == 4);
}

TEST_CASE("Heaven and Hell ignore every action") {
  Compiled c = compile(parse_game(kBranchGame));
  for (ActionId a = 0; a < c.mdp.n_actions(); ++a) {
    CHECK(kind(c, c.gm.heaven, a) == BK::Ignore);
    CHECK(kind(c, c.gm.hell, a) == BK::Ignore);
  }
}

TEST_CASE("behavior table spot checks") {
  Compiled c = compile(parse_game(kBranchGame));
  const GadgetMap& gm = c.gm;

  // start spreads the initial state over all gadget entry points
  BehaviorEntry st = behavior(c.mdp, gm, gm.start_state, gm.a_start);
  REQUIRE(st.kind == BK::Successors);
  CHECK(st.successors.size() == gm.min_sync_n);
  CHECK(kind(c, gm.wait_state, gm.a_start) == BK::Daemonic);
  CHECK(kind(c, gm.ctrl_w, gm.a_start) == BK::Daemonic);

  // every action except start is daemonic at the initial state
  for (ActionId a = 0; a < c.mdp.n_actions(); ++a)
    if (a != gm.a_start)
      CHECK(kind(c, gm.start_state, a) == BK::Daemonic);

  // waiting gadget
  BehaviorEntry w = behavior(c.mdp, gm, gm.wait_state, gm.a_wait);
  REQUIRE(w.kind == BK::Successors);
  CHECK(w.successors == std::vector<StateId>{std::min(gm.wait_state, gm.ready),
                                             std::max(gm.wait_state, gm.ready)});
  CHECK(behavior(c.mdp, gm, gm.ready, gm.a_wait).successors ==
        std::vector<StateId>{gm.wait_state});
  CHECK(kind(c, gm.wait_state, gm.a_go) == BK::Ignore);
  CHECK(kind(c, gm.wait_state, gm.a_win) == BK::Ignore);
  CHECK(kind(c, gm.wait_state, gm.a_end) == BK::Daemonic);
  CHECK(kind(c, gm.ready, gm.a_end) == BK::Daemonic);
  CHECK(behavior(c.mdp, gm, gm.ready, gm.a_go).successors ==
        std::vector<StateId>{gm.game_vertex[0]});

  // control gadget: depicted edges move, everything else is daemonic there
  CHECK(behavior(c.mdp, gm, gm.ctrl_w, gm.a_go).successors ==
        std::vector<StateId>{gm.ctrl_g});
  CHECK(kind(c, gm.ctrl_w, gm.a_wait) == BK::Ignore);  // depicted self-loop
  CHECK(kind(c, gm.ctrl_w, gm.a_game[0]) == BK::Daemonic);
  CHECK(behavior(c.mdp, gm, gm.ctrl_g, gm.a_game[0]).successors ==
        std::vector<StateId>{gm.ctrl_a});
  CHECK(behavior(c.mdp, gm, gm.ctrl_g, gm.a_win).successors ==
        std::vector<StateId>{gm.ctrl_w});
  CHECK(behavior(c.mdp, gm, gm.ctrl_a, gm.a_mc_dec[0]).successors ==
        std::vector<StateId>{gm.ctrl_b});
  CHECK(behavior(c.mdp, gm, gm.ctrl_a, gm.a_next).successors ==
        std::vector<StateId>{gm.ctrl_g});
  CHECK(behavior(c.mdp, gm, gm.ctrl_b, gm.a_ac_dec[0]).successors ==
        std::vector<StateId>{gm.ctrl_a});
  CHECK(kind(c, gm.ctrl_b, gm.a_mc_dec[0]) == BK::Daemonic);
  CHECK(kind(c, gm.ctrl_a, gm.a_ac_dec[0]) == BK::Daemonic);
  // end is only safe with no simulation in flight
  CHECK(kind(c, gm.ctrl_g, gm.a_end) == BK::Daemonic);
  CHECK(kind(c, gm.ctrl_a, gm.a_end) == BK::Daemonic);
  CHECK(kind(c, gm.ctrl_b, gm.a_end) == BK::Daemonic);
  CHECK(kind(c, gm.ctrl_w, gm.a_end) == BK::Angelic);

  // game gadget
  std::uint32_t u = 1;  // second vertex of the branch game
  auto mv = *gm.game_action(u, 2);
  BehaviorEntry gmv = behavior(c.mdp, gm, gm.game_vertex[u], mv);
  REQUIRE(gmv.kind == BK::Successors);
  CHECK(gmv.successors == std::vector<StateId>{gm.game_vertex[u]});
  CHECK(kind(c, gm.game_vertex[0], mv) == BK::Daemonic);  // wrong vertex
  CHECK(kind(c, gm.game_vertex[0], gm.a_win) == BK::Angelic);
  CHECK(kind(c, gm.game_vertex[u], gm.a_win) == BK::Angelic);
  CHECK(kind(c, gm.game_vertex[u], gm.a_wait) == BK::Ignore);

  // counters: decrement, set, and error reactions
  CHECK(kind(c, gm.mc_bit[0][0], gm.a_mc_dec[0]) == BK::Daemonic);
  CHECK(behavior(c.mdp, gm, gm.mc_bit[0][1], gm.a_mc_dec[0]).successors ==
        std::vector<StateId>{gm.mc_bit[0][0]});
  CHECK(behavior(c.mdp, gm, gm.ac_bit[0][0], gm.a_ac_dec[1]).successors ==
        std::vector<StateId>{gm.ac_bit[0][1]});  // borrow fill below the bit
  CHECK(kind(c, gm.ac_bit[0][1], gm.a_ac_dec[1]) == BK::Daemonic);  // lower one-bit
  CHECK(kind(c, gm.ac_bit[1][0], gm.a_ac_dec[0]) == BK::Ignore);    // higher bits ignore
  // go sets MC to c0 = 1
  CHECK(behavior(c.mdp, gm, gm.mc_bit[0][0], gm.a_go).successors ==
        std::vector<StateId>{gm.mc_bit[0][1]});
  CHECK(kind(c, gm.mc_bit[0][1], gm.a_go) == BK::Daemonic);
  CHECK(kind(c, gm.ac_bit[0][0], gm.a_go) == BK::Ignore);
  // the (u, 2) move sets AC to 2
  CHECK(kind(c, gm.ac_bit[0][0], mv) == BK::Ignore);  // bit 0 of 2 is 0
  CHECK(behavior(c.mdp, gm, gm.ac_bit[1][0], mv).successors ==
        std::vector<StateId>{gm.ac_bit[1][1]});
  CHECK(kind(c, gm.ac_bit[1][1], mv) == BK::Daemonic);
  // win and next guard the counters
  CHECK(kind(c, gm.mc_bit[0][1], gm.a_win) == BK::Daemonic);
  CHECK(kind(c, gm.mc_bit[0][0], gm.a_win) == BK::Ignore);
  CHECK(kind(c, gm.ac_bit[1][1], gm.a_next) == BK::Daemonic);
  CHECK(kind(c, gm.ac_bit[1][0], gm.a_next) == BK::Ignore);
  CHECK(kind(c, gm.mc_bit[0][1], gm.a_next) == BK::Ignore);
  // errors hit their own pair, everything else ascends
  CHECK(kind(c, gm.mc_bit[0][0], gm.a_mc_err[0]) == BK::Daemonic);
  CHECK(kind(c, gm.mc_bit[0][1], gm.a_mc_err[0]) == BK::Daemonic);
  CHECK(kind(c, gm.ac_bit[0][0], gm.a_mc_err[0]) == BK::Angelic);
  CHECK(kind(c, gm.wait_state, gm.a_mc_err[0]) == BK::Angelic);
  CHECK(kind(c, gm.ctrl_g, gm.a_mc_err[0]) == BK::Angelic);
  CHECK(kind(c, gm.game_vertex[0], gm.a_mc_err[0]) == BK::Angelic);
}

TEST_CASE("control error scope: repaired by default, literal behind the option") {
  Compiled repaired = compile(parse_game(kBranchGame));
  CHECK(kind(repaired, repaired.gm.ctrl_w, repaired.gm.a_cerr) == BK::Daemonic);
  CHECK(kind(repaired, repaired.gm.ctrl_g, repaired.gm.a_cerr) == BK::Daemonic);
  CHECK(kind(repaired, repaired.gm.ctrl_a, repaired.gm.a_cerr) == BK::Daemonic);
  CHECK(kind(repaired, repaired.gm.ctrl_b, repaired.gm.a_cerr) == BK::Daemonic);
  CHECK(kind(repaired, repaired.gm.wait_state, repaired.gm.a_cerr) == BK::Angelic);

  Compiled literal = compile(parse_game(kBranchGame), {true});
  CHECK(kind(literal, literal.gm.ctrl_w, literal.gm.a_cerr) == BK::Daemonic);
  CHECK(kind(literal, literal.gm.ctrl_g, literal.gm.a_cerr) == BK::Angelic);
  CHECK(kind(literal, literal.gm.ctrl_a, literal.gm.a_cerr) == BK::Angelic);
  CHECK(kind(literal, literal.gm.ctrl_b, literal.gm.a_cerr) == BK::Angelic);
}

TEST_CASE("unique safe decrement walks the counter down one by one") {
  // c0 = 3 gives a 2-bit main counter
  Compiled c = compile(parse_game("init v 3\nedge v 2 v\n"));
  const auto& bits = c.gm.mc_bit;
  REQUIRE(bits.size() == 2);
  for (long long value = 0; value < 4; ++value) {
    std::vector<StateId> marked = counter_pattern(bits, value);
    std::vector<ActionId> safe;
    for (ActionId a : c.gm.a_mc_dec)
      if (!daemonic_for_any(c, marked, a))
        safe.push_back(a);
    if (value == 0) {
      CHECK(safe.empty());
    } else {
      REQUIRE(safe.size() == 1);
    }
  }
  // maximal safe sequence from 3 has length exactly 3
  long long value = 3;
  int steps = 0;
  while (true) {
    std::vector<StateId> marked = counter_pattern(bits, value);
    std::optional<std::uint32_t> dec;
    for (std::uint32_t i = 0; i < c.gm.a_mc_dec.size(); ++i)
      if (!daemonic_for_any(c, marked, c.gm.a_mc_dec[i]))
        dec = i;
    if (!dec)
      break;
    // apply the decrement to the marked pattern
    std::vector<StateId> next;
    for (StateId s : marked) {
      BehaviorEntry e = behavior(c.mdp, c.gm, s, c.gm.a_mc_dec[*dec]);
      if (e.kind == BK::Ignore)
        next.push_back(s);
      else {
        REQUIRE(e.kind == BK::Successors);
        REQUIRE(e.successors.size() == 1);
        next.push_back(e.successors[0]);
      }
    }
    // read the value back from the new pattern
    long long read = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
      for (StateId s : next)
        if (s == bits[i][1])
          read |= 1LL << i;
    CHECK(read == value - 1);
    value = read;
    ++steps;
  }
  CHECK(steps == 3);
  CHECK(value == 0);
}

TEST_CASE("set actions require the counter to hold zero") {
  Compiled c = compile(parse_game(kBranchGame));
  // go sets MC: safe exactly on the zero pattern
  for (long long v = 0; v < 2; ++v) {
    bool safe = !daemonic_for_any(c, counter_pattern(c.gm.mc_bit, v), c.gm.a_go);
    CHECK(safe == (v == 0));
  }
  // a game move sets AC: safe exactly on the zero pattern
  ActionId mv = *c.gm.game_action(1, 2);
  for (long long v = 0; v < 4; ++v) {
    bool safe = !daemonic_for_any(c, counter_pattern(c.gm.ac_bit, v), mv);
    CHECK(safe == (v == 0));
  }
}

TEST_CASE("compilation is deterministic, including documents") {
  CountdownGame g = parse_game(kBranchGame);
  Compiled a = compile(g);
  Compiled b = compile(g);
  CHECK(mdp_to_json(a.mdp) == mdp_to_json(b.mdp));
  CHECK(gadget_map_to_json(a.mdp, a.gm) == gadget_map_to_json(b.mdp, b.gm));
  CHECK(export_dot(a.mdp, a.gm) == export_dot(b.mdp, b.gm));
}

TEST_CASE("dot export lists every state as a node, even without edges") {
  CountdownGame g = parse_game("init v 0\n");  // no edges: all gadgets still emitted
  Compiled c = compile(g);
  std::string dot = export_dot(c.mdp, c.gm);
  std::istringstream is(dot);
  std::string line;
  int nodes = 0;
  bool saw_game_cluster = false;
  while (std::getline(is, line)) {
    if (line.find("[label=") != std::string::npos && line.find("->") == std::string::npos)
      ++nodes;
    if (line.find("cluster_game") != std::string::npos)
      saw_game_cluster = true;
  }
  CHECK(nodes == static_cast<int>(c.mdp.n_states()));
  CHECK(saw_game_cluster);
}
