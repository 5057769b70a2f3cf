#include <doctest.h>

#include <algorithm>
#include <set>

#include "popsync/countdown.hpp"
#include "popsync/product.hpp"
#include "popsync/reduction.hpp"

using namespace popsync;

namespace {

const char* kBranchGame = "init v0 1\nedge v0 1 v0\nedge v0 1 u\nedge u 2 u\n";
const char* kLosingGame = "init v 3\nedge v 2 v\n";
const char* kLoopGame = "init v 1\nedge v 1 v\n";

Config sorted_config(std::vector<std::pair<StateId, std::uint32_t>> e) {
  std::sort(e.begin(), e.end());
  return Config{std::move(e)};
}

}  // namespace

TEST_CASE("config_successors splits waiting components over both successors") {
  Compiled c = compile(parse_game(kBranchGame));
  Config two_waiting = Config::single(c.gm.wait_state, 2);
  std::vector<Config> succ = config_successors(c.mdp, two_waiting, c.gm.a_wait);
  REQUIRE(succ.size() == 3);
  CHECK(succ[0] == sorted_config({{c.gm.wait_state, 2}}));
  CHECK(succ[1] == sorted_config({{c.gm.wait_state, 1}, {c.gm.ready, 1}}));
  CHECK(succ[2] == sorted_config({{c.gm.ready, 2}}));
}

TEST_CASE("config_successors is the identity when all marked states ignore") {
  Compiled c = compile(parse_game(kBranchGame));
  Config cfg = sorted_config({{c.gm.wait_state, 2}, {c.gm.mc_bit[0][0], 1}});
  // win is ignored by Wait and by MC zero bits
  std::vector<Config> succ = config_successors(c.mdp, cfg, c.gm.a_win);
  REQUIRE(succ.size() == 1);
  CHECK(succ[0] == cfg);
}

TEST_CASE("config_successors from one start component fans over all targets") {
  Compiled c = compile(parse_game(kBranchGame));
  Config cfg = Config::single(c.gm.start_state, 1);
  std::vector<Config> succ = config_successors(c.mdp, cfg, c.gm.a_start);
  CHECK(succ.size() == c.gm.min_sync_n);
  for (const Config& s : succ)
    CHECK(s.total() == 1);
}

TEST_CASE("config_successor_dist carries exact multinomial weights") {
  Compiled c = compile(parse_game(kBranchGame));
  Config two_waiting = Config::single(c.gm.wait_state, 2);
  auto dist = config_successor_dist(c.mdp, two_waiting, c.gm.a_wait);
  REQUIRE(dist.size() == 3);
  Rational total;
  for (auto& [cfg, p] : dist)
    total += p;
  CHECK(total == Rational(1, 1));
  for (auto& [cfg, p] : dist) {
    if (cfg == sorted_config({{c.gm.wait_state, 1}, {c.gm.ready, 1}}))
      CHECK(p == Rational(1, 2));
    else
      CHECK(p == Rational(1, 4));
  }

  // weights sum to one on sampled pairs across a whole compiled MDP
  Config start = Config::single(c.gm.start_state, 3);
  for (ActionId a = 0; a < c.mdp.n_actions(); ++a) {
    Rational sum;
    for (auto& [cfg, p] : config_successor_dist(c.mdp, start, a))
      sum += p;
    CHECK(sum == Rational(1, 1));
  }
}

TEST_CASE("population one reproduces the reachable base MDP") {
  Compiled c = compile(parse_game(kBranchGame));
  AbstractProduct p = build_quotient(c.mdp, 1);
  // reachable states of the base MDP
  std::vector<std::uint8_t> seen(c.mdp.n_states(), 0);
  std::vector<StateId> queue{c.gm.start_state};
  seen[c.gm.start_state] = 1;
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (ActionId a = 0; a < c.mdp.n_actions(); ++a)
      for (StateId t : c.mdp.successors(queue[head], a))
        if (!seen[t]) {
          seen[t] = 1;
          queue.push_back(t);
        }
  CHECK(p.n_states() == queue.size());
  for (const Config& cfg : p.configs) {
    REQUIRE(cfg.entries.size() == 1);
    CHECK(cfg.entries[0].second == 1);
    CHECK(seen[cfg.entries[0].first] == 1);
  }
}

TEST_CASE("quotient starts at the all-start configuration and finds End") {
  Compiled c = compile(parse_game(kLoopGame));
  AbstractProduct p = build_quotient(c.mdp, 4);
  CHECK(p.configs[p.start_id] == Config::single(c.gm.start_state, 4));
  REQUIRE(p.end_id.has_value());
  CHECK(p.configs[*p.end_id] == Config::single(c.gm.heaven, 4));
}

TEST_CASE("the configuration cap raises a resource error") {
  Compiled c = compile(parse_game(kBranchGame));
  BuildOptions opts;
  opts.cap = 10;
  CHECK_THROWS_AS(build_quotient(c.mdp, 5, opts), ResourceCapError);
}

TEST_CASE("collapsed and exact builds agree on the verdict") {
  for (const char* text : {kBranchGame, kLosingGame, kLoopGame}) {
    Compiled c = compile(parse_game(text));
    for (std::uint32_t n : {2u, 4u}) {
      SyncOptions exact;
      exact.collapse = false;
      SyncOptions collapsed;
      collapsed.collapse = true;
      SyncResult a = check_sync(c.mdp, n, exact);
      SyncResult b = check_sync(c.mdp, n, collapsed);
      CHECK(a.synchronizable == b.synchronizable);
      CHECK(a.config_count >= b.config_count);
    }
  }
}

TEST_CASE("check_sync on the unit loop game is synchronizable for small n") {
  Compiled c = compile(parse_game(kLoopGame));
  CHECK(c.gm.min_sync_n == 4);
  for (std::uint32_t n = 1; n <= 6; ++n) {
    SyncResult res = check_sync(c.mdp, n);
    CHECK(res.synchronizable);
    CHECK(res.certified);
  }
}

TEST_CASE("check_sync on the losing game flips at min_sync_n") {
  Compiled c = compile(parse_game(kLosingGame));
  REQUIRE(c.gm.min_sync_n == 6);
  CHECK(check_sync(c.mdp, 2).synchronizable);   // below the threshold
  CHECK_FALSE(check_sync(c.mdp, 6).synchronizable);
}

TEST_CASE("full product equals the quotient for n up to three") {
  for (const char* text : {kBranchGame, kLosingGame, kLoopGame}) {
    Compiled c = compile(parse_game(text));
    for (std::uint32_t n = 1; n <= 3; ++n) {
      FullProduct full = build_full(c.mdp, n);
      REQUIRE(full.end_id.has_value());
      std::vector<std::uint8_t> win = product_winset(full);
      bool full_verdict = win[full.start_id] != 0;
      CHECK(full_verdict == check_sync(c.mdp, n).synchronizable);

      // winning tuples are closed under coordinate permutations
      for (std::uint32_t t = 0; t < full.n_states(); ++t) {
        if (!win[t])
          continue;
        std::vector<StateId> tup = full.tuples[t];
        std::sort(tup.begin(), tup.end());
        do {
          auto id = full.find(tup);
          REQUIRE(id.has_value());
          CHECK(win[*id] == 1);
        } while (std::next_permutation(tup.begin(), tup.end()));
      }
    }
  }
  CHECK_THROWS_AS(build_full(compile(parse_game(kLoopGame)).mdp, 4), std::invalid_argument);
}

TEST_CASE("quotient materialized as an MDP validates with exact probabilities") {
  Compiled c = compile(parse_game(kLoopGame));
  for (bool collapse : {false, true}) {
    BuildOptions opts;
    opts.collapse_doomed = collapse;
    AbstractProduct p = build_quotient(c.mdp, 2, opts);
    Mdp m = p.to_mdp();
    CHECK(validate(m).empty());
    CHECK(m.n_states() == p.n_states());
  }
}

TEST_CASE("heaven and hell counts never shrink along any edge") {
  Compiled c = compile(parse_game(kBranchGame));
  AbstractProduct p = build_quotient(c.mdp, 3);
  for (std::uint32_t id = 0; id < p.n_states(); ++id) {
    for (ActionId a = 0; a < p.n_actions(); ++a) {
      for (std::uint32_t t : p.successors(id, a)) {
        CHECK(p.configs[t].count_of(c.gm.heaven) >= p.configs[id].count_of(c.gm.heaven));
        CHECK(p.configs[t].count_of(c.gm.hell) >= p.configs[id].count_of(c.gm.hell));
      }
    }
  }
}
