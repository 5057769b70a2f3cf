#include <doctest.h>

#include "oracle.hpp"
#include "popsync/countdown.hpp"
#include "popsync/mdp.hpp"
#include "popsync/rng.hpp"

using namespace popsync;

TEST_CASE("parse_game reads the line format") {
  CountdownGame g = parse_game("init v 3\nedge v 1 v\n");
  CHECK(g.vertices == std::vector<std::string>{"v"});
  CHECK(g.init_vertex == 0);
  CHECK(g.init_counter == 3);
  REQUIRE(g.edges.size() == 1);
  CHECK(g.edges[0] == CountdownGame::Edge{0, 1, 0});
}

TEST_CASE("parse_game accepts comments and blank lines") {
  CountdownGame g = parse_game("# a comment\n\ninit a 2\nedge a 1 b # trailing\nedge b 2 a\n");
  CHECK(g.vertex_count() == 2);
  CHECK(g.edges.size() == 2);
  CHECK(g.max_weight() == 2);
}

TEST_CASE("parse_game rejects malformed input") {
  CHECK_THROWS_WITH_AS(parse_game("edge v 1 v\n"), doctest::Contains("missing init"),
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_game("init v 3\nedge v 1 v\nedge v 1 v\n"),
                       doctest::Contains("duplicate edge"), ParseError);
  CHECK_THROWS_WITH_AS(parse_game("init v 1\ninit v 2\n"),
                       doctest::Contains("duplicate init"), ParseError);
  CHECK_THROWS_WITH_AS(parse_game("init v 3\nedge v 0 v\n"), doctest::Contains("weight"),
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_game("init v 3\nfoo v 1 v\n"), doctest::Contains("line 2"),
                       ParseError);
  CHECK_THROWS_WITH_AS(parse_game("init v x\n"), doctest::Contains("line 1"), ParseError);
}

TEST_CASE("solve_game on the self-loop game") {
  CountdownGame g = parse_game("init v 3\nedge v 1 v\n");
  WinTable wt = solve_game(g);
  for (long long c = 0; c <= 3; ++c)
    CHECK(wt.won(0, c));
  CHECK(wt.move_at(0, 3) == 1);
}

TEST_CASE("solve_game with an escape vertex the opponent can pick") {
  CountdownGame g = parse_game("init v0 3\nedge v0 1 v0\nedge v0 1 u\nedge u 2 u\n");
  WinTable wt = solve_game(g);
  std::uint32_t v0 = *g.vertex_id("v0");
  std::uint32_t u = *g.vertex_id("u");
  CHECK(wt.won(v0, 1));
  CHECK_FALSE(wt.won(v0, 2));
  CHECK_FALSE(wt.won(v0, 3));
  CHECK(wt.won(u, 2));
  CHECK_FALSE(wt.won(u, 1));

  testing::NaiveGameOracle oracle(g);
  for (std::uint32_t v = 0; v < g.vertex_count(); ++v)
    for (long long c = 0; c <= 3; ++c)
      CHECK(wt.won(v, c) == oracle.player1_wins(v, c));
}

TEST_CASE("solve_game when only an overshooting weight exists") {
  CountdownGame g3 = parse_game("init v 3\nedge v 2 v\n");
  CHECK_FALSE(solve_game(g3).won(0, 3));
  CountdownGame g4 = parse_game("init v 4\nedge v 2 v\n");
  CHECK(solve_game(g4).won(0, 4));
}

TEST_CASE("zero counter wins immediately, stuck positions lose") {
  CountdownGame g = parse_game("init v 0\n");  // no edges at all
  WinTable wt = solve_game(g);
  CHECK(wt.won(0, 0));
  CountdownGame g1 = parse_game("init v 2\nedge u 1 u\nedge v 2 u\n");
  WinTable wt1 = solve_game(g1);
  CHECK_FALSE(wt1.won(*g1.vertex_id("v"), 1));  // no playable weight
}

TEST_CASE("win table invariants hold on random games") {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    CountdownGame g = random_game(3, 3, 5, seed);
    WinTable wt = solve_game(g);
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v) {
      CHECK(wt.won(v, 0));
      for (long long c = 1; c <= g.init_counter; ++c) {
        if (!wt.won(v, c))
          continue;
        long long d = wt.move_at(v, c);
        REQUIRE(d >= 1);
        REQUIRE(d <= c);
        bool has_edge = false;
        for (const CountdownGame::Edge& e : g.edges)
          if (e.from == v && e.weight == d) {
            has_edge = true;
            CHECK(wt.won(e.to, c - d));
          }
        CHECK(has_edge);
      }
    }
  }
}

TEST_CASE("solve_game equals the exhaustive oracle on every tiny game") {
  // all edge subsets over two vertices with weights 1..2
  for (CountdownGame& g : testing::all_small_games(2, 2, 3)) {
    WinTable wt = solve_game(g);
    testing::NaiveGameOracle oracle(g);
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v)
      for (long long c = 0; c <= g.init_counter; ++c)
        CHECK(wt.won(v, c) == oracle.player1_wins(v, c));
  }
}

TEST_CASE("solve_game equals the oracle on sampled larger games") {
  for (std::uint64_t seed = 100; seed < 250; ++seed) {
    CountdownGame g = random_game(3, 3, 6, seed);
    WinTable wt = solve_game(g);
    testing::NaiveGameOracle oracle(g);
    for (std::uint32_t v = 0; v < g.vertex_count(); ++v)
      for (long long c = 0; c <= g.init_counter; ++c)
        CHECK(wt.won(v, c) == oracle.player1_wins(v, c));
  }
}

TEST_CASE("countdown_as_mdp single successor") {
  CountdownGame g = parse_game("init v 2\nedge v 1 v\n");
  CountdownMdp cm = countdown_as_mdp(g);
  StateId v2 = *cm.mdp.state_named("v@2");
  ActionId d1 = *cm.mdp.action_named("1");
  const Distribution& d = cm.mdp.dist(v2, d1);
  REQUIRE(d.support.size() == 1);
  CHECK(cm.mdp.states[d.support[0]].name == "v@1");
  CHECK(d.prob[0] == Rational(1, 1));
}

TEST_CASE("countdown_as_mdp uniform branching") {
  CountdownGame g = parse_game("init v0 2\nedge v0 1 v0\nedge v0 1 u\n");
  CountdownMdp cm = countdown_as_mdp(g);
  StateId s = *cm.mdp.state_named("v0@2");
  const Distribution& d = cm.mdp.dist(s, *cm.mdp.action_named("1"));
  REQUIRE(d.support.size() == 2);
  CHECK(d.prob[0] == Rational(1, 2));
  CHECK(d.prob[1] == Rational(1, 2));
  // unplayable weight from counter zero goes to the sink
  StateId z = *cm.mdp.state_named("v0@0");
  const Distribution& dz = cm.mdp.dist(z, *cm.mdp.action_named("1"));
  REQUIRE(dz.support.size() == 1);
  CHECK(dz.support[0] == cm.sink);
}

TEST_CASE("countdown_as_mdp matches the game winner through prob1") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CountdownGame g = random_game(3, 3, 4, seed);
    WinTable wt = solve_game(g);
    CountdownMdp cm = countdown_as_mdp(g);
    REQUIRE(validate(cm.mdp).empty());
    std::vector<StateId> win = prob1(cm.mdp, cm.target);
    bool mdp_wins = std::binary_search(win.begin(), win.end(), cm.initial);
    CHECK(mdp_wins == wt.won(g.init_vertex, g.init_counter));
  }
}

TEST_CASE("random_game is deterministic and degenerate parameters behave") {
  CHECK(random_game(3, 3, 4, 7) == random_game(3, 3, 4, 7));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    CountdownGame g = random_game(1, 1, 2, seed);
    for (const CountdownGame::Edge& e : g.edges)
      CHECK(e == CountdownGame::Edge{0, 1, 0});
    CHECK(g.edges.size() <= 1);
  }
}

TEST_CASE("random_game round-trips through the text format") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    CountdownGame g = random_game(3, 3, 4, seed);
    CHECK(g.edges.size() <= 9);
    CountdownGame back = parse_game(game_to_text(g));
    CHECK(back == g);
  }
}
