#ifndef POPSYNC_TESTS_ORACLE_HPP
#define POPSYNC_TESTS_ORACLE_HPP

// Test-only oracles, kept independent of the production code paths they
// check.

#include <cstdint>
#include <map>
#include <vector>

#include "popsync/countdown.hpp"
#include "popsync/mdp.hpp"
#include "popsync/rng.hpp"

namespace popsync::testing {

// Top-down game-tree search over plays, memoized per position. The
// production solver fills a table bottom-up over counter values; this one
// recurses over the moves of both players.
class NaiveGameOracle {
 public:
  explicit NaiveGameOracle(const CountdownGame& game) : game_(game) {}

  bool player1_wins(std::uint32_t v, long long c) {
    if (c == 0)
      return true;
    auto key = std::make_pair(v, c);
    auto it = memo_.find(key);
    if (it != memo_.end())
      return it->second;
    memo_[key] = false;  // cycle guard; positions repeat only with c unchanged,
                         // which cannot happen since every move decreases c
    bool win = false;
    for (long long d = 1; d <= c && !win; ++d) {
      bool playable = false;
      bool all_good = true;
      for (const CountdownGame::Edge& e : game_.edges) {
        if (e.from != v || e.weight != d)
          continue;
        playable = true;
        if (!player1_wins(e.to, c - d))
          all_good = false;
      }
      win = playable && all_good;
    }
    memo_[key] = win;
    return win;
  }

 private:
  const CountdownGame& game_;
  std::map<std::pair<std::uint32_t, long long>, bool> memo_;
};

// Every game over `n_vertices` vertices with weights in 1..max_weight,
// encoded by the subset of possible edges.
inline std::vector<CountdownGame> all_small_games(std::uint32_t n_vertices,
                                                  long long max_weight, long long c0) {
  std::vector<CountdownGame::Edge> all_edges;
  for (std::uint32_t from = 0; from < n_vertices; ++from)
    for (long long w = 1; w <= max_weight; ++w)
      for (std::uint32_t to = 0; to < n_vertices; ++to)
        all_edges.push_back({from, w, to});
  std::vector<CountdownGame> games;
  for (std::uint64_t mask = 0; mask < (1ULL << all_edges.size()); ++mask) {
    CountdownGame g;
    for (std::uint32_t v = 0; v < n_vertices; ++v)
      g.vertices.push_back("v" + std::to_string(v));
    g.init_vertex = 0;
    g.init_counter = c0;
    for (std::size_t i = 0; i < all_edges.size(); ++i)
      if (mask & (1ULL << i))
        g.edges.push_back(all_edges[i]);
    games.push_back(std::move(g));
  }
  return games;
}

// Replaces every probability by a fresh positive rational over the same
// support, exactly normalized.
inline Mdp reweight(const Mdp& mdp, std::uint64_t seed) {
  Mdp out = mdp;
  SplitMix64 rng(seed);
  for (Distribution& d : out.trans) {
    if (d.support.size() <= 1) {
      d.prob.assign(d.support.size(), Rational::whole(1));
      continue;
    }
    long long total = 0;
    std::vector<long long> w(d.support.size());
    for (auto& x : w) {
      x = 1 + static_cast<long long>(rng.below(9));
      total += x;
    }
    for (std::size_t i = 0; i < w.size(); ++i)
      d.prob[i] = Rational(w[i], total);
  }
  return out;
}

}  // namespace popsync::testing

#endif
