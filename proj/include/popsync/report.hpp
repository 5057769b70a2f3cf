#ifndef POPSYNC_REPORT_HPP
#define POPSYNC_REPORT_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "popsync/countdown.hpp"
#include "popsync/product.hpp"
#include "popsync/reduction.hpp"

namespace popsync {

// Per-population outcome of one equivalence run.
struct LemmaRow {
  std::uint32_t n = 0;
  bool synchronizable = false;
  std::uint64_t reachable_config_count = 0;
  double solve_millis = 0.0;
  std::optional<bool> pilot_certified;  // only for games player 1 wins
};

// Compares the dynamic-programming winner of the game with synchronizability
// of the compiled product over a window of population sizes:
//   player 1 wins  -> every tested n synchronizable;
//   player 2 wins  -> synchronizable exactly for n < min_sync_n.
struct LemmaReport {
  std::uint32_t n_vertices = 0;
  std::uint64_t n_edges = 0;
  long long c0 = 0;
  long long d_max = 0;
  std::uint32_t k_mc = 0;
  std::uint32_t k_ac = 0;
  std::uint32_t min_sync_n = 0;
  bool player1_wins = false;
  std::vector<LemmaRow> rows;
  bool consistent = false;
  bool pilots_ok = true;  // false if a pilot certification failed

  std::string to_json() const;
};

struct LemmaOptions {
  std::uint32_t extra = 1;  // tested window is 1 .. min_sync_n + extra
  bool literal_control_error = false;
  std::uint64_t cap = 5'000'000;
  bool parallel = true;
};

LemmaReport verify_lemma(const CountdownGame& game, const LemmaOptions& opts = {});

}  // namespace popsync

#endif
