#ifndef POPSYNC_COUNTDOWN_HPP
#define POPSYNC_COUNTDOWN_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "popsync/mdp.hpp"

namespace popsync {

// Two-player countdown game: from (v, c) player 1 picks a weight d <= c that
// labels some edge out of v, player 2 picks one such edge, play continues
// from (v', c - d). Player 1 wins when the counter hits exactly zero.
struct CountdownGame {
  struct Edge {
    std::uint32_t from;
    long long weight;
    std::uint32_t to;

    bool operator==(const Edge&) const = default;
  };

  std::vector<std::string> vertices;  // vertex id = index
  std::vector<Edge> edges;
  std::uint32_t init_vertex = 0;
  long long init_counter = 0;

  std::uint32_t vertex_count() const { return static_cast<std::uint32_t>(vertices.size()); }
  std::optional<std::uint32_t> vertex_id(std::string_view name) const;
  long long max_weight() const;

  bool operator==(const CountdownGame&) const = default;
};

struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_no, const std::string& what)
      : std::runtime_error("line " + std::to_string(line_no) + ": " + what), line(line_no) {}
};

// Line format: '# comment', 'init <vertex> <counter>', 'edge <from> <weight> <to>'.
CountdownGame parse_game(std::string_view text);
std::string game_to_text(const CountdownGame& game);

// Throws std::invalid_argument when a structural invariant is broken.
void validate_game(const CountdownGame& game);

// Exact winner per position, counters 0..init_counter, with a winning weight
// for player 1 wherever one exists (smallest such weight).
struct WinTable {
  std::uint32_t n_vertices = 0;
  long long c0 = 0;
  std::vector<std::uint8_t> win;   // [v * (c0+1) + c]
  std::vector<long long> move;     // winning weight, -1 where none recorded

  bool won(std::uint32_t v, long long c) const { return win[idx(v, c)] != 0; }
  long long move_at(std::uint32_t v, long long c) const { return move[idx(v, c)]; }
  std::size_t idx(std::uint32_t v, long long c) const {
    return std::size_t{v} * (c0 + 1) + static_cast<std::size_t>(c);
  }
};

WinTable solve_game(const CountdownGame& game);

// The same game against an adversary that resolves edges uniformly at random.
// States are (vertex, counter) pairs plus an absorbing sink for unplayable
// weights; actions are the distinct edge weights.
struct CountdownMdp {
  Mdp mdp;
  std::vector<StateId> target;  // all counter-zero states
  StateId initial = 0;
  StateId sink = 0;
};

CountdownMdp countdown_as_mdp(const CountdownGame& game);

// Deterministic in seed: up to three outgoing edges per vertex with weights in
// 1..max_weight. Vertices that end up with no incident edge (other than the
// initial one) are dropped so the text form round-trips exactly.
CountdownGame random_game(std::uint32_t n_vertices, long long max_weight, long long c0,
                          std::uint64_t seed);

}  // namespace popsync

#endif
