#ifndef POPSYNC_SOLVER_HPP
#define POPSYNC_SOLVER_HPP

#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace popsync::detail {

inline constexpr std::uint32_t kNoRank = std::numeric_limits<std::uint32_t>::max();

struct ReachFix {
  std::vector<std::uint8_t> win;   // membership in the computed set
  std::vector<std::uint32_t> rank; // BFS level of the final backward pass, 0 on targets
};

// Almost-sure reachability over transition supports. Graph requirements:
//   n_states(), n_actions(), successors(s, a) -> range of state ids.
// Nested fixpoint: keep the candidate set W, restrict to actions whose whole
// support stays in W, take backward closure of the targets through those
// actions, shrink W to the closure, repeat until stable.
template <class Graph>
class SupportSolver {
 public:
  explicit SupportSolver(const Graph& g) : g_(g) {
    n_ = g_.n_states();
    a_ = g_.n_actions();
    build_reverse();
  }

  // One backward closure for a fixed candidate set.
  ReachFix closure(std::span<const std::uint32_t> targets,
                   const std::vector<std::uint8_t>& candidate) const {
    std::vector<std::uint8_t> allowed = allowed_actions(candidate);
    ReachFix fix;
    fix.win.assign(n_, 0);
    fix.rank.assign(n_, kNoRank);
    std::vector<std::uint32_t> queue;
    queue.reserve(n_);
    for (std::uint32_t t : targets) {
      if (candidate[t] && !fix.win[t]) {
        fix.win[t] = 1;
        fix.rank[t] = 0;
        queue.push_back(t);
      }
    }
    for (std::size_t head = 0; head < queue.size(); ++head) {
      std::uint32_t t = queue[head];
      for (std::uint32_t e = rev_off_[t]; e < rev_off_[t + 1]; ++e) {
        std::uint64_t sa = rev_sa_[e];
        std::uint32_t s = static_cast<std::uint32_t>(sa / a_);
        if (fix.win[s] || !candidate[s] || !allowed[sa])
          continue;
        fix.win[s] = 1;
        fix.rank[s] = fix.rank[t] + 1;
        queue.push_back(s);
      }
    }
    return fix;
  }

  ReachFix solve(std::span<const std::uint32_t> targets) const {
    std::vector<std::uint8_t> candidate(n_, 1);
    for (;;) {
      ReachFix fix = closure(targets, candidate);
      if (fix.win == candidate)
        return fix;
      candidate = fix.win;
    }
  }

  std::vector<std::uint8_t> allowed_actions(const std::vector<std::uint8_t>& candidate) const {
    std::vector<std::uint8_t> allowed(std::size_t{n_} * a_, 0);
    for (std::uint32_t s = 0; s < n_; ++s) {
      for (std::uint32_t a = 0; a < a_; ++a) {
        bool ok = true;
        for (std::uint32_t t : g_.successors(s, a)) {
          if (!candidate[t]) {
            ok = false;
            break;
          }
        }
        allowed[std::size_t{s} * a_ + a] = ok ? 1 : 0;
      }
    }
    return allowed;
  }

 private:
  void build_reverse() {
    rev_off_.assign(n_ + 1, 0);
    std::uint64_t edges = 0;
    for (std::uint32_t s = 0; s < n_; ++s)
      for (std::uint32_t a = 0; a < a_; ++a)
        for (std::uint32_t t : g_.successors(s, a)) {
          ++rev_off_[t + 1];
          ++edges;
        }
    for (std::uint32_t i = 0; i < n_; ++i)
      rev_off_[i + 1] += rev_off_[i];
    rev_sa_.resize(edges);
    std::vector<std::uint32_t> cursor(rev_off_.begin(), rev_off_.end() - 1);
    for (std::uint32_t s = 0; s < n_; ++s)
      for (std::uint32_t a = 0; a < a_; ++a) {
        std::uint64_t sa = std::uint64_t{s} * a_ + a;
        for (std::uint32_t t : g_.successors(s, a))
          rev_sa_[cursor[t]++] = sa;
      }
  }

  const Graph& g_;
  std::uint32_t n_ = 0;
  std::uint32_t a_ = 0;
  std::vector<std::uint32_t> rev_off_;
  std::vector<std::uint64_t> rev_sa_;
};

// Memoryless choices over a computed winning set: for each winning non-target
// state, the allowed action with the smallest reachable rank, then the lowest
// action index. Every chosen action's support stays inside the winning set
// and touches a strictly smaller rank.
template <class Graph>
std::unordered_map<std::uint32_t, std::uint32_t> extract_choices(
    const Graph& g, const ReachFix& fix, const std::vector<std::uint8_t>& allowed,
    std::span<const std::uint32_t> targets) {
  std::vector<std::uint8_t> is_target(g.n_states(), 0);
  for (std::uint32_t t : targets)
    is_target[t] = 1;
  std::unordered_map<std::uint32_t, std::uint32_t> choice;
  const std::uint32_t a_count = g.n_actions();
  for (std::uint32_t s = 0; s < g.n_states(); ++s) {
    if (!fix.win[s] || is_target[s])
      continue;
    std::uint32_t best_rank = kNoRank;
    std::uint32_t best_action = 0;
    bool found = false;
    for (std::uint32_t a = 0; a < a_count; ++a) {
      if (!allowed[std::size_t{s} * a_count + a])
        continue;
      std::uint32_t lowest = kNoRank;
      for (std::uint32_t t : g.successors(s, a))
        lowest = std::min(lowest, fix.rank[t]);
      if (lowest < fix.rank[s] && (!found || lowest < best_rank)) {
        found = true;
        best_rank = lowest;
        best_action = a;
      }
    }
    if (!found)
      throw std::logic_error("extract_choices: no progressing action at state " +
                             std::to_string(s));
    choice.emplace(s, best_action);
  }
  return choice;
}

// Reachability of target from every state reachable from initial, on a
// successor function: the finite-chain criterion for almost-sure reachability.
template <class SuccFn>
bool reaches_target_from_everywhere(std::uint32_t n_states, std::uint32_t initial,
                                    std::span<const std::uint32_t> targets,
                                    SuccFn&& successors_of) {
  std::vector<std::uint8_t> reached(n_states, 0);
  std::vector<std::uint32_t> queue;
  reached[initial] = 1;
  queue.push_back(initial);
  for (std::size_t head = 0; head < queue.size(); ++head)
    for (std::uint32_t t : successors_of(queue[head]))
      if (!reached[t]) {
        reached[t] = 1;
        queue.push_back(t);
      }

  // Backward closure of the targets inside the reachable set.
  std::vector<std::vector<std::uint32_t>> rev(n_states);
  for (std::uint32_t s : queue)
    for (std::uint32_t t : successors_of(s))
      rev[t].push_back(s);
  std::vector<std::uint8_t> can_reach(n_states, 0);
  std::vector<std::uint32_t> back;
  for (std::uint32_t t : targets)
    if (t < n_states && reached[t] && !can_reach[t]) {
      can_reach[t] = 1;
      back.push_back(t);
    }
  for (std::size_t head = 0; head < back.size(); ++head)
    for (std::uint32_t p : rev[back[head]])
      if (reached[p] && !can_reach[p]) {
        can_reach[p] = 1;
        back.push_back(p);
      }
  for (std::uint32_t s : queue)
    if (!can_reach[s])
      return false;
  return true;
}

}  // namespace popsync::detail

#endif
