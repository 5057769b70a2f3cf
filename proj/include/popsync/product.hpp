#ifndef POPSYNC_PRODUCT_HPP
#define POPSYNC_PRODUCT_HPP

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "popsync/mdp.hpp"

namespace popsync {

// Multiset of MDP states: one point of the n-fold product up to component
// permutation. Entries are sorted by state id, counts are positive.
struct Config {
  std::vector<std::pair<StateId, std::uint32_t>> entries;

  std::uint64_t total() const;
  std::uint32_t count_of(StateId s) const;
  static Config single(StateId s, std::uint32_t count) { return Config{{{s, count}}}; }
  std::string key(const Mdp& mdp) const;  // "name:count,..." canonical form

  bool operator==(const Config&) const = default;
};

struct ConfigHash {
  std::size_t operator()(const Config& c) const {
    std::size_t h = 0xcbf29ce484222325ULL;
    for (const auto& [s, m] : c.entries) {
      h = (h ^ s) * 0x100000001b3ULL;
      h = (h ^ m) * 0x100000001b3ULL;
    }
    return h;
  }
};

// All configurations reachable by splitting each state's count among the
// successors of (state, action), deduplicated and in canonical order.
std::vector<Config> config_successors(const Mdp& mdp, const Config& config, ActionId action);

// Same successors with their exact product-multinomial probabilities.
std::vector<std::pair<Config, Rational>> config_successor_dist(const Mdp& mdp,
                                                               const Config& config,
                                                               ActionId action);

struct ResourceCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct BuildOptions {
  std::uint64_t cap = 5'000'000;  // explored configuration limit
  bool parallel = true;           // OpenMP frontier expansion
  // Merge every configuration marking Hell into the all-Hell configuration.
  // Hell counts never decrease, so this cannot change which configurations
  // reach the End configuration almost surely; it only shrinks the explored
  // space. Off by default: the exact reachable set is the reference.
  bool collapse_doomed = false;
};

// Counting quotient of the n-fold product, restricted to configurations
// reachable from the all-start configuration. Successor ids per
// (configuration, action) are stored in CSR form.
struct AbstractProduct {
  const Mdp* base = nullptr;
  std::uint32_t population = 0;
  bool collapsed = false;
  std::vector<Config> configs;
  std::unordered_map<Config, std::uint32_t, ConfigHash> index;
  std::vector<std::uint64_t> row_off;  // size configs*actions + 1
  std::vector<std::uint32_t> succ;
  std::uint32_t start_id = 0;
  std::optional<std::uint32_t> end_id;

  std::uint32_t n_states() const { return static_cast<std::uint32_t>(configs.size()); }
  std::uint32_t n_actions() const { return base->n_actions(); }
  std::span<const std::uint32_t> successors(std::uint32_t c, std::uint32_t a) const {
    std::size_t row = std::size_t{c} * n_actions() + a;
    return {succ.data() + row_off[row],
            static_cast<std::size_t>(row_off[row + 1] - row_off[row])};
  }

  // Materialize as a plain MDP with exact probabilities; states are named by
  // their configuration keys. Intended for dumps and small instances.
  Mdp to_mdp() const;
};

AbstractProduct build_quotient(const Mdp& mdp, std::uint32_t n, const BuildOptions& opts = {});

// Ordered-tuple product, the unquotiented reference for small populations.
struct FullProduct {
  const Mdp* base = nullptr;
  std::uint32_t population = 0;
  std::vector<std::vector<StateId>> tuples;
  std::unordered_map<std::string, std::uint32_t> index;  // keyed by packed tuple
  std::vector<std::uint64_t> row_off;
  std::vector<std::uint32_t> succ;
  std::uint32_t start_id = 0;
  std::optional<std::uint32_t> end_id;

  std::uint32_t n_states() const { return static_cast<std::uint32_t>(tuples.size()); }
  std::uint32_t n_actions() const { return base->n_actions(); }
  std::span<const std::uint32_t> successors(std::uint32_t t, std::uint32_t a) const {
    std::size_t row = std::size_t{t} * n_actions() + a;
    return {succ.data() + row_off[row],
            static_cast<std::size_t>(row_off[row + 1] - row_off[row])};
  }
  std::optional<std::uint32_t> find(const std::vector<StateId>& tuple) const;
};

FullProduct build_full(const Mdp& mdp, std::uint32_t n, std::uint64_t cap = 5'000'000);

// Winning configuration set of a product graph (almost-sure reachability of
// the End configuration), as a membership bitmap.
std::vector<std::uint8_t> product_winset(const AbstractProduct& p);
std::vector<std::uint8_t> product_winset(const FullProduct& p);

struct SyncOptions {
  std::uint64_t cap = 5'000'000;
  bool parallel = true;
  bool collapse = true;  // verdict-preserving, see BuildOptions::collapse_doomed
  bool certify = true;   // extract a strategy and certify it on the chain
};

struct SyncResult {
  bool synchronizable = false;
  bool certified = false;
  std::uint64_t config_count = 0;
  double solve_millis = 0.0;
  std::shared_ptr<AbstractProduct> product;
  // Per winning configuration id (End excluded), the action to play.
  std::unordered_map<std::uint32_t, ActionId> choice;
};

// Decides whether the n-fold product of mdp can be synchronized: whether the
// all-start configuration reaches the all-Heaven configuration almost surely
// under some strategy.
SyncResult check_sync(const Mdp& mdp, std::uint32_t n, const SyncOptions& opts = {});

}  // namespace popsync

#endif
