#ifndef POPSYNC_SIMULATE_HPP
#define POPSYNC_SIMULATE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "popsync/product.hpp"
#include "popsync/reduction.hpp"

namespace popsync {

// Strategy under simulation: pilot, solver-extracted table or anything else
// that maps configurations to actions. Must throw to signal an undefined
// configuration.
using StrategyFn = std::function<ActionId(const Config&)>;

struct SimOutcome {
  bool reached_end = false;
  std::uint64_t steps = 0;
  Config final_config;
  std::vector<std::pair<Config, ActionId>> trace;  // filled when recording
};

struct RunOptions {
  std::uint64_t max_steps = 0;
  bool record_trace = false;
  std::optional<Config> initial;  // defaults to the all-start configuration
};

// One sampled execution: each step samples, for every component
// independently, a successor from the exact transition distribution.
// Deterministic for a fixed seed.
SimOutcome run(const Mdp& mdp, std::uint32_t n, const StrategyFn& strategy,
               std::uint64_t seed, const RunOptions& opts);

struct EstimateSummary {
  std::uint64_t runs = 0;
  std::uint64_t successes = 0;
  Rational success_rate;
  double mean_steps = 0.0;
  std::uint64_t min_steps = 0;
  std::uint64_t max_steps = 0;
};

// Aggregates independent runs with per-run seeds mix64(seed + run_index).
// The parallel flag switches between the OpenMP kernel and the serial
// reference; both produce identical summaries.
EstimateSummary estimate(const Mdp& mdp, std::uint32_t n, const StrategyFn& strategy,
                         std::uint64_t runs, std::uint64_t seed, const RunOptions& opts,
                         bool parallel = true);

// Step budget 10 * (c0 + 1) * n * (k_mc + k_ac + 4), generous for both the
// pilot and solver strategies on compiled MDPs.
std::uint64_t default_max_steps(const GadgetMap& gm, std::uint32_t n);

// Draws an index into the distribution from one 64-bit value, comparing
// against exact cumulative rational thresholds (no floating point).
std::size_t sample_index(const Distribution& dist, std::uint64_t draw);

}  // namespace popsync

#endif
