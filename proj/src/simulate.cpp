#include "popsync/simulate.hpp"

#include <algorithm>
#include <numeric>

#include "popsync/rng.hpp"

namespace popsync {

namespace {

// Cumulative numerators over one common denominator. draw / 2^64 falls into
// bucket i iff draw * den < cum[i] * 2^64, checked exactly in 128 bits.
struct CumTable {
  std::vector<std::uint64_t> cum;
  std::uint64_t den = 1;
};

CumTable cum_table(const Distribution& dist) {
  CumTable t;
  long long den = 1;
  for (const Rational& p : dist.prob)
    den = std::lcm(den, p.den);
  t.den = static_cast<std::uint64_t>(den);
  std::uint64_t acc = 0;
  for (const Rational& p : dist.prob) {
    acc += static_cast<std::uint64_t>(p.num * (den / p.den));
    t.cum.push_back(acc);
  }
  return t;
}

std::size_t pick(const CumTable& t, std::uint64_t draw) {
  unsigned __int128 lhs = static_cast<unsigned __int128>(draw) * t.den;
  for (std::size_t i = 0; i < t.cum.size(); ++i)
    if (lhs < (static_cast<unsigned __int128>(t.cum[i]) << 64))
      return i;
  return t.cum.size() - 1;
}

}  // namespace

std::size_t sample_index(const Distribution& dist, std::uint64_t draw) {
  return pick(cum_table(dist), draw);
}

std::uint64_t default_max_steps(const GadgetMap& gm, std::uint32_t n) {
  return 10ULL * static_cast<std::uint64_t>(gm.c0 + 1) * n * (gm.k_mc + gm.k_ac + 4);
}

SimOutcome run(const Mdp& mdp, std::uint32_t n, const StrategyFn& strategy,
               std::uint64_t seed, const RunOptions& opts) {
  auto start_state = mdp.state_with_label("start");
  auto heaven = mdp.state_with_label("heaven");
  if (!opts.initial && !start_state)
    throw std::invalid_argument("run: no state labeled 'start' and no initial configuration");
  if (!heaven)
    throw std::invalid_argument("run: no state labeled 'heaven'");

  Config end_config = Config::single(*heaven, n);
  Config config = opts.initial ? *opts.initial : Config::single(*start_state, n);
  if (config.total() != n)
    throw std::invalid_argument("run: initial configuration has the wrong population");

  // Sampling tables built on demand, one per (state, action) pair.
  std::vector<CumTable> tables(mdp.trans.size());
  std::vector<std::uint8_t> have(mdp.trans.size(), 0);

  SplitMix64 rng(seed);
  SimOutcome out;
  std::vector<std::uint32_t> scratch(mdp.n_states(), 0);
  while (out.steps < opts.max_steps) {
    if (config == end_config) {
      out.reached_end = true;
      break;
    }
    ActionId action = strategy(config);
    if (opts.record_trace)
      out.trace.push_back({config, action});

    std::vector<StateId> touched;
    for (const auto& [s, m] : config.entries) {
      const Distribution& d = mdp.dist(s, action);
      if (d.support.empty())
        throw std::invalid_argument("run: no distribution for state " + std::to_string(s));
      if (d.support.size() == 1) {
        StateId t = d.support[0];
        if (scratch[t] == 0)
          touched.push_back(t);
        scratch[t] += m;
        continue;
      }
      std::size_t cell = mdp.idx(s, action);
      if (!have[cell]) {
        tables[cell] = cum_table(d);
        have[cell] = 1;
      }
      for (std::uint32_t j = 0; j < m; ++j) {
        StateId t = d.support[pick(tables[cell], rng.next())];
        if (scratch[t] == 0)
          touched.push_back(t);
        scratch[t] += 1;
      }
    }
    Config next;
    next.entries.reserve(touched.size());
    std::sort(touched.begin(), touched.end());
    for (StateId t : touched) {
      next.entries.push_back({t, scratch[t]});
      scratch[t] = 0;
    }
    config = std::move(next);
    ++out.steps;
  }
  if (!out.reached_end && config == end_config)
    out.reached_end = true;  // budget exactly exhausted on arrival
  out.final_config = std::move(config);
  return out;
}

EstimateSummary estimate(const Mdp& mdp, std::uint32_t n, const StrategyFn& strategy,
                         std::uint64_t runs, std::uint64_t seed, const RunOptions& opts,
                         bool parallel) {
  if (runs == 0)
    throw std::invalid_argument("estimate: need at least one run");
  std::vector<std::uint64_t> steps(runs, 0);
  std::vector<std::uint8_t> success(runs, 0);

  if (parallel) {
#pragma omp parallel for schedule(dynamic, 8)
    for (std::uint64_t i = 0; i < runs; ++i) {
      SimOutcome o = run(mdp, n, strategy, mix64(seed + i), opts);
      steps[i] = o.steps;
      success[i] = o.reached_end ? 1 : 0;
    }
  } else {
    for (std::uint64_t i = 0; i < runs; ++i) {
      SimOutcome o = run(mdp, n, strategy, mix64(seed + i), opts);
      steps[i] = o.steps;
      success[i] = o.reached_end ? 1 : 0;
    }
  }

  EstimateSummary sum;
  sum.runs = runs;
  sum.min_steps = steps[0];
  sum.max_steps = steps[0];
  double total = 0;
  for (std::uint64_t i = 0; i < runs; ++i) {
    sum.successes += success[i];
    total += static_cast<double>(steps[i]);
    sum.min_steps = std::min(sum.min_steps, steps[i]);
    sum.max_steps = std::max(sum.max_steps, steps[i]);
  }
  sum.success_rate = Rational(static_cast<long long>(sum.successes),
                              static_cast<long long>(runs));
  sum.mean_steps = total / static_cast<double>(runs);
  return sum;
}

}  // namespace popsync
