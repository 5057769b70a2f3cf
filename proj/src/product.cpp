#include "popsync/product.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>

#include "popsync/solver.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace popsync {

namespace {

void validate_config(const Mdp& mdp, const Config& config) {
  if (config.entries.empty())
    throw std::invalid_argument("config: empty");
  StateId prev = 0;
  bool first = true;
  for (const auto& [s, m] : config.entries) {
    if (s >= mdp.n_states())
      throw std::invalid_argument("config: unknown state id " + std::to_string(s));
    if (m == 0)
      throw std::invalid_argument("config: zero count entry");
    if (!first && s <= prev)
      throw std::invalid_argument("config: entries not sorted");
    prev = s;
    first = false;
  }
}

// Expands one (configuration, action) pair. Count mass moves deterministically
// wherever the support is a singleton; the remaining states are enumerated as
// compositions of their count over their successors.
class Expander {
 public:
  explicit Expander(const Mdp& mdp)
      : mdp_(mdp), dense_(mdp.n_states(), 0) {}

  // emit(std::vector<std::pair<StateId, uint32_t>>&&) is called once per
  // (possibly repeated) successor configuration.
  template <class Emit>
  void expand(const Config& config, ActionId action, Emit&& emit) {
    branches_.clear();
    touched_.clear();
    for (const auto& [s, m] : config.entries) {
      std::span<const StateId> supp = mdp_.successors(s, action);
      if (supp.empty())
        throw std::invalid_argument("config_successors: no distribution for state " +
                                    std::to_string(s));
      if (supp.size() == 1)
        add(supp[0], m);
      else
        branches_.push_back({supp, m});
    }
    recurse(0, std::forward<Emit>(emit));
    for (StateId s : touched_)
      dense_[s] = 0;
  }

 private:
  struct Branch {
    std::span<const StateId> supp;
    std::uint32_t count;
  };

  void add(StateId s, std::uint32_t m) {
    if (m == 0)
      return;
    if (dense_[s] == 0)
      touched_.push_back(s);
    dense_[s] += m;
  }
  void remove(StateId s, std::uint32_t m) { dense_[s] -= m; }

  template <class Emit>
  void recurse(std::size_t level, Emit&& emit) {
    if (level == branches_.size()) {
      std::vector<std::pair<StateId, std::uint32_t>> entries;
      entries.reserve(touched_.size());
      for (StateId s : touched_)
        if (dense_[s] > 0)
          entries.push_back({s, dense_[s]});
      std::sort(entries.begin(), entries.end());
      // A state can enter touched_ twice when its count drops back to zero
      // mid-recursion; both snapshots carry the same count.
      entries.erase(std::unique(entries.begin(), entries.end()), entries.end());
      emit(std::move(entries));
      return;
    }
    const Branch& b = branches_[level];
    split(level, 0, b.count, std::forward<Emit>(emit));
  }

  // Distribute `left` components over b.supp[pos..]; the last slot takes the
  // remainder.
  template <class Emit>
  void split(std::size_t level, std::size_t pos, std::uint32_t left, Emit&& emit) {
    const Branch& b = branches_[level];
    if (pos + 1 == b.supp.size()) {
      add(b.supp[pos], left);
      recurse(level + 1, std::forward<Emit>(emit));
      remove(b.supp[pos], left);
      return;
    }
    for (std::uint32_t k = 0; k <= left; ++k) {
      add(b.supp[pos], k);
      split(level, pos + 1, left - k, std::forward<Emit>(emit));
      remove(b.supp[pos], k);
    }
  }

  const Mdp& mdp_;
  std::vector<std::uint32_t> dense_;
  std::vector<StateId> touched_;
  std::vector<Branch> branches_;
};

long long binom(std::uint32_t n, std::uint32_t k) {
  if (k > n)
    return 0;
  k = std::min(k, n - k);
  __int128 r = 1;
  for (std::uint32_t i = 1; i <= k; ++i) {
    r = r * (n - k + i) / i;
    if (r > static_cast<__int128>(0x7fffffffffffffffLL))
      throw std::overflow_error("binomial coefficient out of range");
  }
  return static_cast<long long>(r);
}

}  // namespace

std::uint64_t Config::total() const {
  std::uint64_t t = 0;
  for (const auto& [s, m] : entries)
    t += m;
  return t;
}

std::uint32_t Config::count_of(StateId s) const {
  for (const auto& [q, m] : entries)
    if (q == s)
      return m;
  return 0;
}

std::string Config::key(const Mdp& mdp) const {
  std::string out;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (i)
      out += ",";
    out += mdp.states[entries[i].first].name;
    out += ":";
    out += std::to_string(entries[i].second);
  }
  return out;
}

std::vector<Config> config_successors(const Mdp& mdp, const Config& config, ActionId action) {
  validate_config(mdp, config);
  if (action >= mdp.n_actions())
    throw std::invalid_argument("config_successors: unknown action id " +
                                std::to_string(action));
  Expander ex(mdp);
  std::vector<Config> out;
  ex.expand(config, action,
            [&](std::vector<std::pair<StateId, std::uint32_t>>&& entries) {
              out.push_back(Config{std::move(entries)});
            });
  std::sort(out.begin(), out.end(),
            [](const Config& a, const Config& b) { return a.entries < b.entries; });
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<std::pair<Config, Rational>> config_successor_dist(const Mdp& mdp,
                                                               const Config& config,
                                                               ActionId action) {
  validate_config(mdp, config);
  if (action >= mdp.n_actions())
    throw std::invalid_argument("config_successor_dist: unknown action id " +
                                std::to_string(action));
  // Weight of one composition (k_1..k_s) of m components over s successors:
  // multinomial(m; k) * p_1^{k_1} * ... * p_s^{k_s}.
  std::map<std::vector<std::pair<StateId, std::uint32_t>>, Rational> acc;
  struct Branch {
    const Distribution* dist;
    std::uint32_t count;
  };
  std::vector<Branch> branches;
  std::map<StateId, std::uint32_t> base;
  for (const auto& [s, m] : config.entries) {
    const Distribution& d = mdp.dist(s, action);
    if (d.support.empty())
      throw std::invalid_argument("config_successor_dist: no distribution for state " +
                                  std::to_string(s));
    if (d.support.size() == 1)
      base[d.support[0]] += m;
    else
      branches.push_back({&d, m});
  }
  std::map<StateId, std::uint32_t> counts = base;
  std::function<void(std::size_t, Rational)> rec = [&](std::size_t level, Rational w) {
    if (level == branches.size()) {
      std::vector<std::pair<StateId, std::uint32_t>> entries(counts.begin(), counts.end());
      auto it = acc.find(entries);
      if (it == acc.end())
        acc.emplace(std::move(entries), w);
      else
        it->second += w;
      return;
    }
    const Branch& b = branches[level];
    std::function<void(std::size_t, std::uint32_t, Rational)> comp =
        [&](std::size_t pos, std::uint32_t left, Rational pw) {
          const Distribution& d = *b.dist;
          if (pos + 1 == d.support.size()) {
            Rational term = pw;
            for (std::uint32_t j = 0; j < left; ++j)
              term *= d.prob[pos];
            counts[d.support[pos]] += left;
            rec(level + 1, w * term);
            if ((counts[d.support[pos]] -= left) == 0)
              counts.erase(d.support[pos]);
            return;
          }
          for (std::uint32_t k = 0; k <= left; ++k) {
            Rational term = pw * Rational::whole(binom(left, k));
            for (std::uint32_t j = 0; j < k; ++j)
              term *= d.prob[pos];
            counts[d.support[pos]] += k;
            comp(pos + 1, left - k, term);
            if ((counts[d.support[pos]] -= k) == 0)
              counts.erase(d.support[pos]);
          }
        };
    comp(0, b.count, Rational::whole(1));
  };
  rec(0, Rational::whole(1));

  std::vector<std::pair<Config, Rational>> out;
  out.reserve(acc.size());
  for (auto& [entries, p] : acc)
    out.push_back({Config{entries}, p});
  return out;
}

namespace {

struct ExpandedRow {
  // successor configurations per action, deduplicated, canonical order
  std::vector<std::vector<Config>> per_action;
};

// Frontier expansion kernels. Results are merged in frontier order, so the
// parallel kernel produces the same product as the serial reference.
void expand_serial(const Mdp& mdp, const std::vector<Config>& frontier,
                   std::optional<StateId> collapse_hell, std::uint32_t population,
                   std::vector<ExpandedRow>& rows) {
  Expander ex(mdp);
  const std::uint32_t n_actions = mdp.n_actions();
  for (std::size_t i = 0; i < frontier.size(); ++i) {
    rows[i].per_action.assign(n_actions, {});
    for (ActionId a = 0; a < n_actions; ++a) {
      std::vector<Config>& out = rows[i].per_action[a];
      ex.expand(frontier[i], a,
                [&](std::vector<std::pair<StateId, std::uint32_t>>&& entries) {
                  Config c{std::move(entries)};
                  if (collapse_hell && c.count_of(*collapse_hell) > 0)
                    c = Config::single(*collapse_hell, population);
                  out.push_back(std::move(c));
                });
      std::sort(out.begin(), out.end(),
                [](const Config& x, const Config& y) { return x.entries < y.entries; });
      out.erase(std::unique(out.begin(), out.end()), out.end());
    }
  }
}

void expand_parallel(const Mdp& mdp, const std::vector<Config>& frontier,
                     std::optional<StateId> collapse_hell, std::uint32_t population,
                     std::vector<ExpandedRow>& rows) {
#ifdef _OPENMP
#pragma omp parallel
  {
    Expander ex(mdp);
    const std::uint32_t n_actions = mdp.n_actions();
#pragma omp for schedule(dynamic, 16)
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      rows[i].per_action.assign(n_actions, {});
      for (ActionId a = 0; a < n_actions; ++a) {
        std::vector<Config>& out = rows[i].per_action[a];
        ex.expand(frontier[i], a,
                  [&](std::vector<std::pair<StateId, std::uint32_t>>&& entries) {
                    Config c{std::move(entries)};
                    if (collapse_hell && c.count_of(*collapse_hell) > 0)
                      c = Config::single(*collapse_hell, population);
                    out.push_back(std::move(c));
                  });
        std::sort(out.begin(), out.end(),
                  [](const Config& x, const Config& y) { return x.entries < y.entries; });
        out.erase(std::unique(out.begin(), out.end()), out.end());
      }
    }
  }
#else
  expand_serial(mdp, frontier, collapse_hell, population, rows);
#endif
}

}  // namespace

AbstractProduct build_quotient(const Mdp& mdp, std::uint32_t n, const BuildOptions& opts) {
  if (n < 1)
    throw std::invalid_argument("build_quotient: population must be positive");
  auto start_state = mdp.state_with_label("start");
  if (!start_state)
    throw std::invalid_argument("build_quotient: no state labeled 'start'");
  std::optional<StateId> hell;
  if (opts.collapse_doomed) {
    hell = mdp.state_with_label("hell");
    if (!hell)
      throw std::invalid_argument("build_quotient: collapse needs a state labeled 'hell'");
  }

  AbstractProduct p;
  p.base = &mdp;
  p.population = n;
  p.collapsed = opts.collapse_doomed;
  p.configs.push_back(Config::single(*start_state, n));
  p.index.emplace(p.configs[0], 0);
  p.start_id = 0;
  p.row_off.push_back(0);

  std::vector<Config> frontier{p.configs[0]};
  std::vector<ExpandedRow> rows;
  while (!frontier.empty()) {
    rows.assign(frontier.size(), {});
    if (opts.parallel)
      expand_parallel(mdp, frontier, hell, n, rows);
    else
      expand_serial(mdp, frontier, hell, n, rows);

    std::vector<Config> next;
    for (std::size_t i = 0; i < frontier.size(); ++i) {
      for (ActionId a = 0; a < mdp.n_actions(); ++a) {
        for (Config& c : rows[i].per_action[a]) {
          auto [it, inserted] = p.index.try_emplace(c, p.n_states());
          if (inserted) {
            p.configs.push_back(c);
            if (p.configs.size() > opts.cap)
              throw ResourceCapError("configuration cap of " + std::to_string(opts.cap) +
                                     " exceeded");
            next.push_back(std::move(c));
          }
          p.succ.push_back(it->second);
        }
        p.row_off.push_back(p.succ.size());
      }
    }
    frontier = std::move(next);
  }

  auto heaven = mdp.state_with_label("heaven");
  if (heaven) {
    auto it = p.index.find(Config::single(*heaven, n));
    if (it != p.index.end())
      p.end_id = it->second;
  }
  return p;
}

Mdp AbstractProduct::to_mdp() const {
  Mdp out;
  out.actions = base->actions;
  out.states.resize(configs.size());
  for (std::uint32_t c = 0; c < configs.size(); ++c) {
    out.states[c].name = configs[c].key(*base);
    if (c == start_id)
      out.states[c].labels.push_back("start");
    if (end_id && c == *end_id)
      out.states[c].labels.push_back("end");
  }
  std::optional<StateId> hell = base->state_with_label("hell");
  out.trans.resize(std::size_t{n_states()} * n_actions());
  for (std::uint32_t c = 0; c < configs.size(); ++c) {
    for (ActionId a = 0; a < n_actions(); ++a) {
      std::map<std::uint32_t, Rational> merged;
      for (auto& [succ_cfg, prob] : config_successor_dist(*base, configs[c], a)) {
        Config target = succ_cfg;
        if (collapsed && hell && target.count_of(*hell) > 0)
          target = Config::single(*hell, population);
        merged[index.at(target)] += prob;
      }
      Distribution d;
      for (auto& [id, prob] : merged) {
        d.support.push_back(id);
        d.prob.push_back(prob);
      }
      out.dist(c, a) = std::move(d);
    }
  }
  return out;
}

namespace {

std::string tuple_key(const std::vector<StateId>& tuple) {
  std::string k;
  for (StateId s : tuple) {
    k += std::to_string(s);
    k += ',';
  }
  return k;
}

}  // namespace

std::optional<std::uint32_t> FullProduct::find(const std::vector<StateId>& tuple) const {
  auto it = index.find(tuple_key(tuple));
  if (it == index.end())
    return std::nullopt;
  return it->second;
}

FullProduct build_full(const Mdp& mdp, std::uint32_t n, std::uint64_t cap) {
  if (n < 1 || n > 3)
    throw std::invalid_argument("build_full: population must be between 1 and 3");
  auto start_state = mdp.state_with_label("start");
  if (!start_state)
    throw std::invalid_argument("build_full: no state labeled 'start'");

  FullProduct p;
  p.base = &mdp;
  p.population = n;
  p.tuples.push_back(std::vector<StateId>(n, *start_state));
  p.index.emplace(tuple_key(p.tuples[0]), 0);
  p.start_id = 0;
  p.row_off.push_back(0);

  for (std::uint32_t head = 0; head < p.tuples.size(); ++head) {
    std::vector<StateId> tuple = p.tuples[head];  // copy: p.tuples grows below
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      std::vector<std::span<const StateId>> supp(n);
      bool total = true;
      for (std::uint32_t i = 0; i < n; ++i) {
        supp[i] = mdp.successors(tuple[i], a);
        if (supp[i].empty())
          total = false;
      }
      if (!total)
        throw std::invalid_argument("build_full: missing distribution");
      std::vector<std::uint32_t> ids;
      std::vector<std::size_t> pick(n, 0);
      for (;;) {
        std::vector<StateId> succ(n);
        for (std::uint32_t i = 0; i < n; ++i)
          succ[i] = supp[i][pick[i]];
        auto [it, inserted] = p.index.try_emplace(tuple_key(succ), p.n_states());
        if (inserted) {
          p.tuples.push_back(std::move(succ));
          if (p.tuples.size() > cap)
            throw ResourceCapError("tuple cap of " + std::to_string(cap) + " exceeded");
        }
        ids.push_back(it->second);
        std::uint32_t i = 0;
        while (i < n && ++pick[i] == supp[i].size())
          pick[i++] = 0;
        if (i == n)
          break;
      }
      std::sort(ids.begin(), ids.end());
      ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
      p.succ.insert(p.succ.end(), ids.begin(), ids.end());
      p.row_off.push_back(p.succ.size());
    }
  }

  auto heaven = mdp.state_with_label("heaven");
  if (heaven) {
    auto it = p.index.find(tuple_key(std::vector<StateId>(n, *heaven)));
    if (it != p.index.end())
      p.end_id = it->second;
  }
  return p;
}

template <class P>
static std::vector<std::uint8_t> winset_of(const P& p) {
  if (!p.end_id)
    return std::vector<std::uint8_t>(p.n_states(), 0);
  detail::SupportSolver<P> solver(p);
  std::uint32_t target[1] = {*p.end_id};
  return solver.solve(target).win;
}

std::vector<std::uint8_t> product_winset(const AbstractProduct& p) { return winset_of(p); }
std::vector<std::uint8_t> product_winset(const FullProduct& p) { return winset_of(p); }

SyncResult check_sync(const Mdp& mdp, std::uint32_t n, const SyncOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  if (!mdp.state_with_label("heaven"))
    throw std::invalid_argument("check_sync: no state labeled 'heaven'");

  SyncResult result;
  BuildOptions build;
  build.cap = opts.cap;
  build.parallel = opts.parallel;
  build.collapse_doomed = opts.collapse;
  result.product = std::make_shared<AbstractProduct>(build_quotient(mdp, n, build));
  const AbstractProduct& p = *result.product;
  result.config_count = p.n_states();

  if (p.end_id) {
    detail::SupportSolver<AbstractProduct> solver(p);
    std::uint32_t target[1] = {*p.end_id};
    detail::ReachFix fix = solver.solve(target);
    result.synchronizable = fix.win[p.start_id] != 0;
    if (result.synchronizable && opts.certify) {
      std::vector<std::uint8_t> allowed = solver.allowed_actions(fix.win);
      result.choice = detail::extract_choices(p, fix, allowed, target);
      result.certified = detail::reaches_target_from_everywhere(
          p.n_states(), p.start_id, target,
          [&](std::uint32_t c) -> std::span<const std::uint32_t> {
            auto it = result.choice.find(c);
            if (it == result.choice.end())
              return {};  // terminal: the End configuration
            return p.successors(c, it->second);
          });
    }
  }
  result.solve_millis =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return result;
}

}  // namespace popsync
