#include "popsync/pilot.hpp"

#include <algorithm>
#include <optional>

#include "popsync/solver.hpp"

namespace popsync {

namespace {

// Value a counter holds, or nothing if some bit pair is not marked on exactly
// one side.
std::optional<long long> counter_value(const Config& config,
                                       const std::vector<std::array<StateId, 2>>& bits) {
  long long value = 0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    bool zero = config.count_of(bits[i][0]) > 0;
    bool one = config.count_of(bits[i][1]) > 0;
    if (zero == one)
      return std::nullopt;
    if (one)
      value |= 1LL << i;
  }
  return value;
}

std::uint32_t lowest_set_bit(long long value) {
  std::uint32_t i = 0;
  while (((value >> i) & 1) == 0)
    ++i;
  return i;
}

[[noreturn]] void undefined(const PilotContext& ctx, const Config& config,
                            const std::string& why) {
  throw PilotUndefined("pilot undefined at " + config.key(*ctx.mdp) + ": " + why);
}

}  // namespace

ActionId pilot_action(const PilotContext& ctx, const Config& config) {
  const GadgetMap& gm = *ctx.gm;
  std::uint64_t n = config.total();

  if (config.count_of(gm.hell) > 0)
    undefined(ctx, config, "Hell is marked");
  if (config.count_of(gm.heaven) == n)
    return gm.a_end;  // synchronized; end is ignored everywhere here
  if (config.count_of(gm.start_state) == n)
    return gm.a_start;
  if (config.count_of(gm.start_state) > 0)
    undefined(ctx, config, "initial state partially marked");

  // Initialization check: a gadget nobody reached is a direct win.
  std::uint32_t at_w = config.count_of(gm.ctrl_w);
  std::uint32_t at_g = config.count_of(gm.ctrl_g);
  std::uint32_t at_a = config.count_of(gm.ctrl_a);
  std::uint32_t at_b = config.count_of(gm.ctrl_b);
  for (std::uint32_t i = 0; i < gm.k_mc; ++i)
    if (config.count_of(gm.mc_bit[i][0]) == 0 && config.count_of(gm.mc_bit[i][1]) == 0)
      return gm.a_mc_err[i];
  for (std::uint32_t i = 0; i < gm.k_ac; ++i)
    if (config.count_of(gm.ac_bit[i][0]) == 0 && config.count_of(gm.ac_bit[i][1]) == 0)
      return gm.a_ac_err[i];
  // end is only safe while no simulation is in flight (control at G, A or B).
  if (config.count_of(gm.wait_state) == 0 && config.count_of(gm.ready) == 0 &&
      at_g + at_a + at_b == 0)
    return gm.a_end;
  if (at_w + at_g + at_a + at_b == 0)
    return gm.a_cerr;
  if ((at_w > 0) + (at_g > 0) + (at_a > 0) + (at_b > 0) > 1)
    undefined(ctx, config, "control gadget marked in several places");

  if (at_w > 0) {
    // Isolation phase.
    if (config.count_of(gm.ready) == 1)
      return gm.a_go;
    return gm.a_wait;
  }

  auto mc = counter_value(config, gm.mc_bit);
  if (!mc)
    undefined(ctx, config, "MC holds no number");
  if (at_g > 0) {
    if (*mc == 0)
      return gm.a_win;
    // One simulated round of the game from (v, mc).
    std::optional<std::uint32_t> vertex;
    for (std::uint32_t v = 0; v < gm.game_vertex.size(); ++v) {
      std::uint32_t m = config.count_of(gm.game_vertex[v]);
      if (m == 0)
        continue;
      if (vertex || m != 1)
        undefined(ctx, config, "expected exactly one isolated game component");
      vertex = v;
    }
    if (!vertex)
      undefined(ctx, config, "no game vertex marked");
    if (!ctx.wt->won(*vertex, *mc))
      undefined(ctx, config, "player 1 loses from the marked game position");
    long long d = ctx.wt->move_at(*vertex, *mc);
    auto action = gm.game_action(*vertex, d);
    if (!action)
      undefined(ctx, config, "no action for the winning move");
    return *action;
  }

  auto ac = counter_value(config, gm.ac_bit);
  if (!ac)
    undefined(ctx, config, "AC holds no number");
  if (at_a > 0) {
    if (*ac == 0)
      return gm.a_next;
    if (*mc == 0)
      undefined(ctx, config, "MC exhausted before AC");
    return gm.a_mc_dec[lowest_set_bit(*mc)];
  }
  if (*ac == 0)
    undefined(ctx, config, "AC exhausted at control B");
  return gm.a_ac_dec[lowest_set_bit(*ac)];
}

PilotResult verify_pilot(const PilotContext& ctx, std::uint32_t n, std::uint64_t cap) {
  PilotResult result;
  const GadgetMap& gm = *ctx.gm;
  if (!ctx.wt->won(gm.init_vertex, gm.c0)) {
    result.error = "player 1 does not win the underlying game";
    return result;
  }

  std::vector<Config> configs{Config::single(gm.start_state, n)};
  std::unordered_map<Config, std::uint32_t, ConfigHash> index;
  index.emplace(configs[0], 0);
  std::vector<std::vector<std::uint32_t>> succ;
  std::optional<std::uint32_t> end_id;
  Config end_config = Config::single(gm.heaven, n);

  try {
    for (std::uint32_t head = 0; head < configs.size(); ++head) {
      Config cfg = configs[head];  // copy: configs grows below
      if (cfg == end_config)
        end_id = head;
      ActionId action = pilot_action(ctx, cfg);
      std::vector<std::uint32_t> ids;
      for (Config& next : config_successors(*ctx.mdp, cfg, action)) {
        auto [it, inserted] = index.try_emplace(next, static_cast<std::uint32_t>(configs.size()));
        if (inserted) {
          configs.push_back(std::move(next));
          if (configs.size() > cap) {
            result.reachable_configs = configs.size();
            result.error = "configuration cap exceeded";
            return result;
          }
        }
        ids.push_back(it->second);
      }
      succ.push_back(std::move(ids));
    }
  } catch (const PilotUndefined& e) {
    result.reachable_configs = configs.size();
    result.error = e.what();
    return result;
  }

  result.reachable_configs = configs.size();
  if (!end_id) {
    result.error = "End configuration not reachable under the pilot";
    return result;
  }
  std::uint32_t target[1] = {*end_id};
  result.certified = detail::reaches_target_from_everywhere(
      static_cast<std::uint32_t>(configs.size()), 0, target,
      [&](std::uint32_t c) -> const std::vector<std::uint32_t>& { return succ[c]; });
  if (!result.certified)
    result.error = "a pilot-reachable configuration cannot reach End";
  return result;
}

}  // namespace popsync
