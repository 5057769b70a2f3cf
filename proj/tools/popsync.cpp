#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "popsync/countdown.hpp"
#include "popsync/pilot.hpp"
#include "popsync/product.hpp"
#include "popsync/report.hpp"
#include "popsync/rng.hpp"
#include "popsync/simulate.hpp"

namespace {

using namespace popsync;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitInput = 2;
constexpr int kExitResource = 3;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// temp-and-rename so readers never observe a half-written file
void write_file(const std::string& path, const std::string& content) {
  std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, target);
}

std::string sibling_path(const std::string& base, const char* suffix) {
  std::filesystem::path p(base);
  std::filesystem::path out = p.parent_path() / p.stem();
  out += suffix;
  return out.string();
}

std::uint64_t default_cap() {
  if (const char* env = std::getenv("POPSYNC_CAP")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(env, &end, 10);
    if (end && *end == '\0' && v > 0)
      return v;
  }
  return 5'000'000;
}

CountdownGame load_game(const std::string& path) { return parse_game(read_file(path)); }

int cmd_solve_game(const std::string& path, const std::string& out) {
  CountdownGame game = load_game(path);
  WinTable wt = solve_game(game);
  bool p1 = wt.won(game.init_vertex, game.init_counter);
  std::cout << (p1 ? "Player 1 wins" : "Player 2 wins") << " from ("
            << game.vertices[game.init_vertex] << ", " << game.init_counter << ")\n";
  nlohmann::json doc;
  doc["winner"] = p1 ? "player1" : "player2";
  doc["init"] = {{"vertex", game.vertices[game.init_vertex]}, {"counter", game.init_counter}};
  doc["moves"] = nlohmann::json::array();
  if (p1) {
    std::cout << "winning moves:\n";
    for (std::uint32_t v = 0; v < game.vertex_count(); ++v)
      for (long long c = 1; c <= game.init_counter; ++c)
        if (wt.won(v, c)) {
          std::cout << "  (" << game.vertices[v] << ", " << c << ") -> play "
                    << wt.move_at(v, c) << "\n";
          doc["moves"].push_back({{"vertex", game.vertices[v]},
                                  {"counter", c},
                                  {"weight", wt.move_at(v, c)}});
        }
  }
  if (!out.empty())
    write_file(out, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_compile(const std::string& path, const std::string& out, const std::string& dot,
                bool literal) {
  CountdownGame game = load_game(path);
  Compiled compiled = compile(game, {literal});
  write_file(out, mdp_to_json(compiled.mdp));
  std::string gm_path = sibling_path(out, ".gm.json");
  write_file(gm_path, gadget_map_to_json(compiled.mdp, compiled.gm));
  std::cout << "compiled " << compiled.mdp.n_states() << " states, "
            << compiled.mdp.n_actions() << " actions (min_sync_n = "
            << compiled.gm.min_sync_n << ")\n"
            << "wrote " << out << " and " << gm_path << "\n";
  if (!dot.empty()) {
    write_file(dot, export_dot(compiled.mdp, compiled.gm));
    std::cout << "wrote " << dot << "\n";
  }
  return kExitOk;
}

int cmd_check_sync(const std::string& path, std::uint32_t n, bool full, bool literal,
                   std::uint64_t cap, const std::string& out) {
  CountdownGame game = load_game(path);
  Compiled compiled = compile(game, {literal});
  bool sync = false;
  std::uint64_t count = 0;
  double millis = 0;
  if (full) {
    auto t0 = std::chrono::steady_clock::now();
    FullProduct p = build_full(compiled.mdp, n, cap);
    std::vector<std::uint8_t> win = product_winset(p);
    sync = win[p.start_id] != 0;
    count = p.n_states();
    millis = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                 .count();
  } else {
    SyncOptions opts;
    opts.cap = cap;
    SyncResult res = check_sync(compiled.mdp, n, opts);
    sync = res.synchronizable;
    count = res.config_count;
    millis = res.solve_millis;
  }
  std::cout << (full ? "full product" : "counting quotient") << ": n = " << n << ", "
            << (sync ? "synchronizable" : "not synchronizable") << " (" << count
            << " configurations)\n";
  if (!out.empty()) {
    nlohmann::json doc;
    doc["n"] = n;
    doc["mode"] = full ? "full" : "quotient";
    doc["synchronizable"] = sync;
    doc["configurations"] = count;
    doc["solve_millis"] = millis;
    write_file(out, doc.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_verify_lemma(const std::string& path, std::uint32_t extra, bool literal,
                     std::uint64_t cap, const std::string& out) {
  CountdownGame game = load_game(path);
  LemmaOptions opts;
  opts.extra = extra;
  opts.literal_control_error = literal;
  opts.cap = cap;
  LemmaReport report = verify_lemma(game, opts);
  std::cout << "dp winner: " << (report.player1_wins ? "player 1" : "player 2")
            << ", min_sync_n = " << report.min_sync_n << "\n";
  for (const LemmaRow& row : report.rows) {
    std::cout << "  n = " << row.n << ": "
              << (row.synchronizable ? "synchronizable" : "not synchronizable") << " ("
              << row.reachable_config_count << " configurations";
    if (row.pilot_certified)
      std::cout << ", pilot " << (*row.pilot_certified ? "certified" : "NOT certified");
    std::cout << ")\n";
  }
  std::cout << (report.consistent ? "consistent" : "INCONSISTENT") << "\n";
  if (!out.empty())
    write_file(out, report.to_json());
  return report.consistent && report.pilots_ok ? kExitOk : kExitViolation;
}

int cmd_simulate(const std::string& path, std::uint32_t n, std::uint64_t runs,
                 std::uint64_t seed, std::uint64_t max_steps, const std::string& strategy,
                 std::uint64_t cap, const std::string& out) {
  CountdownGame game = load_game(path);
  WinTable wt = solve_game(game);
  Compiled compiled = compile(game, {});
  RunOptions ropts;
  ropts.max_steps = max_steps > 0 ? max_steps : default_max_steps(compiled.gm, n);

  StrategyFn fn;
  SyncResult sync;  // keeps the product alive for the solver strategy
  PilotContext pctx{&compiled.mdp, &compiled.gm, &wt};
  if (strategy == "pilot") {
    if (!wt.won(game.init_vertex, game.init_counter)) {
      std::cout << "pilot strategy requires a game player 1 wins\n";
      return kExitViolation;
    }
    fn = [pctx](const Config& c) { return pilot_action(pctx, c); };
  } else if (strategy == "solver") {
    SyncOptions sopts;
    sopts.cap = cap;
    sync = check_sync(compiled.mdp, n, sopts);
    if (!sync.synchronizable) {
      std::cout << "no synchronizing strategy at this n\n";
      return kExitViolation;
    }
    const AbstractProduct* product = sync.product.get();
    const auto* choice = &sync.choice;
    fn = [product, choice](const Config& c) {
      auto it = product->index.find(c);
      if (it == product->index.end())
        throw std::runtime_error("solver strategy undefined at " + c.key(*product->base));
      auto ch = choice->find(it->second);
      if (ch == choice->end())
        throw std::runtime_error("solver strategy terminal at " + c.key(*product->base));
      return ch->second;
    };
  } else {
    throw std::invalid_argument("unknown strategy '" + strategy + "'");
  }

  ropts.record_trace = runs == 1;
  EstimateSummary sum = estimate(compiled.mdp, n, fn, runs, seed, ropts, true);
  std::cout << "runs: " << sum.runs << ", reached End: " << sum.successes
            << " (rate " << sum.success_rate.str() << "), steps mean " << sum.mean_steps
            << " min " << sum.min_steps << " max " << sum.max_steps << "\n";
  if (!out.empty()) {
    nlohmann::json doc;
    doc["n"] = n;
    doc["strategy"] = strategy;
    doc["seed"] = seed;
    doc["max_steps"] = ropts.max_steps;
    doc["runs"] = sum.runs;
    doc["successes"] = sum.successes;
    doc["success_rate"] = sum.success_rate.str();
    doc["mean_steps"] = sum.mean_steps;
    doc["min_steps"] = sum.min_steps;
    doc["max_steps_observed"] = sum.max_steps;
    write_file(out, doc.dump(2) + "\n");
    if (runs == 1) {
      SimOutcome o = run(compiled.mdp, n, fn, mix64(seed + 0), ropts);
      std::string trace;
      for (const auto& [cfg, action] : o.trace)
        trace += cfg.key(compiled.mdp) + "\t" + compiled.mdp.actions[action] + "\n";
      write_file(sibling_path(out, ".trace"), trace);
    }
  }
  return kExitOk;
}

int cmd_gen(std::uint32_t vertices, long long max_weight, long long c0, std::uint64_t seed,
            const std::string& out) {
  CountdownGame game = random_game(vertices, max_weight, c0, seed);
  write_file(out, game_to_text(game));
  std::cout << "wrote " << out << " (" << game.vertex_count() << " vertices, "
            << game.edges.size() << " edges)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"countdown games compiled to population synchronization"};
  app.require_subcommand(1);
  std::uint64_t cap = default_cap();

  std::string path, out, dot;
  std::uint32_t n = 1, extra = 1, vertices = 1;
  std::uint64_t runs = 1, seed = 0, max_steps = 0;
  long long max_weight = 1, c0 = 0;
  bool literal = false, full = false;
  std::string strategy = "pilot";

  CLI::App* solve = app.add_subcommand("solve-game", "decide the game winner");
  solve->add_option("path", path, "game file")->required();
  solve->add_option("--out", out, "report file");

  CLI::App* comp = app.add_subcommand("compile", "compile a game into an MDP document");
  comp->add_option("path", path, "game file")->required();
  comp->add_option("--out", out, "MDP document path")->required();
  comp->add_option("--dot", dot, "also write a DOT rendering");
  comp->add_flag("--literal-control-error", literal,
                 "literal control-error semantics (daemonic only on W)");

  CLI::App* check = app.add_subcommand("check-sync", "decide synchronizability at one n");
  check->add_option("path", path, "game file")->required();
  check->add_option("--n", n, "population size")->required();
  check->add_flag("--full-product", full, "use the ordered-tuple product (n <= 3)");
  check->add_flag("--literal-control-error", literal, "literal control-error semantics");
  check->add_option("--cap", cap, "configuration cap");
  check->add_option("--out", out, "report file");

  CLI::App* lemma = app.add_subcommand(
      "verify-lemma", "compare the game winner with synchronizability over a window of n");
  lemma->add_option("path", path, "game file")->required();
  lemma->add_option("--extra", extra, "test up to min_sync_n + extra");
  lemma->add_flag("--literal-control-error", literal, "literal control-error semantics");
  lemma->add_option("--cap", cap, "configuration cap");
  lemma->add_option("--out", out, "report file");

  CLI::App* sim = app.add_subcommand("simulate", "sample strategy executions");
  sim->add_option("path", path, "game file")->required();
  sim->add_option("--n", n, "population size")->required();
  sim->add_option("--runs", runs, "number of runs");
  sim->add_option("--seed", seed, "base seed");
  sim->add_option("--max-steps", max_steps, "step budget (0 = default formula)");
  sim->add_option("--strategy", strategy, "pilot or solver")
      ->check(CLI::IsMember({"pilot", "solver"}));
  sim->add_option("--cap", cap, "configuration cap (solver strategy)");
  sim->add_option("--out", out, "report file");

  CLI::App* gen = app.add_subcommand("gen", "generate a random game file");
  gen->add_option("vertices", vertices, "number of vertices")->required();
  gen->add_option("max_weight", max_weight, "maximum edge weight")->required();
  gen->add_option("c0", c0, "initial counter")->required();
  gen->add_option("--seed", seed, "generator seed");
  gen->add_option("--out", out, "output game file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  try {
    if (solve->parsed())
      return cmd_solve_game(path, out);
    if (comp->parsed())
      return cmd_compile(path, out, dot, literal);
    if (check->parsed())
      return cmd_check_sync(path, n, full, literal, cap, out);
    if (lemma->parsed())
      return cmd_verify_lemma(path, extra, literal, cap, out);
    if (sim->parsed())
      return cmd_simulate(path, n, runs, seed, max_steps, strategy, cap, out);
    if (gen->parsed())
      return cmd_gen(vertices, max_weight, c0, seed, out);
  } catch (const ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return kExitResource;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
