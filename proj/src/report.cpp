#include "popsync/report.hpp"

#include <json.hpp>

#include "popsync/pilot.hpp"

namespace popsync {

std::string LemmaReport::to_json() const {
  nlohmann::json doc;
  doc["game"] = {{"vertices", n_vertices}, {"edges", n_edges},   {"c0", c0},
                 {"d_max", d_max},         {"k_mc", k_mc},       {"k_ac", k_ac},
                 {"min_sync_n", min_sync_n}};
  doc["dp_winner"] = player1_wins ? "player1" : "player2";
  doc["per_n"] = nlohmann::json::array();
  for (const LemmaRow& row : rows) {
    nlohmann::json r;
    r["n"] = row.n;
    r["synchronizable"] = row.synchronizable;
    r["reachable_config_count"] = row.reachable_config_count;
    r["solve_millis"] = row.solve_millis;
    if (row.pilot_certified)
      r["pilot_certified"] = *row.pilot_certified;
    else
      r["pilot_certified"] = nullptr;
    doc["per_n"].push_back(std::move(r));
  }
  doc["consistent"] = consistent;
  doc["pilots_ok"] = pilots_ok;
  return doc.dump(2) + "\n";
}

LemmaReport verify_lemma(const CountdownGame& game, const LemmaOptions& opts) {
  LemmaReport report;
  WinTable wt = solve_game(game);
  Compiled compiled = compile(game, {opts.literal_control_error});
  const GadgetMap& gm = compiled.gm;

  report.n_vertices = game.vertex_count();
  report.n_edges = game.edges.size();
  report.c0 = gm.c0;
  report.d_max = gm.d_max;
  report.k_mc = gm.k_mc;
  report.k_ac = gm.k_ac;
  report.min_sync_n = gm.min_sync_n;
  report.player1_wins = wt.won(game.init_vertex, game.init_counter);

  PilotContext pilot{&compiled.mdp, &gm, &wt};
  SyncOptions sync;
  sync.cap = opts.cap;
  sync.parallel = opts.parallel;
  for (std::uint32_t n = 1; n <= gm.min_sync_n + opts.extra; ++n) {
    SyncResult res = check_sync(compiled.mdp, n, sync);
    LemmaRow row;
    row.n = n;
    row.synchronizable = res.synchronizable;
    row.reachable_config_count = res.config_count;
    row.solve_millis = res.solve_millis;
    if (report.player1_wins) {
      PilotResult pr = verify_pilot(pilot, n, opts.cap);
      row.pilot_certified = pr.certified;
      if (!pr.certified)
        report.pilots_ok = false;
    }
    report.rows.push_back(row);
  }

  bool ok = true;
  for (const LemmaRow& row : report.rows) {
    bool expected = report.player1_wins || row.n < gm.min_sync_n;
    if (row.synchronizable != expected)
      ok = false;
  }
  report.consistent = ok;
  return report;
}

}  // namespace popsync
