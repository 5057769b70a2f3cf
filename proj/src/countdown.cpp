#include "popsync/countdown.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "popsync/rng.hpp"

namespace popsync {

namespace {

bool valid_identifier(std::string_view s) {
  if (s.empty())
    return false;
  for (char c : s)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_'))
      return false;
  return true;
}

long long parse_number(std::string_view tok, int line, const char* what) {
  long long value = 0;
  if (tok.empty())
    throw ParseError(line, std::string("missing ") + what);
  for (char c : tok) {
    if (!std::isdigit(static_cast<unsigned char>(c)))
      throw ParseError(line, std::string("unknown token '") + std::string(tok) + "'");
    if (value > (0x7fffffffffffffffLL - 9) / 10)
      throw ParseError(line, std::string(what) + " too large");
    value = value * 10 + (c - '0');
  }
  return value;
}

}  // namespace

std::optional<std::uint32_t> CountdownGame::vertex_id(std::string_view name) const {
  for (std::uint32_t i = 0; i < vertices.size(); ++i)
    if (vertices[i] == name)
      return i;
  return std::nullopt;
}

long long CountdownGame::max_weight() const {
  long long d = 0;
  for (const Edge& e : edges)
    d = std::max(d, e.weight);
  return d;
}

void validate_game(const CountdownGame& game) {
  if (game.vertices.empty())
    throw std::invalid_argument("game has no vertices");
  if (game.init_vertex >= game.vertex_count())
    throw std::invalid_argument("initial vertex out of range");
  if (game.init_counter < 0)
    throw std::invalid_argument("initial counter negative");
  std::set<std::string_view> names;
  for (const std::string& v : game.vertices)
    if (!names.insert(v).second)
      throw std::invalid_argument("duplicate vertex name " + v);
  std::set<std::tuple<std::uint32_t, long long, std::uint32_t>> seen;
  for (const CountdownGame::Edge& e : game.edges) {
    if (e.from >= game.vertex_count() || e.to >= game.vertex_count())
      throw std::invalid_argument("edge endpoint out of range");
    if (e.weight < 1)
      throw std::invalid_argument("edge weight must be positive");
    if (!seen.insert({e.from, e.weight, e.to}).second)
      throw std::invalid_argument("duplicate edge");
  }
}

CountdownGame parse_game(std::string_view text) {
  CountdownGame game;
  auto intern = [&](std::string_view name, int line) -> std::uint32_t {
    if (!valid_identifier(name))
      throw ParseError(line, "unknown token '" + std::string(name) + "'");
    if (auto id = game.vertex_id(name))
      return *id;
    game.vertices.emplace_back(name);
    return game.vertex_count() - 1;
  };

  bool have_init = false;
  std::set<std::tuple<std::uint32_t, long long, std::uint32_t>> edge_set;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view line =
        text.substr(pos, nl == std::string_view::npos ? text.size() - pos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    std::istringstream is{std::string(line)};
    std::string tok;
    if (!(is >> tok) || tok[0] == '#')
      continue;
    if (tok == "init") {
      if (have_init)
        throw ParseError(line_no, "duplicate init");
      std::string v, c;
      if (!(is >> v >> c))
        throw ParseError(line_no, "init needs a vertex and a counter");
      game.init_vertex = intern(v, line_no);
      game.init_counter = parse_number(c, line_no, "counter");
      have_init = true;
    } else if (tok == "edge") {
      std::string from, w, to;
      if (!(is >> from >> w >> to))
        throw ParseError(line_no, "edge needs a source, a weight and a target");
      CountdownGame::Edge e;
      e.from = intern(from, line_no);
      e.weight = parse_number(w, line_no, "weight");
      e.to = intern(to, line_no);
      if (e.weight < 1)
        throw ParseError(line_no, "weight < 1");
      if (!edge_set.insert({e.from, e.weight, e.to}).second)
        throw ParseError(line_no, "duplicate edge");
      game.edges.push_back(e);
    } else {
      throw ParseError(line_no, "unknown token '" + tok + "'");
    }
    std::string rest;
    if (is >> rest && rest[0] != '#')
      throw ParseError(line_no, "unknown token '" + rest + "'");
  }
  if (!have_init)
    throw ParseError(line_no, "missing init");
  validate_game(game);
  return game;
}

std::string game_to_text(const CountdownGame& game) {
  std::ostringstream os;
  os << "init " << game.vertices[game.init_vertex] << " " << game.init_counter << "\n";
  for (const CountdownGame::Edge& e : game.edges)
    os << "edge " << game.vertices[e.from] << " " << e.weight << " " << game.vertices[e.to]
       << "\n";
  return os.str();
}

WinTable solve_game(const CountdownGame& game) {
  validate_game(game);
  WinTable table;
  table.n_vertices = game.vertex_count();
  table.c0 = game.init_counter;
  std::size_t cells = std::size_t{table.n_vertices} * (table.c0 + 1);
  table.win.assign(cells, 0);
  table.move.assign(cells, -1);

  // Edges grouped per vertex by weight, weights ascending, edge order kept.
  std::vector<std::map<long long, std::vector<std::uint32_t>>> out(table.n_vertices);
  for (const CountdownGame::Edge& e : game.edges)
    out[e.from][e.weight].push_back(e.to);

  for (std::uint32_t v = 0; v < table.n_vertices; ++v)
    table.win[table.idx(v, 0)] = 1;
  for (long long c = 1; c <= table.c0; ++c) {
    for (std::uint32_t v = 0; v < table.n_vertices; ++v) {
      for (const auto& [d, tos] : out[v]) {
        if (d > c)
          break;
        bool all = true;
        for (std::uint32_t to : tos)
          if (!table.win[table.idx(to, c - d)]) {
            all = false;
            break;
          }
        if (all) {
          table.win[table.idx(v, c)] = 1;
          table.move[table.idx(v, c)] = d;
          break;
        }
      }
    }
  }
  return table;
}

CountdownMdp countdown_as_mdp(const CountdownGame& game) {
  validate_game(game);
  CountdownMdp result;
  Mdp& mdp = result.mdp;
  long long c0 = game.init_counter;

  for (std::uint32_t v = 0; v < game.vertex_count(); ++v) {
    for (long long c = 0; c <= c0; ++c) {
      StateInfo st;
      st.name = game.vertices[v] + "@" + std::to_string(c);
      if (c == 0)
        st.labels.push_back("target");
      mdp.states.push_back(std::move(st));
    }
  }
  result.sink = mdp.n_states();
  mdp.states.push_back({"sink", {}});
  result.initial = static_cast<StateId>(std::size_t{game.init_vertex} * (c0 + 1) +
                                        static_cast<std::size_t>(c0));
  mdp.states[result.initial].labels.push_back("start");

  std::vector<long long> weights;
  for (const CountdownGame::Edge& e : game.edges)
    weights.push_back(e.weight);
  std::sort(weights.begin(), weights.end());
  weights.erase(std::unique(weights.begin(), weights.end()), weights.end());
  for (long long d : weights)
    mdp.actions.push_back(std::to_string(d));

  std::vector<std::map<long long, std::vector<StateId>>> out(game.vertex_count());
  for (const CountdownGame::Edge& e : game.edges)
    out[e.from][e.weight].push_back(e.to);

  auto state_of = [&](std::uint32_t v, long long c) {
    return static_cast<StateId>(std::size_t{v} * (c0 + 1) + static_cast<std::size_t>(c));
  };

  mdp.trans.resize(std::size_t{mdp.n_states()} * mdp.n_actions());
  Distribution to_sink{{result.sink}, {Rational::whole(1)}};
  for (ActionId a = 0; a < mdp.n_actions(); ++a)
    mdp.dist(result.sink, a) = to_sink;
  for (std::uint32_t v = 0; v < game.vertex_count(); ++v) {
    for (long long c = 0; c <= c0; ++c) {
      for (ActionId a = 0; a < mdp.n_actions(); ++a) {
        long long d = weights[a];
        auto it = out[v].find(d);
        if (d > c || it == out[v].end()) {
          mdp.dist(state_of(v, c), a) = to_sink;
          continue;
        }
        std::vector<StateId> supp;
        for (std::uint32_t to : it->second)
          supp.push_back(state_of(to, c - d));
        std::sort(supp.begin(), supp.end());
        supp.erase(std::unique(supp.begin(), supp.end()), supp.end());
        Distribution dist;
        Rational p(1, static_cast<long long>(supp.size()));
        dist.support = std::move(supp);
        dist.prob.assign(dist.support.size(), p);
        mdp.dist(state_of(v, c), a) = std::move(dist);
      }
    }
  }

  for (std::uint32_t v = 0; v < game.vertex_count(); ++v)
    result.target.push_back(state_of(v, 0));
  return result;
}

CountdownGame random_game(std::uint32_t n_vertices, long long max_weight, long long c0,
                          std::uint64_t seed) {
  if (n_vertices < 1 || max_weight < 1)
    throw std::invalid_argument("random_game: need at least one vertex and weight");
  SplitMix64 rng(seed);
  CountdownGame game;
  for (std::uint32_t v = 0; v < n_vertices; ++v)
    game.vertices.push_back("v" + std::to_string(v));
  game.init_vertex = 0;
  game.init_counter = c0;

  std::set<std::tuple<std::uint32_t, long long, std::uint32_t>> seen;
  for (std::uint32_t v = 0; v < n_vertices; ++v) {
    std::uint64_t wanted = rng.below(4);
    for (std::uint64_t i = 0; i < wanted; ++i) {
      long long w = 1 + static_cast<long long>(rng.below(static_cast<std::uint64_t>(max_weight)));
      std::uint32_t to = static_cast<std::uint32_t>(rng.below(n_vertices));
      if (seen.insert({v, w, to}).second)
        game.edges.push_back({v, w, to});
    }
  }

  // Drop vertices no edge touches; keep the initial vertex and re-index.
  std::vector<std::uint8_t> used(n_vertices, 0);
  used[game.init_vertex] = 1;
  for (const CountdownGame::Edge& e : game.edges) {
    used[e.from] = 1;
    used[e.to] = 1;
  }
  std::vector<std::uint32_t> remap(n_vertices, 0);
  CountdownGame pruned;
  for (std::uint32_t v = 0; v < n_vertices; ++v)
    if (used[v]) {
      remap[v] = pruned.vertex_count();
      pruned.vertices.push_back(game.vertices[v]);
    }
  for (const CountdownGame::Edge& e : game.edges)
    pruned.edges.push_back({remap[e.from], e.weight, remap[e.to]});
  pruned.init_vertex = remap[game.init_vertex];
  pruned.init_counter = c0;
  validate_game(pruned);
  return pruned;
}

}  // namespace popsync
