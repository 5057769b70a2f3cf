#include <json.hpp>

#include "popsync/mdp.hpp"

namespace popsync {

using nlohmann::json;

std::string mdp_to_json(const Mdp& mdp) {
  json doc;
  doc["states"] = json::array();
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    json st;
    st["id"] = s;
    st["name"] = mdp.states[s].name;
    st["labels"] = mdp.states[s].labels;
    doc["states"].push_back(std::move(st));
  }
  doc["actions"] = json::array();
  for (ActionId a = 0; a < mdp.n_actions(); ++a) {
    json ac;
    ac["id"] = a;
    ac["name"] = mdp.actions[a];
    doc["actions"].push_back(std::move(ac));
  }
  doc["transitions"] = json::array();
  for (StateId s = 0; s < mdp.n_states(); ++s) {
    for (ActionId a = 0; a < mdp.n_actions(); ++a) {
      const Distribution& d = mdp.dist(s, a);
      json tr;
      tr["state"] = s;
      tr["action"] = a;
      tr["successors"] = json::array();
      for (std::size_t i = 0; i < d.support.size(); ++i) {
        json e;
        e["state"] = d.support[i];
        e["num"] = d.prob[i].num;
        e["den"] = d.prob[i].den;
        tr["successors"].push_back(std::move(e));
      }
      doc["transitions"].push_back(std::move(tr));
    }
  }
  return doc.dump(2) + "\n";
}

Mdp mdp_from_json(std::string_view text) {
  json doc = json::parse(text);
  Mdp mdp;
  const json& states = doc.at("states");
  mdp.states.resize(states.size());
  for (const json& st : states) {
    StateId id = st.at("id").get<StateId>();
    if (id >= mdp.states.size())
      throw std::invalid_argument("mdp document: state id out of range");
    mdp.states[id].name = st.at("name").get<std::string>();
    if (st.contains("labels"))
      mdp.states[id].labels = st.at("labels").get<std::vector<std::string>>();
  }
  const json& actions = doc.at("actions");
  mdp.actions.resize(actions.size());
  for (const json& ac : actions) {
    ActionId id = ac.at("id").get<ActionId>();
    if (id >= mdp.actions.size())
      throw std::invalid_argument("mdp document: action id out of range");
    mdp.actions[id] = ac.at("name").get<std::string>();
  }
  mdp.trans.resize(std::size_t{mdp.n_states()} * mdp.n_actions());
  for (const json& tr : doc.at("transitions")) {
    StateId s = tr.at("state").get<StateId>();
    ActionId a = tr.at("action").get<ActionId>();
    if (s >= mdp.n_states() || a >= mdp.n_actions())
      throw std::invalid_argument("mdp document: transition ids out of range");
    Distribution d;
    for (const json& e : tr.at("successors")) {
      d.support.push_back(e.at("state").get<StateId>());
      d.prob.emplace_back(e.at("num").get<long long>(), e.at("den").get<long long>());
    }
    mdp.dist(s, a) = std::move(d);
  }
  return mdp;
}

}  // namespace popsync
