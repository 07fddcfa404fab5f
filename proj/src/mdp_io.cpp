#include "metaadapt/mdp_io.hpp"

#include <fstream>
#include <map>

#include <json.hpp>

namespace metaadapt {

using nlohmann::json;

namespace {

constexpr int kFormatVersion = 1;

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
}

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
  return j.at(key);
}

void check_header(const json& j, const std::string& format) {
  const auto& f = require(j, "format", "document");
  if (!f.is_string() || f.get<std::string>() != format) throw ParseError("document: key 'format' must be " + format);
  const auto& v = require(j, "version", "document");
  if (!v.is_number_integer() || v.get<int>() != kFormatVersion) {
    throw ParseError("document: unsupported key 'version'");
  }
}

double reward_fill(const SynthesizedMdp& mdp) {
  std::map<double, long> counts;
  for (const auto& r : mdp.reward) {
    for (Index i = 0; i < r.size(); ++i) ++counts[r.data()[i]];
  }
  double best = 0.0;
  long most = -1;
  for (const auto& [value, n] : counts) {
    if (n > most) {
      best = value;
      most = n;
    }
  }
  return best;
}

json mdp_to_json(const SynthesizedMdp& mdp) {
  const double fill = reward_fill(mdp);
  json rows = json::array();
  for (Index a = 0; a < mdp.num_actions(); ++a) {
    for (Index s = 0; s < mdp.num_states(); ++s) {
      for (Index s2 = 0; s2 < mdp.num_states(); ++s2) {
        const double p = mdp.transition[a](s, s2);
        const double r = mdp.reward[a](s, s2);
        if (p != 0.0 || r != fill) rows.push_back({s, a, s2, p, r});
      }
    }
  }
  return {{"name", mdp.name},         {"initial", mdp.initial_state}, {"terminals", mdp.terminal_states},
          {"horizon", mdp.horizon},   {"discount", mdp.discount},     {"reward_fill", fill},
          {"transitions", rows}};
}

SynthesizedMdp mdp_from_json(const json& j, const std::vector<std::string>& states,
                             const std::vector<std::string>& actions) {
  SynthesizedMdp mdp;
  const std::string where = "mdp";
  mdp.name = require(j, "name", where).get<std::string>();
  mdp.state_names = states;
  mdp.action_names = actions;
  mdp.initial_state = require(j, "initial", where).get<Index>();
  mdp.terminal_states = require(j, "terminals", where).get<std::vector<Index>>();
  mdp.horizon = require(j, "horizon", where).get<int>();
  mdp.discount = require(j, "discount", where).get<double>();
  const double fill = require(j, "reward_fill", where).get<double>();
  const auto n = static_cast<Index>(states.size());
  mdp.transition.assign(actions.size(), Eigen::MatrixXd::Zero(n, n));
  mdp.reward.assign(actions.size(), Eigen::MatrixXd::Constant(n, n, fill));
  for (const auto& row : require(j, "transitions", where)) {
    if (!row.is_array() || row.size() != 5) throw ParseError("mdp " + mdp.name + ": key 'transitions' rows are [s, a, s', p, r]");
    const auto s = row[0].get<Index>();
    const auto a = row[1].get<Index>();
    const auto s2 = row[2].get<Index>();
    if (s < 0 || s >= n || s2 < 0 || s2 >= n || a < 0 || a >= static_cast<Index>(actions.size())) {
      throw ParseError("mdp " + mdp.name + ": key 'transitions' has an index out of range");
    }
    mdp.transition[a](s, s2) = row[3].get<double>();
    mdp.reward[a](s, s2) = row[4].get<double>();
  }
  try {
    mdp.validate();
  } catch (const ValidationError& e) {
    throw ParseError(e.what());
  }
  return mdp;
}

json universe_header(const SynthesizedMdp& ref, const std::string& format) {
  return {{"format", format}, {"version", kFormatVersion}, {"states", ref.state_names}, {"actions", ref.action_names}};
}

}  // namespace

std::string serialize_model_base(const ModelBase& base) {
  if (base.models.empty()) throw ConfigurationError("cannot serialize an empty model base");
  json j = universe_header(base.models.front(), "metaadapt.model_base");
  json models = json::array();
  for (std::size_t i = 0; i < base.size(); ++i) {
    json m = mdp_to_json(base.models[i]);
    m["tag"] = {{"env", base.tags[i].env}, {"cap", base.tags[i].cap}, {"obj", base.tags[i].obj}};
    m["weight"] = base.weights(static_cast<Index>(i));
    models.push_back(std::move(m));
  }
  j["models"] = std::move(models);
  return j.dump();
}

ModelBase parse_model_base(std::string_view text) {
  const json j = parse_json(text);
  try {
    check_header(j, "metaadapt.model_base");
    const auto states = require(j, "states", "model base").get<std::vector<std::string>>();
    const auto actions = require(j, "actions", "model base").get<std::vector<std::string>>();
    ModelBase base;
    const auto& models = require(j, "models", "model base");
    base.weights.resize(static_cast<Index>(models.size()));
    for (const auto& m : models) {
      base.models.push_back(mdp_from_json(m, states, actions));
      const auto& tag = require(m, "tag", "model");
      base.tags.push_back({tag.at("env").get<std::size_t>(), tag.at("cap").get<std::size_t>(),
                           tag.at("obj").get<std::size_t>()});
      base.weights(static_cast<Index>(base.models.size() - 1)) = require(m, "weight", "model").get<double>();
    }
    base.validate();
    return base;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model base: ") + e.what());
  }
}

std::string serialize_ground_truth(const GroundTruth& truth) {
  json j = universe_header(truth.mdp, "metaadapt.ground_truth");
  json models = json::array();
  models.push_back(mdp_to_json(truth.mdp));
  json schedule = json::array();
  for (std::size_t i = 0; i < truth.schedule.size(); ++i) {
    models.push_back(mdp_to_json(truth.schedule[i].mdp));
    schedule.push_back({{"episode", truth.schedule[i].episode}, {"model", i + 1}});
  }
  j["models"] = std::move(models);
  j["schedule"] = std::move(schedule);
  return j.dump();
}

GroundTruth parse_ground_truth(std::string_view text) {
  const json j = parse_json(text);
  try {
    check_header(j, "metaadapt.ground_truth");
    const auto states = require(j, "states", "ground truth").get<std::vector<std::string>>();
    const auto actions = require(j, "actions", "ground truth").get<std::vector<std::string>>();
    std::vector<SynthesizedMdp> models;
    for (const auto& m : require(j, "models", "ground truth")) models.push_back(mdp_from_json(m, states, actions));
    if (models.empty()) throw ParseError("ground truth: key 'models' is empty");
    GroundTruth truth{models.front(), {}};
    if (j.contains("schedule")) {
      for (const auto& s : j.at("schedule")) {
        const auto idx = require(s, "model", "schedule").get<std::size_t>();
        if (idx >= models.size()) throw ParseError("ground truth: key 'schedule' names an unknown model");
        truth.schedule.push_back({require(s, "episode", "schedule").get<int>(), models[idx]});
      }
    }
    return truth;
  } catch (const json::exception& e) {
    throw ParseError(std::string("ground truth: ") + e.what());
  }
}

std::string serialize_params(const PolicyParams& params) {
  json j{{"format", "metaadapt.policy_params"},
         {"version", kFormatVersion},
         {"seed", params.seed()},
         {"layers", json::array({{{"name", "hidden"}, {"inputs", params.num_states()}, {"outputs", params.hidden()},
                                  {"activation", "tanh"}},
                                 {{"name", "output"}, {"inputs", params.hidden()}, {"outputs", params.num_actions()},
                                  {"activation", "masked_softmax"}}})}};
  j["weights"] = std::vector<double>(params.flat().data(), params.flat().data() + params.size());
  return j.dump();
}

PolicyParams parse_params(std::string_view text) {
  const json j = parse_json(text);
  try {
    check_header(j, "metaadapt.policy_params");
    const auto& layers = require(j, "layers", "params");
    if (!layers.is_array() || layers.size() != 2) throw ParseError("params: key 'layers' must list two layers");
    const auto states = layers[0].at("inputs").get<Index>();
    const auto hidden = layers[0].at("outputs").get<Index>();
    const auto actions = layers[1].at("outputs").get<Index>();
    if (layers[1].at("inputs").get<Index>() != hidden) throw ParseError("params: key 'layers' has inconsistent shapes");
    PolicyParams p(states, hidden, actions);
    const auto weights = require(j, "weights", "params").get<std::vector<double>>();
    if (static_cast<Index>(weights.size()) != p.size()) throw ParseError("params: key 'weights' has the wrong length");
    for (Index i = 0; i < p.size(); ++i) p.flat()(i) = weights[static_cast<std::size_t>(i)];
    p.set_seed(require(j, "seed", "params").get<std::uint64_t>());
    return p;
  } catch (const json::exception& e) {
    throw ParseError(std::string("params: ") + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigurationError("cannot write " + path.string());
  out << text;
}

}  // namespace metaadapt
