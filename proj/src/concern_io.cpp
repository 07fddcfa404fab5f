#include "metaadapt/concern_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "metaadapt/errors.hpp"

namespace metaadapt {

using nlohmann::json;

namespace {

const json& require(const json& j, const char* key, const std::string& where) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(where + ": missing key '" + key + "'");
  return j.at(key);
}

std::string get_string(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_string()) throw ParseError(where + ": key '" + key + "' must be a string");
  return v.get<std::string>();
}

double get_number(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_number()) throw ParseError(where + ": key '" + key + "' must be a number");
  return v.get<double>();
}

std::vector<std::string> get_strings(const json& j, const char* key, const std::string& where) {
  const auto& v = require(j, key, where);
  if (!v.is_array()) throw ParseError(where + ": key '" + key + "' must be a list of strings");
  std::vector<std::string> out;
  for (const auto& s : v) {
    if (!s.is_string()) throw ParseError(where + ": key '" + key + "' must be a list of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

AttributeValue to_attribute(const json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>();
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) return v.get<std::string>();
  throw ParseError(where + ": attribute values must be boolean, number or string");
}

json from_attribute(const AttributeValue& v) {
  return std::visit([](const auto& x) { return json(x); }, v);
}

std::vector<ProbabilityEntry> parse_entries(const json& j, const char* key, const std::string& where) {
  const auto& list = require(j, key, where);
  if (!list.is_array()) throw ParseError(where + ": key '" + key + "' must be a list");
  std::vector<ProbabilityEntry> out;
  const std::string ctx = where + "." + key;
  for (const auto& e : list) {
    out.push_back({get_string(e, "from", ctx), get_string(e, "action", ctx), get_string(e, "to", ctx),
                   get_number(e, "prob", ctx)});
  }
  return out;
}

json entries_to_json(const std::vector<ProbabilityEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    out.push_back({{"from", e.from}, {"action", e.action}, {"to", e.to}, {"prob", e.prob}});
  }
  return out;
}

SpatialEnvironmentModel parse_environment(const json& j) {
  SpatialEnvironmentModel env;
  env.name = get_string(j, "name", "environment");
  const std::string where = "environment " + env.name;
  env.locations = get_strings(j, "locations", where);
  const auto& edges = require(j, "edges", where);
  if (!edges.is_array()) throw ParseError(where + ": key 'edges' must be a list of pairs");
  for (const auto& e : edges) {
    if (!e.is_array() || e.size() != 2 || !e[0].is_string() || !e[1].is_string()) {
      throw ParseError(where + ": key 'edges' must be a list of [from, to] pairs");
    }
    env.edges.emplace_back(e[0].get<std::string>(), e[1].get<std::string>());
  }
  if (j.contains("attribute_ranges")) {
    const auto& ranges = j.at("attribute_ranges");
    if (!ranges.is_object()) throw ParseError(where + ": key 'attribute_ranges' must be a map");
    for (const auto& [key, spec] : ranges.items()) {
      AttributeRange range;
      const std::string ctx = where + ".attribute_ranges." + key;
      if (spec.is_array()) {
        for (const auto& v : spec) range.values.push_back(to_attribute(v, ctx));
      } else if (spec.is_object()) {
        if (spec.contains("min")) range.min = get_number(spec, "min", ctx);
        if (spec.contains("max")) range.max = get_number(spec, "max", ctx);
      } else {
        throw ParseError(ctx + ": a range is a list of values or {min, max}");
      }
      env.attribute_ranges.emplace(key, std::move(range));
    }
  }
  if (j.contains("attributes")) {
    const auto& attrs = j.at("attributes");
    if (!attrs.is_object()) throw ParseError(where + ": key 'attributes' must be a map");
    for (const auto& [loc, kv] : attrs.items()) {
      if (!kv.is_object()) throw ParseError(where + ": key 'attributes." + loc + "' must be a map");
      auto& slot = env.attributes[loc];
      for (const auto& [key, value] : kv.items()) {
        slot[key] = to_attribute(value, where + ".attributes." + loc + "." + key);
      }
    }
  }
  env.validate();
  return env;
}

CapabilityModel parse_capability(const json& j) {
  CapabilityModel cap;
  cap.name = get_string(j, "name", "capability");
  const std::string where = "capability " + cap.name;
  const auto& innate = require(j, "innate", where);
  const std::string iw = where + ".innate";
  cap.innate.states = get_strings(innate, "states", iw);
  cap.innate.initial = get_string(innate, "initial", iw);
  cap.innate.terminals = get_strings(innate, "terminals", iw);
  cap.innate.transitions = parse_entries(innate, "transitions", iw);
  if (innate.contains("actions")) {
    cap.innate.actions = get_strings(innate, "actions", iw);
  } else {
    for (const auto& t : cap.innate.transitions) {
      if (std::find(cap.innate.actions.begin(), cap.innate.actions.end(), t.action) == cap.innate.actions.end()) {
        cap.innate.actions.push_back(t.action);
      }
    }
  }
  const auto& external = require(j, "external", where);
  const std::string ew = where + ".external";
  cap.external.actions = get_strings(external, "actions", ew);
  cap.external.moves = parse_entries(external, "moves", ew);
  cap.validate();
  return cap;
}

ObjectiveModel parse_objective(const json& j) {
  ObjectiveModel obj;
  obj.name = get_string(j, "name", "objective");
  const std::string where = "objective " + obj.name;
  obj.default_reward = get_number(j, "default", where);
  if (j.contains("start")) obj.start = get_string(j, "start", where);
  const auto& rewards = require(j, "rewards", where);
  if (!rewards.is_array()) throw ParseError(where + ": key 'rewards' must be a list");
  for (const auto& r : rewards) {
    const std::string ctx = where + ".rewards";
    obj.rewards.push_back(
        {get_string(r, "state", ctx), get_string(r, "action", ctx), get_string(r, "next", ctx),
         get_number(r, "value", ctx)});
  }
  return obj;
}

json to_json(const SpatialEnvironmentModel& env) {
  json j{{"kind", "environment"}, {"name", env.name}, {"locations", env.locations}};
  json edges = json::array();
  for (const auto& [a, b] : env.edges) edges.push_back({a, b});
  j["edges"] = edges;
  if (!env.attribute_ranges.empty()) {
    json ranges = json::object();
    for (const auto& [key, range] : env.attribute_ranges) {
      if (!range.values.empty()) {
        json values = json::array();
        for (const auto& v : range.values) values.push_back(from_attribute(v));
        ranges[key] = values;
      } else {
        json bounds = json::object();
        if (range.min) bounds["min"] = *range.min;
        if (range.max) bounds["max"] = *range.max;
        ranges[key] = bounds;
      }
    }
    j["attribute_ranges"] = ranges;
  }
  json attrs = json::object();
  for (const auto& [loc, kv] : env.attributes) {
    json inner = json::object();
    for (const auto& [key, value] : kv) inner[key] = from_attribute(value);
    attrs[loc] = inner;
  }
  j["attributes"] = attrs;
  return j;
}

json to_json(const CapabilityModel& cap) {
  return {{"kind", "capability"},
          {"name", cap.name},
          {"innate",
           {{"states", cap.innate.states},
            {"initial", cap.innate.initial},
            {"terminals", cap.innate.terminals},
            {"actions", cap.innate.actions},
            {"transitions", entries_to_json(cap.innate.transitions)}}},
          {"external", {{"actions", cap.external.actions}, {"moves", entries_to_json(cap.external.moves)}}}};
}

json to_json(const ObjectiveModel& obj) {
  json rewards = json::array();
  for (const auto& r : obj.rewards) {
    rewards.push_back({{"state", r.state}, {"action", r.action}, {"next", r.next}, {"value", r.value}});
  }
  json j{{"kind", "objective"}, {"name", obj.name}, {"default", obj.default_reward}, {"rewards", rewards}};
  if (!obj.start.empty()) j["start"] = obj.start;
  return j;
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed document: ") + e.what());
  }
}

}  // namespace

ConcernModel parse_concern_document(std::string_view text) {
  const json j = parse_json(text);
  const std::string kind = get_string(j, "kind", "document");
  if (kind == "environment") return parse_environment(j);
  if (kind == "capability") return parse_capability(j);
  if (kind == "objective") return parse_objective(j);
  throw ParseError("document: key 'kind' has unsupported value '" + kind + "'");
}

std::string serialize_concern(const ConcernModel& model) {
  return std::visit([](const auto& m) { return to_json(m).dump(2); }, model);
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ConcernModel load_concern_file(const std::filesystem::path& path) {
  try {
    return parse_concern_document(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

template <typename Model>
Model load_concern_as(const std::filesystem::path& path) {
  auto model = load_concern_file(path);
  if (auto* m = std::get_if<Model>(&model)) return std::move(*m);
  throw ParseError(path.string() + ": unexpected document kind");
}

template SpatialEnvironmentModel load_concern_as(const std::filesystem::path&);
template CapabilityModel load_concern_as(const std::filesystem::path&);
template ObjectiveModel load_concern_as(const std::filesystem::path&);

ConfigurationSet load_configset(const std::filesystem::path& path) {
  const json j = parse_json(read_text_file(path));
  const std::string where = path.string();
  if (get_string(j, "kind", where) != "configset") throw ParseError(where + ": key 'kind' must be 'configset'");
  ConfigurationSet set;
  set.name = get_string(j, "name", where);
  const auto dir = path.parent_path();
  for (const auto& p : get_strings(j, "environments", where)) {
    set.env_configs.push_back(load_concern_as<SpatialEnvironmentModel>(dir / p));
  }
  for (const auto& p : get_strings(j, "capabilities", where)) {
    set.cap_configs.push_back(load_concern_as<CapabilityModel>(dir / p));
  }
  for (const auto& p : get_strings(j, "objectives", where)) {
    set.obj_configs.push_back(load_concern_as<ObjectiveModel>(dir / p));
  }
  set.validate();
  return set;
}

}  // namespace metaadapt
