#include <fstream>
#include <sstream>

#include "moran/error.hpp"
#include "moran/spec.hpp"

namespace moran {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorKind::parse, "spec: " + what); }

Rational value_of(const json& v) {
  if (v.is_string()) return parse_rational(v.get<std::string>());
  if (v.is_number_integer()) return Rational(Integer(std::to_string(v.get<long long>())));
  if (v.is_number_float()) return parse_rational(v.dump());
  bad("expected a number or \"p/q\" string, got " + v.dump());
}

std::string_view rule_kind_name(SequenceRule::Kind k) {
  switch (k) {
    case SequenceRule::Kind::constant: return "constant";
    case SequenceRule::Kind::periodic: return "periodic";
    case SequenceRule::Kind::explicit_prefix: return "explicit-prefix";
    case SequenceRule::Kind::table_function: return "table-function";
  }
  return "constant";
}

json rule_json(const SequenceRule& r) {
  json j = json::object();
  j["kind"] = rule_kind_name(r.kind);
  if (r.kind == SequenceRule::Kind::table_function) j["function"] = r.function;
  json vals = json::array();
  for (const auto& v : r.values) vals.push_back(to_string(v));
  j["values"] = vals;
  return j;
}

SequenceRule rule_from(const json& j, const char* field) {
  if (!j.is_object()) bad(std::string(field) + " must be an object");
  const std::string kind = j.value("kind", "");
  std::vector<Rational> values;
  if (j.contains("values")) {
    if (!j["values"].is_array()) bad(std::string(field) + ".values must be an array");
    for (const auto& v : j["values"]) values.push_back(value_of(v));
  } else if (j.contains("value")) {
    values.push_back(value_of(j["value"]));
  }
  if (kind == "constant") {
    if (values.size() != 1) bad(std::string(field) + ": constant rule needs exactly one value");
    return SequenceRule::constant(values[0]);
  }
  if (kind == "periodic") {
    if (values.empty()) bad(std::string(field) + ": periodic rule needs values");
    return SequenceRule::periodic(std::move(values));
  }
  if (kind == "explicit-prefix") return SequenceRule::prefix(std::move(values));
  if (kind == "table-function") {
    std::string fn = j.value("function", "");
    if (fn == "affine_power" && values.size() == 3) return SequenceRule::table(fn, std::move(values));
    if (fn == "harmonic" && values.size() == 2) return SequenceRule::table(fn, std::move(values));
    bad(std::string(field) + ": unknown table function '" + fn + "' or wrong parameter count");
  }
  bad(std::string(field) + ": unknown rule kind '" + kind + "'");
}

}  // namespace

nlohmann::json to_json(const MoranSpec& spec) {
  json j = json::object();
  j["name"] = spec.name;
  j["n"] = rule_json(spec.n);
  j["c"] = rule_json(spec.c);
  j["L"] = rule_json(spec.L);
  j["R"] = rule_json(spec.R);
  json g = json::object();
  switch (spec.gaps.kind) {
    case GapPolicy::Kind::uniform: g["kind"] = "uniform"; break;
    case GapPolicy::Kind::weighted: {
      g["kind"] = "weighted";
      json w = json::array();
      for (const auto& x : spec.gaps.weights) w.push_back(to_string(x));
      g["weights"] = w;
      break;
    }
    case GapPolicy::Kind::seeded_random:
      g["kind"] = "seeded-random";
      g["seed"] = spec.gaps.seed;
      g["pool"] = spec.gaps.pool;
      break;
  }
  j["gaps"] = g;
  j["interval"] = {{"lo", to_string(spec.lo)}, {"hi", to_string(spec.hi)}};
  return j;
}

namespace {

MoranSpec spec_from_json_impl(const nlohmann::json& j) {
  if (!j.is_object()) bad("top level must be an object");
  MoranSpec s;
  s.name = j.value("name", "custom");
  for (const char* f : {"n", "c"}) {
    if (!j.contains(f)) bad(std::string("missing field '") + f + "'");
  }
  s.n = rule_from(j["n"], "n");
  s.c = rule_from(j["c"], "c");
  s.L = j.contains("L") ? rule_from(j["L"], "L") : SequenceRule::constant(0);
  s.R = j.contains("R") ? rule_from(j["R"], "R") : SequenceRule::constant(0);
  if (j.contains("gaps")) {
    const json& g = j["gaps"];
    const std::string kind = g.value("kind", "uniform");
    if (kind == "uniform") {
      s.gaps = GapPolicy::uniform();
    } else if (kind == "weighted") {
      std::vector<Rational> w;
      if (!g.contains("weights") || !g["weights"].is_array()) bad("weighted gaps need a weights array");
      for (const auto& x : g["weights"]) w.push_back(value_of(x));
      s.gaps = GapPolicy::weighted(std::move(w));
    } else if (kind == "seeded-random") {
      if (!g.contains("seed")) bad("seeded-random gaps need a seed");
      s.gaps = GapPolicy::seeded(g["seed"].get<std::uint64_t>(), g.value("pool", 64u));
      if (s.gaps.pool == 0) bad("pool must be positive");
    } else {
      bad("unknown gap policy '" + kind + "'");
    }
  }
  if (j.contains("interval")) {
    s.lo = value_of(j["interval"].at("lo"));
    s.hi = value_of(j["interval"].at("hi"));
    if (s.lo >= s.hi) bad("interval must have lo < hi");
  }
  return s;
}

}  // namespace

MoranSpec spec_from_json(const nlohmann::json& j) {
  try {
    return spec_from_json_impl(j);
  } catch (const nlohmann::json::exception& e) {
    bad(e.what());
  }
}

MoranSpec load_spec_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open spec file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(ss.str());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::parse, "spec file '" + path + "': " + e.what());
  }
  return spec_from_json(j);
}

}  // namespace moran
