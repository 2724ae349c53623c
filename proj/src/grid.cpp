#include "dcopf/grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

namespace dcopf {

using nlohmann::json;

int GridCase::slack_bus() const {
  for (const auto& b : buses)
    if (b.is_slack) return b.id;
  return buses.empty() ? 0 : buses.front().id;
}

double GridCase::total_load() const {
  double s = 0.0;
  for (const auto& b : buses) s += b.load;
  return s;
}

double GridCase::total_pmax() const {
  double s = 0.0;
  for (const auto& g : generators) s += g.pmax;
  return s;
}

namespace {

double require_number(const json& obj, const char* key, const std::string& path,
                      bool required = true, double fallback = 0.0) {
  if (!obj.contains(key)) {
    if (required) throw ValidationError(path + "." + key, "missing field");
    return fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number()) throw ValidationError(path + "." + key, "expected a number");
  return v.get<double>();
}

GridCase parse_document(const json& doc) {
  if (!doc.is_object()) throw ParseError("top-level value must be an object");
  GridCase c;
  c.base_mva = doc.contains("base_mva") ? doc.at("base_mva").get<double>() : 100.0;

  if (!doc.contains("buses") || !doc.at("buses").is_array())
    throw ValidationError("buses", "missing or not an array");
  int bi = 0;
  for (const auto& jb : doc.at("buses")) {
    const std::string path = "buses[" + std::to_string(bi++) + "]";
    Bus b;
    b.id = static_cast<int>(require_number(jb, "id", path));
    b.load = require_number(jb, "load", path, /*required=*/false, 0.0);
    if (jb.contains("slack")) {
      if (!jb.at("slack").is_boolean()) throw ValidationError(path + ".slack", "expected a boolean");
      b.is_slack = jb.at("slack").get<bool>();
    }
    c.buses.push_back(b);
  }

  if (!doc.contains("lines") || !doc.at("lines").is_array())
    throw ValidationError("lines", "missing or not an array");
  int li = 0;
  for (const auto& jl : doc.at("lines")) {
    const std::string path = "lines[" + std::to_string(li++) + "]";
    Line l;
    l.from = static_cast<int>(require_number(jl, "from", path));
    l.to = static_cast<int>(require_number(jl, "to", path));
    l.reactance = require_number(jl, "x", path);
    l.limit = require_number(jl, "limit", path);
    c.lines.push_back(l);
  }

  if (!doc.contains("generators") || !doc.at("generators").is_array())
    throw ValidationError("generators", "missing or not an array");
  int gi = 0;
  for (const auto& jg : doc.at("generators")) {
    const std::string path = "generators[" + std::to_string(gi) + "]";
    Generator g;
    g.id = gi + 1;
    g.bus = static_cast<int>(require_number(jg, "bus", path));
    g.a = require_number(jg, "a", path);
    g.b = require_number(jg, "b", path);
    g.c = require_number(jg, "c", path, /*required=*/false, 0.0);
    g.pmin = require_number(jg, "pmin", path, /*required=*/false, 0.0);
    g.pmax = require_number(jg, "pmax", path);
    c.generators.push_back(g);
    ++gi;
  }
  return c;
}

// Union-find over bus indices, for the connectivity check.
struct DisjointSet {
  std::vector<int> parent;
  explicit DisjointSet(int n) : parent(n) {
    for (int i = 0; i < n; ++i) parent[i] = i;
  }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

GridCase validate(GridCase raw) {
  if (raw.base_mva <= 0.0) throw ValidationError("base_mva", "must be > 0");
  if (raw.buses.empty()) throw ValidationError("buses", "at least one bus required");

  // Normalize bus ids to 1..N_B, order-preserving on the original ids.
  std::map<int, int> id_map;  // original id -> normalized id
  {
    std::set<int> ids;
    for (std::size_t i = 0; i < raw.buses.size(); ++i) {
      const int id = raw.buses[i].id;
      if (!ids.insert(id).second)
        throw ValidationError("buses[" + std::to_string(i) + "].id",
                              "duplicate bus id " + std::to_string(id));
    }
    int next = 1;
    for (int id : ids) id_map[id] = next++;
  }

  GridCase c;
  c.base_mva = raw.base_mva;
  c.units = raw.units;
  c.buses.resize(raw.buses.size());
  for (std::size_t i = 0; i < raw.buses.size(); ++i) {
    Bus b = raw.buses[i];
    if (b.load < 0.0)
      throw ValidationError("buses[" + std::to_string(i) + "].load", "must be >= 0");
    b.id = id_map.at(b.id);
    c.buses[static_cast<std::size_t>(b.id - 1)] = b;
  }

  int n_slack = 0;
  for (std::size_t i = 0; i < c.buses.size(); ++i)
    if (c.buses[i].is_slack) ++n_slack;
  if (n_slack > 1) throw ValidationError("buses", "more than one slack bus");
  if (n_slack == 0) c.buses.front().is_slack = true;  // bus 1 by default

  // Lines: remap endpoints, check fields, merge parallel lines.
  std::map<std::pair<int, int>, std::size_t> seen;  // unordered pair -> index in c.lines
  for (std::size_t i = 0; i < raw.lines.size(); ++i) {
    const std::string path = "lines[" + std::to_string(i) + "]";
    Line l = raw.lines[i];
    if (!id_map.count(l.from)) throw ValidationError(path + ".from", "unknown bus " + std::to_string(l.from));
    if (!id_map.count(l.to)) throw ValidationError(path + ".to", "unknown bus " + std::to_string(l.to));
    l.from = id_map.at(l.from);
    l.to = id_map.at(l.to);
    if (l.from == l.to) throw ValidationError(path, "from and to must differ");
    if (!(l.reactance > 0.0)) throw ValidationError(path + ".x", "must be > 0");
    if (!(l.limit > 0.0)) throw ValidationError(path + ".limit", "must be > 0");
    const auto key = std::minmax(l.from, l.to);
    auto it = seen.find(key);
    if (it == seen.end()) {
      seen[key] = c.lines.size();
      c.lines.push_back(l);
    } else {
      // Parallel line: combine susceptances and limits into one circuit.
      Line& m = c.lines[it->second];
      m.reactance = 1.0 / (1.0 / m.reactance + 1.0 / l.reactance);
      m.limit += l.limit;
    }
  }

  // Generators: remap bus refs, keep file order as id order.
  for (std::size_t i = 0; i < raw.generators.size(); ++i) {
    const std::string path = "generators[" + std::to_string(i) + "]";
    Generator g = raw.generators[i];
    if (!id_map.count(g.bus)) throw ValidationError(path + ".bus", "unknown bus " + std::to_string(g.bus));
    g.bus = id_map.at(g.bus);
    g.id = static_cast<int>(i) + 1;
    if (!(g.a > 0.0)) throw ValidationError(path + ".a", "must be > 0");
    if (g.pmin > g.pmax) throw ValidationError(path + ".pmin", "must be <= pmax");
    c.generators.push_back(g);
  }

  // Connectivity of the line graph.
  if (c.buses.size() > 1) {
    DisjointSet ds(c.n_buses());
    for (const auto& l : c.lines) ds.unite(l.from - 1, l.to - 1);
    const int root = ds.find(0);
    for (int i = 1; i < c.n_buses(); ++i)
      if (ds.find(i) != root)
        throw ValidationError("lines", "network graph is not connected (bus " +
                                           std::to_string(i + 1) + " unreachable)");
  }
  return c;
}

GridCase load_case_from_string(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what());
  }
  return validate(parse_document(doc));
}

GridCase load_case(std::istream& in) {
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_case_from_string(ss.str());
}

GridCase load_case(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open case file: " + path);
  return load_case(f);
}

std::string case_to_json(const GridCase& c) {
  json doc;
  doc["base_mva"] = c.base_mva;
  doc["buses"] = json::array();
  for (const auto& b : c.buses) {
    json jb{{"id", b.id}, {"load", b.load}};
    if (b.is_slack) jb["slack"] = true;
    doc["buses"].push_back(jb);
  }
  doc["lines"] = json::array();
  for (const auto& l : c.lines)
    doc["lines"].push_back({{"from", l.from}, {"to", l.to}, {"x", l.reactance}, {"limit", l.limit}});
  doc["generators"] = json::array();
  for (const auto& g : c.generators)
    doc["generators"].push_back({{"bus", g.bus},
                                 {"a", g.a},
                                 {"b", g.b},
                                 {"c", g.c},
                                 {"pmin", g.pmin},
                                 {"pmax", g.pmax}});
  return doc.dump(2);
}

GridCase scale_line_limits(const GridCase& c, double factor) {
  if (!(factor > 0.0)) throw ValidationError("factor", "must be > 0");
  GridCase out = c;
  for (auto& l : out.lines) l.limit *= factor;
  return out;
}

GridCase to_internal_units(const GridCase& c) {
  if (c.units == Units::per_unit) throw ValidationError("units", "case already in per-unit");
  if (!(c.base_mva > 0.0)) throw ValidationError("base_mva", "must be > 0");
  GridCase out = c;
  const double s = c.base_mva;
  for (auto& b : out.buses) b.load /= s;
  for (auto& l : out.lines) l.limit /= s;
  for (auto& g : out.generators) {
    g.pmin /= s;
    g.pmax /= s;
    g.a *= s * s;
    g.b *= s;
  }
  out.units = Units::per_unit;
  return out;
}

GridCase from_internal_units(const GridCase& c) {
  if (c.units == Units::mw) throw ValidationError("units", "case already in MW units");
  GridCase out = c;
  const double s = c.base_mva;
  for (auto& b : out.buses) b.load *= s;
  for (auto& l : out.lines) l.limit *= s;
  for (auto& g : out.generators) {
    g.pmin *= s;
    g.pmax *= s;
    g.a /= s * s;
    g.b /= s;
  }
  out.units = Units::mw;
  return out;
}

}  // namespace dcopf
