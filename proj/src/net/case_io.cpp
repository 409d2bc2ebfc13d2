#include "net/case_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace cascsim::net {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw ParseError(path + ": " + msg);
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) {
        ok = true;
        break;
      }
    if (!ok) fail(path, "unknown key '" + it.key() + "'");
  }
}

double num(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
  if (!it->is_number()) fail(path + "." + key, "expected a number");
  return it->get<double>();
}

double num_or(const json& j, const std::string& path, const char* key, double dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_number()) fail(path + "." + key, "expected a number");
  return it->get<double>();
}

int integer(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
  if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
  return it->get<int>();
}

int integer_or(const json& j, const std::string& path, const char* key, int dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_number_integer()) fail(path + "." + key, "expected an integer");
  return it->get<int>();
}

bool boolean_or(const json& j, const std::string& path, const char* key, bool dflt) {
  auto it = j.find(key);
  if (it == j.end()) return dflt;
  if (!it->is_boolean()) fail(path + "." + key, "expected a boolean");
  return it->get<bool>();
}

std::string text(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
  if (!it->is_string()) fail(path + "." + key, "expected a string");
  return it->get<std::string>();
}

const json& array(const json& j, const std::string& path, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(path, std::string("missing key '") + key + "'");
  if (!it->is_array()) fail(path + "." + key, "expected an array");
  return *it;
}

} // namespace

Network parse_case(const json& doc) {
  expect_object(doc, "case");
  check_keys(doc, "case", {"base_mva", "f_nominal_hz", "buses", "branches", "generators", "loads"});

  Network net;
  net.base_mva = num(doc, "case", "base_mva");
  if (!(net.base_mva > 0.0)) fail("case.base_mva", "must be positive");
  net.f_nominal = num(doc, "case", "f_nominal_hz");
  const double base = net.base_mva;

  std::set<int> seen;
  const json& jbuses = array(doc, "case", "buses");
  for (size_t i = 0; i < jbuses.size(); ++i) {
    const std::string path = "buses[" + std::to_string(i) + "]";
    const json& jb = jbuses[i];
    expect_object(jb, path);
    check_keys(jb, path, {"id", "area", "v_min", "v_max", "gs", "bs"});
    Bus b;
    b.id = integer(jb, path, "id");
    if (!seen.insert(b.id).second) fail(path + ".id", "duplicate bus id " + std::to_string(b.id));
    b.area = integer_or(jb, path, "area", 0);
    b.v_min = num_or(jb, path, "v_min", 0.9);
    b.v_max = num_or(jb, path, "v_max", 1.1);
    b.gs = num_or(jb, path, "gs", 0.0) / base;
    b.bs = num_or(jb, path, "bs", 0.0) / base;
    net.buses.push_back(b);
  }

  net.rebuild_index();

  seen.clear();
  const json& jbranches = array(doc, "case", "branches");
  for (size_t i = 0; i < jbranches.size(); ++i) {
    const std::string path = "branches[" + std::to_string(i) + "]";
    const json& jb = jbranches[i];
    expect_object(jb, path);
    check_keys(jb, path, {"id", "from", "to", "r", "x", "b", "tap", "rating_mva"});
    Branch br;
    br.id = integer(jb, path, "id");
    if (!seen.insert(br.id).second)
      fail(path + ".id", "duplicate branch id " + std::to_string(br.id));
    br.from = integer(jb, path, "from");
    if (!net.has_bus(br.from))
      fail(path + ".from", "references missing bus " + std::to_string(br.from));
    br.to = integer(jb, path, "to");
    if (!net.has_bus(br.to))
      fail(path + ".to", "references missing bus " + std::to_string(br.to));
    br.r = num(jb, path, "r");
    br.x = num(jb, path, "x");
    br.b = num_or(jb, path, "b", 0.0);
    br.tap = num_or(jb, path, "tap", 1.0);
    br.rating = num_or(jb, path, "rating_mva", 0.0) / base;
    net.branches.push_back(br);
  }

  seen.clear();
  const json& jgens = array(doc, "case", "generators");
  for (size_t i = 0; i < jgens.size(); ++i) {
    const std::string path = "generators[" + std::to_string(i) + "]";
    const json& jg = jgens[i];
    expect_object(jg, path);
    check_keys(jg, path,
               {"id", "bus", "p_set_mw", "v_set_pu", "p_min_mw", "p_max_mw", "droop_mw_per_hz",
                "slack", "v_trip_lo", "v_trip_hi"});
    Generator g;
    g.id = integer(jg, path, "id");
    if (!seen.insert(g.id).second)
      fail(path + ".id", "duplicate generator id " + std::to_string(g.id));
    g.bus = integer(jg, path, "bus");
    if (!net.has_bus(g.bus)) fail(path + ".bus", "references missing bus " + std::to_string(g.bus));
    g.p_set = num(jg, path, "p_set_mw") / base;
    g.v_set = num(jg, path, "v_set_pu");
    g.p_min = num(jg, path, "p_min_mw") / base;
    g.p_max = num(jg, path, "p_max_mw") / base;
    g.droop = num(jg, path, "droop_mw_per_hz") / base;
    g.slack = boolean_or(jg, path, "slack", false);
    g.v_trip_lo = num_or(jg, path, "v_trip_lo", 0.0);
    g.v_trip_hi = num_or(jg, path, "v_trip_hi", 2.0);
    net.generators.push_back(g);
  }

  seen.clear();
  const json& jloads = array(doc, "case", "loads");
  for (size_t i = 0; i < jloads.size(); ++i) {
    const std::string path = "loads[" + std::to_string(i) + "]";
    const json& jl = jloads[i];
    expect_object(jl, path);
    check_keys(jl, path, {"id", "bus", "p_mw", "q_mvar", "segments"});
    Load l;
    l.id = integer(jl, path, "id");
    if (!seen.insert(l.id).second) fail(path + ".id", "duplicate load id " + std::to_string(l.id));
    l.bus = integer(jl, path, "bus");
    if (!net.has_bus(l.bus)) fail(path + ".bus", "references missing bus " + std::to_string(l.bus));
    l.p = num(jl, path, "p_mw") / base;
    l.q = num_or(jl, path, "q_mvar", 0.0) / base;
    if (auto it = jl.find("segments"); it != jl.end()) {
      if (!it->is_array()) fail(path + ".segments", "expected an array");
      for (size_t s = 0; s < it->size(); ++s) {
        const std::string spath = path + ".segments[" + std::to_string(s) + "]";
        const json& js = (*it)[s];
        expect_object(js, spath);
        check_keys(js, spath, {"fraction", "scheme", "threshold", "beta", "mode"});
        ShedSegment seg;
        seg.fraction = num(js, spath, "fraction");
        const std::string scheme = text(js, spath, "scheme");
        if (scheme == "ufls")
          seg.scheme = ShedScheme::ufls;
        else if (scheme == "uvls")
          seg.scheme = ShedScheme::uvls;
        else
          fail(spath + ".scheme", "expected 'ufls' or 'uvls'");
        const std::string mode = text(js, spath, "mode");
        if (mode == "continuous")
          seg.mode = ShedMode::continuous;
        else if (mode == "discrete")
          seg.mode = ShedMode::discrete;
        else
          fail(spath + ".mode", "expected 'continuous' or 'discrete'");
        seg.threshold = num(js, spath, "threshold");
        seg.beta = num_or(js, spath, "beta", 0.0);
        l.segments.push_back(seg);
      }
    }
    net.loads.push_back(l);
  }

  net.rebuild_index();
  return net;
}

Network parse_case_text(const std::string& textdoc) {
  json doc;
  try {
    doc = json::parse(textdoc);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("case: invalid JSON: ") + e.what());
  }
  return parse_case(doc);
}

Network parse_case_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open case file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_case_text(ss.str());
}

nlohmann::ordered_json write_case(const Network& net) {
  using ojson = nlohmann::ordered_json;
  const double base = net.base_mva;
  ojson doc;
  doc["base_mva"] = net.base_mva;
  doc["f_nominal_hz"] = net.f_nominal;

  ojson buses = ojson::array();
  for (const auto& b : net.buses) {
    ojson jb;
    jb["id"] = b.id;
    jb["area"] = b.area;
    jb["v_min"] = b.v_min;
    jb["v_max"] = b.v_max;
    jb["gs"] = b.gs * base;
    jb["bs"] = b.bs * base;
    buses.push_back(jb);
  }
  doc["buses"] = buses;

  ojson branches = ojson::array();
  for (const auto& br : net.branches) {
    ojson jb;
    jb["id"] = br.id;
    jb["from"] = br.from;
    jb["to"] = br.to;
    jb["r"] = br.r;
    jb["x"] = br.x;
    jb["b"] = br.b;
    jb["tap"] = br.tap;
    jb["rating_mva"] = br.rating * base;
    branches.push_back(jb);
  }
  doc["branches"] = branches;

  ojson gens = ojson::array();
  for (const auto& g : net.generators) {
    ojson jg;
    jg["id"] = g.id;
    jg["bus"] = g.bus;
    jg["p_set_mw"] = g.p_set * base;
    jg["v_set_pu"] = g.v_set;
    jg["p_min_mw"] = g.p_min * base;
    jg["p_max_mw"] = g.p_max * base;
    jg["droop_mw_per_hz"] = g.droop * base;
    jg["slack"] = g.slack;
    jg["v_trip_lo"] = g.v_trip_lo;
    jg["v_trip_hi"] = g.v_trip_hi;
    gens.push_back(jg);
  }
  doc["generators"] = gens;

  ojson loads = ojson::array();
  for (const auto& l : net.loads) {
    ojson jl;
    jl["id"] = l.id;
    jl["bus"] = l.bus;
    jl["p_mw"] = l.p * base;
    jl["q_mvar"] = l.q * base;
    ojson segs = ojson::array();
    for (const auto& s : l.segments) {
      ojson js;
      js["fraction"] = s.fraction;
      js["scheme"] = s.scheme == ShedScheme::ufls ? "ufls" : "uvls";
      js["threshold"] = s.threshold;
      js["beta"] = s.beta;
      js["mode"] = s.mode == ShedMode::continuous ? "continuous" : "discrete";
      segs.push_back(js);
    }
    jl["segments"] = segs;
    loads.push_back(jl);
  }
  doc["loads"] = loads;

  return doc;
}

} // namespace cascsim::net
