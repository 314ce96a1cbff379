#include "tbswap/config.hpp"

#include "tbswap/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace tbswap {

using nlohmann::json;

namespace {

void check_keys(const json& obj, const std::string& where, const std::set<std::string>& allowed) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double num(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

void read_num(const json& obj, const std::string& key, const std::string& where, double& out) {
  if (obj.contains(key)) out = num(obj, key, where);
}

void read_int(const json& obj, const std::string& key, const std::string& where, std::int64_t& out) {
  if (!obj.contains(key)) return;
  if (!obj.at(key).is_number_integer()) throw ConfigError(where + "." + key + " must be an integer");
  out = obj.at(key).get<std::int64_t>();
}

std::string str(const json& obj, const std::string& key, const std::string& where) {
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(where + "." + key + " must be a string");
  return v.get<std::string>();
}

std::vector<std::string> str_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw ConfigError(where + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw ConfigError(where + " must be a list of strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

SourceParams parse_source(const json& j) {
  check_keys(j, "source", {"preset", "mu_A", "mu_B", "eta_Ai", "eta_As", "eta_Bs", "eta_Bi"});
  SourceParams s;
  if (j.contains("preset")) s = source_preset(str(j, "preset", "source"));
  read_num(j, "mu_A", "source", s.mu_A);
  read_num(j, "mu_B", "source", s.mu_B);
  read_num(j, "eta_Ai", "source", s.eta_Ai);
  read_num(j, "eta_As", "source", s.eta_As);
  read_num(j, "eta_Bs", "source", s.eta_Bs);
  read_num(j, "eta_Bi", "source", s.eta_Bi);
  try {
    s.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("source: ") + e.what());
  }
  return s;
}

InterferenceParams parse_interference(const json& j) {
  check_keys(j, "interference", {"zeta", "zeta_sq", "tau_A", "tau_B", "tau_C", "theta_A", "theta_B", "nu"});
  InterferenceParams p;
  if (j.contains("zeta") && j.contains("zeta_sq")) throw ConfigError("give zeta or zeta_sq, not both");
  read_num(j, "zeta", "interference", p.zeta);
  if (j.contains("zeta_sq")) {
    const double z2 = num(j, "zeta_sq", "interference");
    if (!(z2 >= 0.0 && z2 <= 1.0)) throw ConfigError("interference.zeta_sq must lie in [0, 1]");
    p.zeta = std::sqrt(z2);
  }
  read_num(j, "tau_A", "interference", p.tau_A);
  read_num(j, "tau_B", "interference", p.tau_B);
  read_num(j, "tau_C", "interference", p.tau_C);
  read_num(j, "theta_A", "interference", p.theta_A);
  read_num(j, "theta_B", "interference", p.theta_B);
  if (j.contains("nu")) {
    const json& nu = j.at("nu");
    if (!nu.is_object()) throw ConfigError("interference.nu must map detector names to probabilities");
    for (const auto& [name, v] : nu.items()) {
      if (!v.is_number()) throw ConfigError("interference.nu." + name + " must be a number");
      p.nu_map[name] = v.get<double>();
    }
  }
  try {
    p.validate();
  } catch (const DomainError& e) {
    throw ConfigError(std::string("interference: ") + e.what());
  }
  return p;
}

Axis parse_axis(const json& j) {
  check_keys(j, "sweep axis", {"param", "start", "stop", "points", "spacing"});
  Axis a;
  a.param = str(j, "param", "axis");
  a.start = num(j, "start", "axis");
  a.stop = j.contains("stop") ? num(j, "stop", "axis") : a.start;
  std::int64_t pts = 2;
  read_int(j, "points", "axis", pts);
  a.points = static_cast<int>(pts);
  if (j.contains("spacing")) {
    const std::string sp = str(j, "spacing", "axis");
    if (sp == "linear") a.spacing = Spacing::Linear;
    else if (sp == "log") a.spacing = Spacing::Log;
    else throw ConfigError("axis spacing must be 'linear' or 'log'");
  }
  a.validate();
  return a;
}

CoincidenceConfig parse_coincidence(const json& j) {
  check_keys(j, "coincidence", {"period_ps", "windows", "multiplex", "patterns"});
  CoincidenceConfig c;
  read_int(j, "period_ps", "coincidence", c.period_ps);
  if (j.contains("windows")) {
    for (const auto& [name, w] : j.at("windows").items()) {
      check_keys(w, "window " + name, {"channel", "center_ps", "width_ps"});
      CoincidenceWindow win;
      win.channel = w.contains("channel") ? str(w, "channel", name) : name;
      read_int(w, "center_ps", name, win.center_ps);
      read_int(w, "width_ps", name, win.width_ps);
      c.windows[name] = win;
    }
  }
  if (j.contains("multiplex")) {
    for (const auto& [name, inputs] : j.at("multiplex").items()) {
      if (!inputs.is_array()) throw ConfigError("multiplex." + name + " must be a list");
      std::vector<MultiplexInput> list;
      for (const auto& in : inputs) {
        check_keys(in, "multiplex input", {"channel", "delay_ps"});
        MultiplexInput m;
        m.channel = str(in, "channel", "multiplex input");
        read_int(in, "delay_ps", "multiplex input", m.delay_ps);
        list.push_back(m);
      }
      c.multiplex[name] = list;
    }
  }
  if (j.contains("patterns")) {
    for (const auto& [name, p] : j.at("patterns").items()) {
      check_keys(p, "pattern " + name, {"must_click", "must_not_click"});
      WindowPattern wp;
      if (p.contains("must_click")) wp.must_click = str_list(p.at("must_click"), name + ".must_click");
      if (p.contains("must_not_click")) wp.must_not_click = str_list(p.at("must_not_click"), name + ".must_not_click");
      c.patterns[name] = wp;
    }
  }
  c.validate();
  return c;
}

}  // namespace

CircuitKind circuit_kind_from_string(const std::string& s) {
  if (s == "HOM") return CircuitKind::HOM;
  if (s == "SWAP") return CircuitKind::SWAP;
  if (s == "PAIR_VIS") return CircuitKind::PAIR_VIS;
  throw ConfigError("unknown circuit kind " + s + " (expected HOM, SWAP or PAIR_VIS)");
}

SourceParams source_preset(const std::string& name) {
  if (name == "table_a") return table::hom_a();
  if (name == "table_b") return table::swap_b();
  if (name == "table_c") return table::swap_c(table::swap_b().mu_A);
  if (name == "table_d") return table::swap_d(table::swap_b().mu_B);
  if (name == "ideal") return {1e-3, 1e-3, 1.0, 1.0, 1.0, 1.0};
  throw ConfigError("unknown source preset " + name + " (table_a, table_b, table_c, table_d, ideal)");
}

RunConfig parse_config(const json& doc) {
  check_keys(doc, "config", {"schema_version", "circuit", "source", "interference", "sweep", "qkd", "measured",
                             "simulation", "coincidence", "pair", "dip", "seed", "workers"});
  if (!doc.contains("schema_version")) throw ConfigError("config needs schema_version");
  if (!doc.at("schema_version").is_number_integer() || doc.at("schema_version").get<int>() != kConfigSchemaVersion) {
    throw ConfigError("unsupported schema_version (expected " + std::to_string(kConfigSchemaVersion) + ")");
  }
  RunConfig c;
  c.raw = doc;
  c.source = table::swap_b();
  if (doc.contains("circuit")) c.circuit = circuit_kind_from_string(str(doc, "circuit", "config"));
  if (doc.contains("source")) c.source = parse_source(doc.at("source"));
  if (doc.contains("interference")) c.interference = parse_interference(doc.at("interference"));
  if (doc.contains("seed")) {
    if (!doc.at("seed").is_number_unsigned() && !doc.at("seed").is_number_integer()) {
      throw ConfigError("seed must be a non-negative integer");
    }
    c.seed = doc.at("seed").get<std::uint64_t>();
  }
  if (doc.contains("workers")) {
    std::int64_t w = 1;
    read_int(doc, "workers", "config", w);
    if (w < 1) throw ConfigError("workers must be >= 1");
    c.workers = static_cast<int>(w);
  }
  if (doc.contains("sweep")) {
    const json& s = doc.at("sweep");
    check_keys(s, "sweep", {"axes", "outputs", "sigma_zeta_sq"});
    SweepSpec spec;
    spec.kind = c.circuit.value_or(CircuitKind::SWAP);
    spec.src = c.source;
    spec.intf = c.interference;
    if (!s.contains("axes") || !s.at("axes").is_array()) throw ConfigError("sweep.axes must be a list");
    for (const auto& a : s.at("axes")) spec.axes.push_back(parse_axis(a));
    if (s.contains("outputs")) spec.outputs = str_list(s.at("outputs"), "sweep.outputs");
    read_num(s, "sigma_zeta_sq", "sweep", spec.sigma_zeta_sq);
    spec.kappa = c.qkd.kappa;
    spec.e_t = c.qkd.e_t;
    spec.workers = c.workers;
    spec.seed = c.seed;
    c.sweep = spec;
  }
  if (doc.contains("qkd")) {
    const json& q = doc.at("qkd");
    check_keys(q, "qkd", {"kappa", "e_t", "sigma_e_t", "e_p", "sigma_e_p"});
    read_num(q, "kappa", "qkd", c.qkd.kappa);
    read_num(q, "e_t", "qkd", c.qkd.e_t);
    read_num(q, "sigma_e_t", "qkd", c.qkd.sigma_e_t);
    if (q.contains("e_p")) c.qkd.e_p = num(q, "e_p", "qkd");
    read_num(q, "sigma_e_p", "qkd", c.qkd.sigma_e_p);
    if (c.sweep) {
      c.sweep->kappa = c.qkd.kappa;
      c.sweep->e_t = c.qkd.e_t;
    }
  }
  if (doc.contains("measured")) {
    const json& m = doc.at("measured");
    check_keys(m, "measured", {"kind", "V", "sigma"});
    MeasuredVisibility mv;
    if (m.contains("kind")) mv.kind = str(m, "kind", "measured");
    mv.value = num(m, "V", "measured");
    read_num(m, "sigma", "measured", mv.sigma);
    c.measured = mv;
  }
  if (doc.contains("simulation")) {
    const json& s = doc.at("simulation");
    check_keys(s, "simulation", {"duration_s", "clock_hz", "jitter_ps", "origin_ps"});
    read_num(s, "duration_s", "simulation", c.simulation.duration_s);
    read_num(s, "clock_hz", "simulation", c.simulation.clock_hz);
    read_num(s, "jitter_ps", "simulation", c.simulation.jitter_ps);
    read_int(s, "origin_ps", "simulation", c.simulation.origin_ps);
  }
  c.simulation.seed = c.seed;
  c.simulation.workers = c.workers;
  if (doc.contains("coincidence")) c.coincidence = parse_coincidence(doc.at("coincidence"));
  if (doc.contains("pair")) {
    const json& p = doc.at("pair");
    check_keys(p, "pair", {"mu", "eta_signal", "eta_idler"});
    read_num(p, "mu", "pair", c.pair.mu);
    read_num(p, "eta_signal", "pair", c.pair.eta_signal);
    read_num(p, "eta_idler", "pair", c.pair.eta_idler);
  }
  if (doc.contains("dip")) {
    const json& d = doc.at("dip");
    check_keys(d, "dip", {"sigma_ps", "start_ps", "stop_ps", "points"});
    read_num(d, "sigma_ps", "dip", c.dip.sigma_ps);
    read_num(d, "start_ps", "dip", c.dip.start_ps);
    read_num(d, "stop_ps", "dip", c.dip.stop_ps);
    std::int64_t pts = c.dip.points;
    read_int(d, "points", "dip", pts);
    if (pts < 2) throw ConfigError("dip.points must be >= 2");
    c.dip.points = static_cast<int>(pts);
  }
  return c;
}

RunConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return parse_config(doc);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config " + path);
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace tbswap
