#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "otfs_rach/runner.hpp"

namespace otfs {

using nlohmann::json;

const json& default_config() {
  static const json d = json::parse(R"({
    "experiment": "",
    "seed": null,
    "output_dir": ".",
    "preamble": {"M": 139, "N": 4, "delta_f_hz": 60000.0, "root": 1, "Q": 10, "rolloff": 0.1, "L_cp": 0, "F": 8},
    "detector": {"mode": "native", "num_candidates": 64, "root_table": null, "p_fa": 0.001, "refine": true},
    "channel": {"model": "circular", "L": 0},
    "papr": {"start_db": 0.0, "stop_db": 12.0, "step_db": 0.1, "window": "preamble"},
    "psd": {"span_hz": 60000000.0, "segment": 1024, "stopband_hz": 10000000.0},
    "mdp": {"snr_db": [-14.0, -12.0, -10.0, -8.0, -6.0, -4.0, -2.0, 0.0, 2.0], "cfo_hz": 0.0, "to_max_s": 5e-05,
            "n_users": 1, "trials_per_point": 2000},
    "calibrate": {"p_fa": 0.01, "trials": 10000, "threshold": null},
    "detect_demo": {"root": 1, "tau_s": 0.0, "nu_hz": 0.0, "snr_db": null, "phase_rad": 0.0},
    "geometry": {"altitude_m": 550000.0, "min_elevation_deg": 30.0, "carrier_hz": 30000000000.0,
                 "earth_radius_m": 6371000.0, "cfo_factor": 2.0, "to_factor": 4.0,
                 "r_eps_m": [500.0, 1000.0, 1500.0, 2000.0, 2500.0, 3000.0, 3500.0, 4000.0, 4300.0, 4500.0, 5000.0]}
  })");
  return d;
}

json load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("config is not valid JSON: ") + e.what());
  }
}

void apply_overrides(json& cfg, const std::vector<std::string>& overrides) {
  if (!cfg.is_object()) throw ConfigError("", "config root must be a JSON object");
  for (const auto& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("overrides", "expected key=value, got '" + ov + "'");
    const std::string key = ov.substr(0, eq);
    const std::string raw = ov.substr(eq + 1);
    json value;
    try {
      value = json::parse(raw);
    } catch (const json::parse_error&) {
      value = raw;
    }
    json* node = &cfg;
    std::size_t start = 0;
    std::string walked;
    for (;;) {
      const auto dot = key.find('.', start);
      const std::string part = key.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
      if (part.empty()) throw ConfigError(key, "empty path component");
      walked += (walked.empty() ? "" : ".") + part;
      if (dot == std::string::npos) {
        (*node)[part] = value;
        break;
      }
      json& child = (*node)[part];
      if (child.is_null()) child = json::object();
      if (!child.is_object()) throw ConfigError(walked, "is not an object");
      node = &child;
      start = dot + 1;
    }
  }
}

namespace {

bool nullable_ok(const std::string& path, const json& v) {
  if (v.is_null()) return true;
  if (path == "detector.root_table") {
    if (v.is_string()) return true;
    if (!v.is_array()) return false;
    for (const auto& e : v) {
      if (!e.is_number_integer()) return false;
    }
    return true;
  }
  if (path == "calibrate.threshold" || path == "detect_demo.snr_db") return v.is_number();
  if (path == "seed") return v.is_number_unsigned() || (v.is_number_integer() && v.get<long long>() >= 0);
  return false;
}

json check(const json& user, const json& def, const std::string& path) {
  const auto child_path = [&](const std::string& k) { return path.empty() ? k : path + "." + k; };
  if (def.is_object()) {
    if (!user.is_object()) throw ConfigError(path, "expected an object");
    json out = def;
    for (auto it = user.begin(); it != user.end(); ++it) {
      const std::string p = child_path(it.key());
      if (!def.contains(it.key())) throw ConfigError(p, "unknown key");
      out[it.key()] = check(it.value(), def[it.key()], p);
    }
    return out;
  }
  if (def.is_null()) {
    if (!nullable_ok(path, user)) throw ConfigError(path, "has the wrong type");
    return user;
  }
  if (def.is_array()) {
    if (!user.is_array()) throw ConfigError(path, "expected an array of numbers");
    for (const auto& e : user) {
      if (!e.is_number()) throw ConfigError(path, "expected an array of numbers");
    }
    json out = json::array();
    for (const auto& e : user) out.push_back(e.get<double>());
    return out;
  }
  if (def.is_boolean()) {
    if (!user.is_boolean()) throw ConfigError(path, "expected true or false");
    return user;
  }
  if (def.is_string()) {
    if (!user.is_string()) throw ConfigError(path, "expected a string");
    return user;
  }
  if (def.is_number_integer()) {
    if (user.is_number_integer()) return user;
    if (user.is_number_float()) {
      const double d = user.get<double>();
      if (std::isfinite(d) && d == std::floor(d) && std::abs(d) < 9e15) return static_cast<long long>(d);
    }
    throw ConfigError(path, "expected an integer");
  }
  if (def.is_number_float()) {
    if (!user.is_number()) throw ConfigError(path, "expected a number");
    return user.get<double>();
  }
  throw ConfigError(path, "unsupported schema entry");
}

void require_one_of(const json& eff, const std::string& block, const std::string& key,
                    std::initializer_list<const char*> allowed) {
  const std::string v = eff.at(block).at(key).get<std::string>();
  for (const char* a : allowed) {
    if (v == a) return;
  }
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ConfigError(block + "." + key, "must be one of " + list + " (got '" + v + "')");
}

}  // namespace

json effective_config(const json& user_in) {
  if (!user_in.is_object()) throw ConfigError("", "config root must be a JSON object");
  json user = user_in;
  user.erase("meta");
  json eff = check(user, default_config(), "");

  const std::string exp = eff["experiment"].get<std::string>();
  if (exp.empty()) throw ConfigError("experiment", "is required");
  static const char* kExperiments[] = {"papr", "psd", "mdp", "calibrate", "detect-demo", "geometry"};
  bool known = false;
  for (const char* e : kExperiments) known = known || exp == e;
  if (!known) throw ConfigError("experiment", "must be one of papr, psd, mdp, calibrate, detect-demo, geometry");

  if (eff["seed"].is_null()) {
    std::uint64_t seed = 1;
    if (const char* env = std::getenv("OTFS_RACH_SEED"); env && *env) {
      char* end = nullptr;
      const unsigned long long v = std::strtoull(env, &end, 10);
      if (*end != '\0' || env[0] == '-') throw ConfigError("OTFS_RACH_SEED", "must be a non-negative integer");
      seed = v;
    }
    eff["seed"] = seed;
  }

  require_one_of(eff, "detector", "mode", {"native", "interpolated"});
  require_one_of(eff, "channel", "model", {"circular", "linear"});
  require_one_of(eff, "papr", "window", {"preamble", "burst"});
  preamble_from_config(eff);
  return eff;
}

std::optional<std::vector<int>> root_table_from_config(const json& eff) {
  const json& t = eff.at("detector").at("root_table");
  if (t.is_null()) return std::nullopt;
  try {
    std::vector<int> out;
    if (t.is_string()) {
      out = load_root_table(t.get<std::string>());
    } else {
      for (const auto& e : t) out.push_back(e.get<int>());
    }
    // Range and uniqueness checks against the configured M.
    preamble_root_set(eff.at("preamble").at("M").get<int>(), static_cast<int>(out.size()), out);
    return out;
  } catch (const IoError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError("detector.root_table", e.what());
  }
}

PreambleConfig preamble_from_config(const json& eff) {
  const json& p = eff.at("preamble");
  PreambleConfig c;
  c.M = p.at("M").get<int>();
  c.N = p.at("N").get<int>();
  c.delta_f_hz = p.at("delta_f_hz").get<double>();
  c.root = p.at("root").get<int>();
  c.Q = p.at("Q").get<int>();
  c.rolloff = p.at("rolloff").get<double>();
  c.L_cp = p.at("L_cp").get<int>();
  c.F = p.at("F").get<int>();
  c.validate();
  return c;
}

MdpConfig mdp_from_config(const json& eff) {
  const PreambleConfig pc = preamble_from_config(eff);
  const json& m = eff.at("mdp");
  const json& d = eff.at("detector");
  MdpConfig c;
  c.snr_db = m.at("snr_db").get<std::vector<double>>();
  c.cfo_hz = m.at("cfo_hz").get<double>();
  c.to_max_s = m.at("to_max_s").get<double>();
  c.n_users = m.at("n_users").get<int>();
  c.trials_per_point = m.at("trials_per_point").get<int>();
  c.p_fa = d.at("p_fa").get<double>();
  c.base_seed = eff.at("seed").get<std::uint64_t>();
  c.num_candidates = d.at("num_candidates").get<int>();
  c.root_table = root_table_from_config(eff);
  c.mode = parse_resolution_mode(d.at("mode").get<std::string>());
  c.refine = d.at("refine").get<bool>();
  c.channel = eff.at("channel").at("model").get<std::string>() == "linear" ? WrapMode::linear : WrapMode::circular;
  c.L = eff.at("channel").at("L").get<int>();
  c.validate(pc);
  if (c.root_table && static_cast<int>(c.root_table->size()) < c.num_candidates) {
    throw ConfigError("detector.root_table", "holds fewer entries than detector.num_candidates");
  }
  return c;
}

FalseAlarmOptions calibrate_from_config(const json& eff) {
  const PreambleConfig pc = preamble_from_config(eff);
  const json& k = eff.at("calibrate");
  const json& d = eff.at("detector");
  FalseAlarmOptions o;
  o.p_fa_target = k.at("p_fa").get<double>();
  if (!(o.p_fa_target > 0.0 && o.p_fa_target < 1.0)) throw ConfigError("calibrate.p_fa", "must lie in (0, 1)");
  o.trials = k.at("trials").get<long long>();
  if (static_cast<double>(o.trials) < 10.0 / o.p_fa_target) {
    throw ConfigError("calibrate.trials", "must be at least 10 / calibrate.p_fa");
  }
  if (!k.at("threshold").is_null()) {
    o.threshold = k.at("threshold").get<double>();
    if (!(*o.threshold >= 0.0)) throw ConfigError("calibrate.threshold", "must be >= 0");
  }
  o.seed = eff.at("seed").get<std::uint64_t>();
  o.num_candidates = d.at("num_candidates").get<int>();
  if (o.num_candidates < 1 || o.num_candidates > pc.M - 1) {
    throw ConfigError("detector.num_candidates", "must lie in [1, M-1]");
  }
  o.root_table = root_table_from_config(eff);
  o.mode = parse_resolution_mode(d.at("mode").get<std::string>());
  return o;
}

GeometryConfig geometry_from_config(const json& eff) {
  const json& g = eff.at("geometry");
  GeometryConfig c;
  c.altitude_m = g.at("altitude_m").get<double>();
  c.min_elevation_deg = g.at("min_elevation_deg").get<double>();
  c.carrier_hz = g.at("carrier_hz").get<double>();
  c.earth_radius_m = g.at("earth_radius_m").get<double>();
  c.cfo_factor = g.at("cfo_factor").get<double>();
  c.to_factor = g.at("to_factor").get<double>();
  c.validate();
  return c;
}

}  // namespace otfs
