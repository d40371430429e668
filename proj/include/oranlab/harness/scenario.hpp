#pragma once

// Scenario description for the experiment harness, read from a JSON file.
//
//   {
//     "scenario": "URLLC_JAM" | "MMTC_SS",
//     "seed": 0,
//     "duration_s": 120,
//     "xapp_enabled": true,
//     "jammer":  { "mode": "keyed", "sjr_db": 16, "start_ms": 10000 },
//     "traffic": { "legit_rate_per_min": 3, "attacks_per_hour": 15 },
//     "jd":  { "beta": null, "n_window": 10000, "cap": "fixed:1", ... },
//     "ssd": { "gamma": 1.0, "interval_s": 60, "train_s": 3600, ... },
//     "sim": { ...any simulator key... },
//     "thresholds": [ ... ]
//   }
//
// Missing keys take defaults; "jammer" and "traffic" override the matching
// parts of "sim".

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oranlab/error.hpp"
#include "oranlab/jd/xapp.hpp"
#include "oranlab/ransim/config.hpp"
#include "oranlab/ssd/profile.hpp"

namespace oranlab::harness {

enum class ScenarioKind { kUrllcJam, kMmtcSs };

inline const char* to_string(ScenarioKind k) {
  return k == ScenarioKind::kUrllcJam ? "URLLC_JAM" : "MMTC_SS";
}

inline ScenarioKind scenario_from_string(const std::string& s) {
  if (s == "URLLC_JAM" || s == "urllc_jam") return ScenarioKind::kUrllcJam;
  if (s == "MMTC_SS" || s == "mmtc_ss") return ScenarioKind::kMmtcSs;
  throw ConfigError("unknown scenario '" + s + "'");
}

struct JdScenario {
  std::optional<double> beta;  // absent: calibrated from a jam-free run
  std::size_t n_window = 10000;
  std::string cap = "fixed:1";
  // The experiment keeps the cap for its whole duration.
  int release_windows = 12;
  double pfa_target = 0.01;
  double calibration_s = 200.0;
  bool cell_aggregate = false;
};

struct SsdScenario {
  double gamma = 1.0;
  double std_floor = 0.5;
  double interval_s = 60.0;
  double train_s = 3600.0;
  std::string unseen_ta = "zero_profile";
  std::optional<std::int64_t> block_ttl_ms;
};

struct ScenarioConfig {
  ScenarioKind scenario = ScenarioKind::kUrllcJam;
  std::uint64_t seed = 0;
  double duration_s = 120.0;
  bool xapp_enabled = true;
  ransim::SimConfig sim;
  JdScenario jd;
  SsdScenario ssd;
  std::vector<double> thresholds;
};

// Scenario defaults applied before the file's own keys.
inline ScenarioConfig default_scenario(ScenarioKind kind) {
  ScenarioConfig c;
  c.scenario = kind;
  if (kind == ScenarioKind::kUrllcJam) {
    c.duration_s = 120.0;
    c.sim.jammer.start_ms = 10000;
    c.thresholds = {100, 1000, 10000};
  } else {
    c.duration_s = 11 * 3600.0;
    c.sim.ues.clear();
    c.sim.access.enabled = true;
    c.sim.access.traffic.attack_start_s = c.ssd.train_s;
    c.thresholds = {0.5, 1, 2, 4, 8};
  }
  return c;
}

inline jd::JdConfig jd_config(const ScenarioConfig& c, double beta) {
  jd::JdConfig j;
  j.beta = beta;
  j.n_window = c.jd.n_window;
  j.cap_mode = jd::parse_cap_mode(c.jd.cap);
  j.release_windows = c.jd.release_windows;
  j.cell_aggregate = c.jd.cell_aggregate;
  return j;
}

inline ssd::UnseenTaMode unseen_mode_from_string(const std::string& s) {
  if (s == "zero_profile" || s == "ZERO_PROFILE") return ssd::UnseenTaMode::kZeroProfile;
  if (s == "ignore" || s == "IGNORE") return ssd::UnseenTaMode::kIgnore;
  throw ConfigError("unseen_ta must be zero_profile or ignore");
}

inline ssd::SsdConfig ssd_config(const ScenarioConfig& c) {
  ssd::SsdConfig s;
  s.gamma = c.ssd.gamma;
  s.std_floor = c.ssd.std_floor;
  s.interval_s = c.ssd.interval_s;
  s.training_duration_s = c.ssd.train_s;
  s.unseen_ta_mode = unseen_mode_from_string(c.ssd.unseen_ta);
  s.block_ttl_ms = c.ssd.block_ttl_ms;
  return s;
}

inline void validate(const ScenarioConfig& c) {
  if (!(c.duration_s > 0)) throw ConfigError("duration_s must be > 0");
  ransim::validate(c.sim);
  if (c.jd.beta) jd::validate(jd_config(c, *c.jd.beta));
  jd::parse_cap_mode(c.jd.cap);
  if (c.jd.n_window == 0) throw ConfigError("jd.n_window must be > 0");
  if (!(c.jd.pfa_target >= 0 && c.jd.pfa_target <= 1)) throw ConfigError("jd.pfa_target must be in [0, 1]");
  if (!(c.jd.calibration_s > 0)) throw ConfigError("jd.calibration_s must be > 0");
  ssd::validate(ssd_config(c));
  if (c.scenario == ScenarioKind::kMmtcSs) {
    if (!c.sim.access.enabled) throw ConfigError("MMTC_SS needs access traffic enabled");
    if (c.duration_s <= c.ssd.train_s) throw ConfigError("MMTC_SS duration must exceed train_s");
  }
}

using nlohmann::json;

inline json to_json(const ScenarioConfig& c) {
  json sim = c.sim;
  json jd = {{"beta", c.jd.beta ? json(*c.jd.beta) : json(nullptr)},
             {"n_window", c.jd.n_window},
             {"cap", c.jd.cap},
             {"release_windows", c.jd.release_windows},
             {"pfa_target", c.jd.pfa_target},
             {"calibration_s", c.jd.calibration_s},
             {"cell_aggregate", c.jd.cell_aggregate}};
  json ssd = {{"gamma", c.ssd.gamma},
              {"std_floor", c.ssd.std_floor},
              {"interval_s", c.ssd.interval_s},
              {"train_s", c.ssd.train_s},
              {"unseen_ta", c.ssd.unseen_ta},
              {"block_ttl_ms", c.ssd.block_ttl_ms ? json(*c.ssd.block_ttl_ms) : json(nullptr)}};
  return {{"scenario", to_string(c.scenario)},
          {"seed", c.seed},
          {"duration_s", c.duration_s},
          {"xapp_enabled", c.xapp_enabled},
          {"sim", sim},
          {"jd", jd},
          {"ssd", ssd},
          {"thresholds", c.thresholds}};
}

inline ScenarioConfig scenario_from_json(const json& j) {
  try {
    if (!j.is_object()) throw ConfigError("scenario must be a JSON object");
    ScenarioConfig c = default_scenario(scenario_from_string(j.value("scenario", std::string("URLLC_JAM"))));
    c.seed = j.value("seed", c.seed);
    c.duration_s = j.value("duration_s", c.duration_s);
    c.xapp_enabled = j.value("xapp_enabled", c.xapp_enabled);
    if (auto it = j.find("ssd"); it != j.end()) {
      auto& s = c.ssd;
      s.gamma = it->value("gamma", s.gamma);
      s.std_floor = it->value("std_floor", s.std_floor);
      s.interval_s = it->value("interval_s", s.interval_s);
      if (it->contains("train_s")) {
        s.train_s = it->at("train_s").get<double>();
        if (c.scenario == ScenarioKind::kMmtcSs) c.sim.access.traffic.attack_start_s = s.train_s;
      }
      s.unseen_ta = it->value("unseen_ta", s.unseen_ta);
      if (auto t = it->find("block_ttl_ms"); t != it->end())
        s.block_ttl_ms = t->is_null() ? std::nullopt : std::optional<std::int64_t>(t->get<std::int64_t>());
    }
    json sim = c.sim;
    if (auto it = j.find("sim"); it != j.end()) sim.merge_patch(*it);
    if (auto it = j.find("jammer"); it != j.end()) sim["jammer"].merge_patch(*it);
    if (auto it = j.find("traffic"); it != j.end()) sim["access"].merge_patch(*it);
    sim["seed"] = c.seed;
    ransim::from_json(sim, c.sim);
    if (auto it = j.find("jd"); it != j.end()) {
      auto& d = c.jd;
      if (auto b = it->find("beta"); b != it->end())
        d.beta = b->is_null() ? std::nullopt : std::optional<double>(b->get<double>());
      d.n_window = it->value("n_window", d.n_window);
      d.cap = it->value("cap", d.cap);
      d.release_windows = it->value("release_windows", d.release_windows);
      d.pfa_target = it->value("pfa_target", d.pfa_target);
      d.calibration_s = it->value("calibration_s", d.calibration_s);
      d.cell_aggregate = it->value("cell_aggregate", d.cell_aggregate);
    }
    if (auto it = j.find("thresholds"); it != j.end())
      c.thresholds = it->get<std::vector<double>>();
    validate(c);
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  }
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str(), nullptr, false);
  if (j.is_discarded()) throw ConfigError(path + " is not valid JSON");
  return scenario_from_json(j);
}

// FNV-1a over the canonical JSON of the fully resolved configuration.
inline std::string config_hash(const ScenarioConfig& c) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : to_json(c).dump()) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  static const char* hex = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, h >>= 4) out[static_cast<std::size_t>(i)] = hex[h & 0xf];
  return out;
}

}  // namespace oranlab::harness
