#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "oranlab/error.hpp"
#include "oranlab/ransim/link_model.hpp"

namespace oranlab::ransim {

enum class JammerMode { kOff, kPermanent, kKeyed };

inline const char* to_string(JammerMode m) {
  switch (m) {
    case JammerMode::kOff: return "off";
    case JammerMode::kPermanent: return "permanent";
    case JammerMode::kKeyed: return "keyed";
  }
  return "?";
}

inline JammerMode jammer_mode_from_string(const std::string& s) {
  if (s == "off" || s == "OFF") return JammerMode::kOff;
  if (s == "permanent" || s == "PERMANENT") return JammerMode::kPermanent;
  if (s == "keyed" || s == "KEYED") return JammerMode::kKeyed;
  throw ConfigError("unknown jammer mode '" + s + "'");
}

struct JammerConfig {
  JammerMode mode = JammerMode::kOff;
  std::int64_t on_ms = 100;
  std::int64_t off_ms = 100;
  // Signal-to-jamming ratio at the victim while the jammer transmits, dB.
  double sjr_db = 16.0;
  std::int64_t start_ms = 0;
  std::optional<std::int64_t> stop_ms;
};

// Whether the jammer radiates during slot `t_ms`.
inline bool jam_active(const JammerConfig& j, std::int64_t t_ms) {
  if (j.mode == JammerMode::kOff || t_ms < j.start_ms) return false;
  if (j.stop_ms && t_ms >= *j.stop_ms) return false;
  if (j.mode == JammerMode::kPermanent) return true;
  return (t_ms - j.start_ms) % (j.on_ms + j.off_ms) < j.on_ms;
}

struct ChannelConfig {
  // SNR (dB) of a UE = link_budget_db - path_loss_db.
  double link_budget_db = 70.0;
  // Per-slot Gaussian fluctuation (dB) of the desired signal.
  double fading_sd_db = 1.0;
  // Per-slot Gaussian fluctuation (dB) of the received jamming power.
  double jam_fading_sd_db = 5.0;
};

struct SchedulerConfig {
  std::int64_t adaptation_period_ms = 100;
  std::int64_t harq_rtt_ms = 8;
  int max_retx = 8;
  bool harq_combining = true;
};

struct UeConfig {
  int ue_id = 1;
  double path_loss_db = 45.0;
  bool full_buffer = true;  // background (iperf-like) DL traffic in idle slots
  bool ping = true;
};

struct PingConfig {
  std::int64_t interval_ms = 100;
  int blocks_per_packet = 4;
  // Uplink + core + host turnaround before the reply reaches the DL queue,
  // drawn uniformly per ping.
  std::int64_t pre_dl_min_ms = 8;
  std::int64_t pre_dl_max_ms = 16;
  std::int64_t post_dl_ms = 2;
  bool random_phase = true;
};

struct TaJitter {
  double p_minus = 0.15;
  double p_zero = 0.70;
  double p_plus = 0.15;
};

struct AccessDevice {
  int ue_id = 100;
  int base_ta = 10;
  bool attacker = false;
  TaJitter jitter;
};

struct AccessTrafficConfig {
  double legit_rate_per_min = 3.0;
  double attacks_per_hour = 15.0;
  int burst_len = 12;
  double burst_interval_s = 2.0;
  // Attacks start no earlier than this (keeps a training phase attack-free).
  double attack_start_s = 0.0;
};

struct AccessConfig {
  bool enabled = false;
  AccessTrafficConfig traffic;
  std::vector<AccessDevice> devices{
      AccessDevice{100, 10, false, {}},
      AccessDevice{200, 20, true, {}},
  };
};

// Physical constants of the reference testbed; carried for provenance only,
// the simulator works in relative dB.
struct RadioMetadata {
  double tx_power_mw = 10.0;
  double bandwidth_mhz = 5.0;
  double dl_center_mhz = 881.5;
  double ul_center_mhz = 836.5;
};

struct SimConfig {
  std::uint64_t seed = 0;
  LinkModelParams link;
  ChannelConfig channel;
  SchedulerConfig scheduler;
  JammerConfig jammer;
  std::vector<UeConfig> ues{UeConfig{}};
  PingConfig ping;
  AccessConfig access;
  RadioMetadata radio;
};

inline void validate(const SimConfig& c) {
  auto fail = [](const std::string& m) { throw ConfigError(m); };
  if (c.link.mcs_max < 0) fail("mcs_max must be >= 0");
  if (!(c.link.bler_target > 0 && c.link.bler_target < 1)) fail("bler_target must be in (0,1)");
  if (c.link.slope_per_db <= 0) fail("slope_per_db must be > 0");
  if (c.scheduler.adaptation_period_ms <= 0) fail("adaptation_period_ms must be > 0");
  if (c.scheduler.harq_rtt_ms <= 0) fail("harq_rtt_ms must be > 0");
  if (c.scheduler.max_retx < 0) fail("max_retx must be >= 0");
  if (c.channel.fading_sd_db < 0 || c.channel.jam_fading_sd_db < 0)
    fail("fading deviations must be >= 0");
  if (c.jammer.mode == JammerMode::kKeyed && (c.jammer.on_ms <= 0 || c.jammer.off_ms <= 0))
    fail("keyed jammer requires on_ms > 0 and off_ms > 0");
  for (const auto& u : c.ues) {
    if (u.path_loss_db < 0) fail("path_loss_db must be >= 0");
  }
  for (std::size_t i = 0; i < c.ues.size(); ++i)
    for (std::size_t k = i + 1; k < c.ues.size(); ++k)
      if (c.ues[i].ue_id == c.ues[k].ue_id) fail("duplicate ue_id " + std::to_string(c.ues[i].ue_id));
  if (c.ping.interval_ms <= 0 || c.ping.blocks_per_packet <= 0) fail("bad ping configuration");
  if (c.ping.pre_dl_min_ms < 0 || c.ping.pre_dl_max_ms < c.ping.pre_dl_min_ms ||
      c.ping.post_dl_ms < 0)
    fail("bad ping delay range");
  const auto& t = c.access.traffic;
  if (t.legit_rate_per_min < 0 || t.attacks_per_hour < 0 || t.burst_len < 0 ||
      t.burst_interval_s < 0 || t.attack_start_s < 0)
    fail("access traffic parameters must be >= 0");
  for (const auto& d : c.access.devices) {
    const auto& j = d.jitter;
    if (j.p_minus < 0 || j.p_zero < 0 || j.p_plus < 0 ||
        std::abs(j.p_minus + j.p_zero + j.p_plus - 1.0) > 1e-9)
      fail("TA jitter probabilities must be >= 0 and sum to 1");
    if (d.base_ta < 0) fail("base_ta must be >= 0");
  }
}

// ---- structured-text (JSON) form -------------------------------------------

using nlohmann::json;

inline void to_json(json& j, const SimConfig& c) {
  j = json{
      {"seed", c.seed},
      {"link",
       {{"theta0_db", c.link.theta0_db},
        {"step_db", c.link.step_db},
        {"slope_per_db", c.link.slope_per_db},
        {"mcs_max", c.link.mcs_max},
        {"bler_target", c.link.bler_target}}},
      {"channel",
       {{"link_budget_db", c.channel.link_budget_db},
        {"fading_sd_db", c.channel.fading_sd_db},
        {"jam_fading_sd_db", c.channel.jam_fading_sd_db}}},
      {"scheduler",
       {{"adaptation_period_ms", c.scheduler.adaptation_period_ms},
        {"harq_rtt_ms", c.scheduler.harq_rtt_ms},
        {"max_retx", c.scheduler.max_retx},
        {"harq_combining", c.scheduler.harq_combining}}},
      {"jammer",
       {{"mode", to_string(c.jammer.mode)},
        {"on_ms", c.jammer.on_ms},
        {"off_ms", c.jammer.off_ms},
        {"sjr_db", c.jammer.sjr_db},
        {"start_ms", c.jammer.start_ms},
        {"stop_ms", c.jammer.stop_ms ? json(*c.jammer.stop_ms) : json(nullptr)}}},
      {"ping",
       {{"interval_ms", c.ping.interval_ms},
        {"blocks_per_packet", c.ping.blocks_per_packet},
        {"pre_dl_min_ms", c.ping.pre_dl_min_ms},
        {"pre_dl_max_ms", c.ping.pre_dl_max_ms},
        {"post_dl_ms", c.ping.post_dl_ms},
        {"random_phase", c.ping.random_phase}}},
      {"radio",
       {{"tx_power_mw", c.radio.tx_power_mw},
        {"bandwidth_mhz", c.radio.bandwidth_mhz},
        {"dl_center_mhz", c.radio.dl_center_mhz},
        {"ul_center_mhz", c.radio.ul_center_mhz}}},
  };
  json ues = json::array();
  for (const auto& u : c.ues)
    ues.push_back({{"ue_id", u.ue_id},
                   {"path_loss_db", u.path_loss_db},
                   {"full_buffer", u.full_buffer},
                   {"ping", u.ping}});
  j["ues"] = ues;
  json devices = json::array();
  for (const auto& d : c.access.devices)
    devices.push_back({{"ue_id", d.ue_id},
                       {"base_ta", d.base_ta},
                       {"attacker", d.attacker},
                       {"jitter", {d.jitter.p_minus, d.jitter.p_zero, d.jitter.p_plus}}});
  const auto& t = c.access.traffic;
  j["access"] = {{"enabled", c.access.enabled},
                 {"legit_rate_per_min", t.legit_rate_per_min},
                 {"attacks_per_hour", t.attacks_per_hour},
                 {"burst_len", t.burst_len},
                 {"burst_interval_s", t.burst_interval_s},
                 {"attack_start_s", t.attack_start_s},
                 {"devices", devices}};
}

// Missing keys keep their defaults, so a config file only needs the fields
// it changes.
inline void from_json(const json& j, SimConfig& c) {
  try {
    c.seed = j.value("seed", c.seed);
    if (auto it = j.find("link"); it != j.end()) {
      c.link.theta0_db = it->value("theta0_db", c.link.theta0_db);
      c.link.step_db = it->value("step_db", c.link.step_db);
      c.link.slope_per_db = it->value("slope_per_db", c.link.slope_per_db);
      c.link.mcs_max = it->value("mcs_max", c.link.mcs_max);
      c.link.bler_target = it->value("bler_target", c.link.bler_target);
    }
    if (auto it = j.find("channel"); it != j.end()) {
      c.channel.link_budget_db = it->value("link_budget_db", c.channel.link_budget_db);
      c.channel.fading_sd_db = it->value("fading_sd_db", c.channel.fading_sd_db);
      c.channel.jam_fading_sd_db = it->value("jam_fading_sd_db", c.channel.jam_fading_sd_db);
    }
    if (auto it = j.find("scheduler"); it != j.end()) {
      auto& s = c.scheduler;
      s.adaptation_period_ms = it->value("adaptation_period_ms", s.adaptation_period_ms);
      s.harq_rtt_ms = it->value("harq_rtt_ms", s.harq_rtt_ms);
      s.max_retx = it->value("max_retx", s.max_retx);
      s.harq_combining = it->value("harq_combining", s.harq_combining);
    }
    if (auto it = j.find("jammer"); it != j.end()) {
      auto& m = c.jammer;
      if (it->contains("mode")) m.mode = jammer_mode_from_string(it->at("mode").get<std::string>());
      m.on_ms = it->value("on_ms", m.on_ms);
      m.off_ms = it->value("off_ms", m.off_ms);
      if (it->contains("jam_power_rel_db"))
        m.sjr_db = it->at("jam_power_rel_db").get<double>();
      else
        m.sjr_db = it->value("sjr_db", m.sjr_db);
      m.start_ms = it->value("start_ms", m.start_ms);
      if (auto s = it->find("stop_ms"); s != it->end())
        m.stop_ms = s->is_null() ? std::nullopt : std::optional<std::int64_t>(s->get<std::int64_t>());
    }
    if (auto it = j.find("ping"); it != j.end()) {
      auto& p = c.ping;
      p.interval_ms = it->value("interval_ms", p.interval_ms);
      p.blocks_per_packet = it->value("blocks_per_packet", p.blocks_per_packet);
      p.pre_dl_min_ms = it->value("pre_dl_min_ms", p.pre_dl_min_ms);
      p.pre_dl_max_ms = it->value("pre_dl_max_ms", p.pre_dl_max_ms);
      p.post_dl_ms = it->value("post_dl_ms", p.post_dl_ms);
      p.random_phase = it->value("random_phase", p.random_phase);
    }
    if (auto it = j.find("ues"); it != j.end()) {
      c.ues.clear();
      for (const auto& u : *it) {
        UeConfig ue;
        ue.ue_id = u.value("ue_id", ue.ue_id);
        ue.path_loss_db = u.value("path_loss_db", ue.path_loss_db);
        ue.full_buffer = u.value("full_buffer", ue.full_buffer);
        ue.ping = u.value("ping", ue.ping);
        c.ues.push_back(ue);
      }
    }
    if (auto it = j.find("access"); it != j.end()) {
      auto& a = c.access;
      auto& t = a.traffic;
      a.enabled = it->value("enabled", a.enabled);
      t.legit_rate_per_min = it->value("legit_rate_per_min", t.legit_rate_per_min);
      t.attacks_per_hour = it->value("attacks_per_hour", t.attacks_per_hour);
      t.burst_len = it->value("burst_len", t.burst_len);
      t.burst_interval_s = it->value("burst_interval_s", t.burst_interval_s);
      t.attack_start_s = it->value("attack_start_s", t.attack_start_s);
      if (auto d = it->find("devices"); d != it->end()) {
        a.devices.clear();
        for (const auto& dj : *d) {
          AccessDevice dev;
          dev.ue_id = dj.value("ue_id", dev.ue_id);
          dev.base_ta = dj.value("base_ta", dev.base_ta);
          dev.attacker = dj.value("attacker", dev.attacker);
          if (auto jit = dj.find("jitter"); jit != dj.end()) {
            if (!jit->is_array() || jit->size() != 3)
              throw ConfigError("jitter must be a list of three probabilities");
            dev.jitter = {(*jit)[0].get<double>(), (*jit)[1].get<double>(),
                          (*jit)[2].get<double>()};
          }
          a.devices.push_back(dev);
        }
      }
    }
    if (auto it = j.find("radio"); it != j.end()) {
      auto& r = c.radio;
      r.tx_power_mw = it->value("tx_power_mw", r.tx_power_mw);
      r.bandwidth_mhz = it->value("bandwidth_mhz", r.bandwidth_mhz);
      r.dl_center_mhz = it->value("dl_center_mhz", r.dl_center_mhz);
      r.ul_center_mhz = it->value("ul_center_mhz", r.ul_center_mhz);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace oranlab::ransim
