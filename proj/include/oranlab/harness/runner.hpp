#pragma once

// In-process experiment runner. The simulator and the xApp talk through an
// e2lite::Broker exactly as they would over TCP, but in one thread and in
// virtual time, so a run is a pure function of its configuration.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "oranlab/e2lite/broker.hpp"
#include "oranlab/harness/metrics.hpp"
#include "oranlab/harness/scenario.hpp"
#include "oranlab/jd/calibration.hpp"
#include "oranlab/jd/xapp.hpp"
#include "oranlab/ransim/simulator.hpp"
#include "oranlab/ssd/roc.hpp"
#include "oranlab/ssd/xapp.hpp"

namespace oranlab::harness {

struct MetricsReport {
  std::string scenario;
  std::uint64_t seed = 0;
  std::string config_hash;
  bool xapp_enabled = false;
  double duration_s = 0.0;
  bool failed = false;
  std::string failure;

  // URLLC_JAM
  std::optional<double> p95_rtt_ms;
  std::size_t pings = 0;
  std::size_t undelivered = 0;
  std::vector<CdfPoint> cdf;
  std::optional<double> beta;
  std::size_t n_window = 0;
  std::uint64_t policies_sent = 0;
  std::uint64_t releases_sent = 0;
  std::optional<double> first_policy_s;

  // MMTC_SS
  std::optional<double> p_d;
  std::optional<double> p_fa;
  std::optional<double> collateral_rejection_rate;
  std::optional<double> attacker_rejection_after_block;
  std::size_t attacks = 0;
  std::size_t legit_requests = 0;
  std::size_t attacker_requests = 0;
  std::vector<int> blocked_tas;
  std::optional<std::size_t> profile_tas;
  std::optional<double> profile_mean_per_interval;

  e2lite::BrokerStats broker;
};

// Simulator-side and xApp-side connections on one broker.
class Fabric {
 public:
  Fabric() {
    node_ = broker_.open("ransim");
    app_ = broker_.open("xapp");
    broker_.submit(node_, e2lite::make_subscribe("ransim", std::string(e2lite::style::kE2Setup)));
    broker_.drain(node_);
  }

  void subscribe(const std::vector<e2lite::E2Envelope>& subs) {
    for (const auto& s : subs) broker_.submit(app_, s);
    broker_.drain(app_);
  }

  void publish(const e2lite::E2Envelope& env) { broker_.submit(node_, env); }

  // Delivers pending REPORTs to the xApp, its CONTROLs to the simulator, and
  // the simulator's receipts back towards the xApp.
  template <class App>
  void pump(App& app, ransim::RanSimulator& sim) {
    for (const auto& env : broker_.drain(app_))
      for (const auto& ctl : app.on_envelope(env)) broker_.submit(app_, ctl);
    for (const auto& env : broker_.drain(node_)) {
      if (env.service != e2lite::Service::kControl) continue;
      auto res = sim.apply_policy(env);
      publish(e2lite::make_report(sim.now_us(),
                                  e2lite::ControlReceipt{env.msg_id, res.accepted, res.reason}));
    }
  }

  e2lite::BrokerStats stats() const { return broker_.stats(); }

 private:
  e2lite::Broker broker_;
  e2lite::ConnectionId node_ = 0;
  e2lite::ConnectionId app_ = 0;
};

// ACK/NACK stream (1 = NACK) of every DL transport block of a run.
inline std::vector<std::uint8_t> nack_trace(const ransim::SimConfig& cfg, std::int64_t slots) {
  ransim::RanSimulator sim(cfg);
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(slots));
  sim.run(slots, [&](e2lite::E2Envelope&& e) {
    if (const auto* tb = std::get_if<e2lite::TbReport>(&e.payload))
      if (tb->direction == e2lite::Direction::kDl) out.push_back(tb->ack ? 0 : 1);
  });
  return out;
}

// Jam-free training configuration: same scenario, jammer off, independent
// seed.
inline ransim::SimConfig training_config(const ScenarioConfig& c) {
  ransim::SimConfig t = c.sim;
  t.jammer.mode = ransim::JammerMode::kOff;
  t.seed = c.seed + 1;
  return t;
}

inline std::int64_t training_slots(const ScenarioConfig& c, std::size_t largest_n) {
  auto s = static_cast<std::int64_t>(std::llround(c.jd.calibration_s * 1000.0));
  return std::max<std::int64_t>(s, static_cast<std::int64_t>(largest_n));
}

inline jd::CalibrationPair calibrated_beta(const ScenarioConfig& c, std::size_t n) {
  auto trace = nack_trace(training_config(c), training_slots(c, n));
  auto pairs = jd::calibrate(trace, c.jd.pfa_target, {n});
  auto best = jd::select_beta(pairs, n);
  if (!best)
    throw InsufficientData("no beta meets P_fa " + std::to_string(c.jd.pfa_target) +
                           " at N = " + std::to_string(n));
  return *best;
}

inline double ping_value(const ransim::PingSample& p) { return p.delivered ? p.rtt_ms : kInf; }

namespace detail {

inline MetricsReport base_report(const ScenarioConfig& c) {
  MetricsReport r;
  r.scenario = to_string(c.scenario);
  r.seed = c.seed;
  r.config_hash = config_hash(c);
  r.xapp_enabled = c.xapp_enabled;
  r.duration_s = c.duration_s;
  return r;
}

inline void run_urllc(const ScenarioConfig& c, MetricsReport& r) {
  ransim::RanSimulator sim(c.sim);
  Fabric fabric;
  std::optional<jd::JdXapp> app;
  r.n_window = c.jd.n_window;
  if (c.xapp_enabled) {
    double beta = c.jd.beta ? *c.jd.beta : calibrated_beta(c, c.jd.n_window).beta;
    r.beta = beta;
    app.emplace(jd_config(c, beta));
    fabric.subscribe(jd::JdXapp::subscriptions());
  }
  const auto slots = static_cast<std::int64_t>(std::llround(c.duration_s * 1000.0));
  for (std::int64_t t = 0; t < slots; ++t) {
    sim.run(1, [&](e2lite::E2Envelope&& e) { fabric.publish(e); });
    if (app) fabric.pump(*app, sim);
  }
  if (app) {
    r.policies_sent = app->policies_sent();
    r.releases_sent = app->releases_sent();
    for (const auto& ev : app->events())
      if (ev.policy_value) {
        r.first_policy_s = static_cast<double>(ev.ts_us) / 1e6;
        break;
      }
  }
  std::vector<double> rtts;
  for (const auto& p : sim.pings()) {
    if (p.sent_ms < c.sim.jammer.start_ms) continue;
    rtts.push_back(ping_value(p));
    r.undelivered += p.delivered ? 0 : 1;
  }
  r.pings = rtts.size();
  if (!rtts.empty()) {
    Cdf d(std::move(rtts));
    r.p95_rtt_ms = d.percentile(0.95);
    r.cdf = d.points();
  }
  r.broker = fabric.stats();
}

inline void run_mmtc(const ScenarioConfig& c, MetricsReport& r) {
  ransim::RanSimulator sim(c.sim);
  Fabric fabric;
  std::optional<ssd::SsdXapp> app;
  if (c.xapp_enabled) {
    app.emplace(ssd_config(c));
    fabric.subscribe(ssd::SsdXapp::subscriptions());
  }
  const auto end_slot = static_cast<std::int64_t>(std::llround(c.duration_s * 1000.0));
  while (sim.now_slot() < end_slot) {
    std::int64_t k = std::min(sim.quiet_slots(), end_slot - sim.now_slot());
    sim.run(k, [&](e2lite::E2Envelope&& e) { fabric.publish(e); });
    if (app) fabric.pump(*app, sim);
  }
  const auto train_end_us = static_cast<std::int64_t>(std::llround(c.ssd.train_s * 1e6));
  const auto end_us = end_slot * ransim::RanSimulator::kSlotUs;

  std::size_t legit_rej = 0;
  for (const auto& a : sim.access_log()) {
    if (a.ts_us < train_end_us) continue;
    if (a.attacker) {
      ++r.attacker_requests;
    } else {
      ++r.legit_requests;
      legit_rej += a.rejected ? 1 : 0;
    }
  }
  if (r.legit_requests > 0)
    r.collateral_rejection_rate =
        static_cast<double>(legit_rej) / static_cast<double>(r.legit_requests);

  ssd::LabeledTrace trace;
  trace.attacks.emplace();
  for (const auto& w : sim.attack_windows())
    if (w.start_us >= train_end_us && w.start_us < end_us)
      trace.attacks->push_back({w.start_us, w.end_us, w.base_ta});
  trace.start_us = train_end_us;
  trace.end_us = end_us;
  r.attacks = trace.attacks->size();

  if (!app) return;
  if (app->training()) app->finish_training(train_end_us);
  const auto& profile = *app->profile();
  r.profile_tas = profile.tas.size();
  r.profile_mean_per_interval = profile.combined_mean();

  auto point = ssd::roc_point(app->blocks(), trace, c.ssd.interval_s, c.ssd.gamma);
  r.p_d = point.p_d;
  r.p_fa = point.p_fa;
  for (const auto& b : app->blocks()) r.blocked_tas.push_back(b.ta);
  r.policies_sent = app->blocks().size();

  // A policy takes effect from the slot after the request that triggered it.
  std::size_t after = 0, after_rej = 0;
  for (const auto& a : sim.access_log()) {
    if (!a.attacker) continue;
    for (const auto& b : app->blocks()) {
      std::int64_t from = (b.ts_us / ransim::RanSimulator::kSlotUs + 1) * ransim::RanSimulator::kSlotUs;
      if (b.ta == a.ta && a.ts_us >= from && (!b.until_us || a.ts_us < *b.until_us)) {
        ++after;
        after_rej += a.rejected ? 1 : 0;
        break;
      }
    }
  }
  if (after > 0)
    r.attacker_rejection_after_block = static_cast<double>(after_rej) / static_cast<double>(after);
  r.broker = fabric.stats();
}

}  // namespace detail

// Never throws for a valid config: failures produce a partial report with
// `failed` set.
inline MetricsReport run_scenario(const ScenarioConfig& c) {
  MetricsReport r = detail::base_report(c);
  try {
    validate(c);
    if (c.scenario == ScenarioKind::kUrllcJam)
      detail::run_urllc(c, r);
    else
      detail::run_mmtc(c, r);
  } catch (const std::exception& e) {
    r.failed = true;
    r.failure = e.what();
  }
  return r;
}

struct RocRow {
  double threshold = 0.0;
  std::optional<double> p_d;
  double p_fa = 0.0;
  std::optional<double> beta;  // URLLC rows: calibrated beta for N = threshold
};

// MMTC_SS: one paired run per gamma. URLLC_JAM: thresholds are window sizes
// N; beta is calibrated per N and P_d measured on a trace jammed from t = 0.
inline std::vector<RocRow> roc_sweep(const ScenarioConfig& c, const std::vector<double>& thresholds) {
  std::vector<RocRow> rows;
  if (thresholds.empty()) return rows;
  if (c.scenario == ScenarioKind::kMmtcSs) {
    for (double g : thresholds) {
      ScenarioConfig k = c;
      k.ssd.gamma = g;
      k.xapp_enabled = true;
      auto r = run_scenario(k);
      if (r.failed) throw Error("RunFailed", r.failure);
      rows.push_back({g, r.p_d, r.p_fa.value_or(0.0), std::nullopt});
    }
    return rows;
  }
  ransim::SimConfig jammed = c.sim;
  jammed.jammer.start_ms = 0;
  jammed.jammer.stop_ms.reset();
  auto trace = nack_trace(jammed, static_cast<std::int64_t>(std::llround(c.duration_s * 1000.0)));
  for (double t : thresholds) {
    if (!(t >= 1)) throw ConfigError("window size must be >= 1");
    auto n = static_cast<std::size_t>(t);
    auto cal = calibrated_beta(c, n);
    rows.push_back({t, jd::detection_probability(trace, cal.beta, n), cal.pfa, cal.beta});
  }
  return rows;
}

struct DetectionRow {
  ransim::JammerMode mode = ransim::JammerMode::kPermanent;
  double sjr_db = 0.0;
  std::size_t n = 0;
  double beta = 0.0;
  double pfa = 0.0;
  double p_d = 0.0;
};

// P_d for every jammer mode x SJR x N, with one calibration per N shared by
// all jammed traces.
inline std::vector<DetectionRow> detection_table(const ScenarioConfig& c,
                                                 const std::vector<ransim::JammerMode>& modes,
                                                 const std::vector<double>& sjrs,
                                                 const std::vector<std::size_t>& ns) {
  std::vector<DetectionRow> rows;
  if (ns.empty()) return rows;
  std::size_t largest = *std::max_element(ns.begin(), ns.end());
  auto training = nack_trace(training_config(c), training_slots(c, largest));
  auto pairs = jd::calibrate(training, c.jd.pfa_target, ns);
  const auto slots = static_cast<std::int64_t>(std::llround(c.duration_s * 1000.0));
  for (auto mode : modes) {
    for (double sjr : sjrs) {
      ransim::SimConfig s = c.sim;
      s.jammer.mode = mode;
      s.jammer.sjr_db = sjr;
      s.jammer.start_ms = 0;
      s.jammer.stop_ms.reset();
      auto trace = nack_trace(s, slots);
      for (std::size_t n : ns) {
        auto cal = jd::select_beta(pairs, n);
        if (!cal) throw InsufficientData("no calibrated beta for N = " + std::to_string(n));
        rows.push_back({mode, sjr, n, cal->beta, cal->pfa, jd::detection_probability(trace, cal->beta, n)});
      }
    }
  }
  return rows;
}

struct CompareReport {
  MetricsReport without_xapp;
  MetricsReport with_xapp;
  std::optional<double> reduction_ratio;  // P95 off / P95 on
};

inline std::optional<double> ratio(const std::optional<double>& a, const std::optional<double>& b) {
  if (!a || !b || *b == 0.0 || std::isinf(*b)) return std::nullopt;
  return *a / *b;
}

// Both arms share the seed, so their random streams are identical.
inline CompareReport compare_mitigation(const ScenarioConfig& c) {
  ScenarioConfig off = c, on = c;
  off.xapp_enabled = false;
  on.xapp_enabled = true;
  CompareReport r{run_scenario(off), run_scenario(on), std::nullopt};
  r.reduction_ratio = ratio(r.without_xapp.p95_rtt_ms, r.with_xapp.p95_rtt_ms);
  return r;
}

}  // namespace oranlab::harness
