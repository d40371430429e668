#pragma once

// Discrete-event model of a single-cell E2 node with 1 ms slots.
//
// Per UE and slot the downlink carries at most one transport block. HARQ is
// synchronous: process (slot mod harq_rtt) retransmits a failed block
// exactly harq_rtt slots later, optionally soft-combining SINR across
// attempts. New blocks are ping replies first, then full-buffer filler.
// Link adaptation runs every adaptation period on the SINR the UE averaged
// over the previous period, so a jammer keyed at that period always meets
// an MCS chosen for the opposite state.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "oranlab/e2lite/envelope.hpp"
#include "oranlab/ransim/access.hpp"
#include "oranlab/ransim/config.hpp"
#include "oranlab/ransim/link_model.hpp"

namespace oranlab::ransim {

struct PingSample {
  int ue_id = 0;
  std::int64_t seq = 0;
  double rtt_ms = 0.0;
  bool delivered = false;
  std::int64_t sent_ms = 0;
};

struct AccessRecord {
  std::int64_t ts_us = 0;
  int ue_id = 0;
  int ta = 0;
  bool rejected = false;
  bool attacker = false;
};

struct PolicyResult {
  bool accepted = false;
  std::string reason;
};

class RanSimulator {
 public:
  static constexpr std::int64_t kSlotUs = 1000;

  explicit RanSimulator(SimConfig cfg) : cfg_(std::move(cfg)) {
    validate(cfg_);
    std::seed_seq chan{cfg_.seed, std::uint64_t{1}};
    std::seed_seq jam{cfg_.seed, std::uint64_t{2}};
    std::seed_seq tb{cfg_.seed, std::uint64_t{3}};
    std::seed_seq ping{cfg_.seed, std::uint64_t{4}};
    chan_rng_.seed(chan);
    jam_rng_.seed(jam);
    tb_rng_.seed(tb);
    ping_rng_.seed(ping);
    for (const auto& u : cfg_.ues) {
      Ue ue;
      ue.cfg = u;
      ue.snr_db = cfg_.channel.link_budget_db - u.path_loss_db;
      ue.link = LinkState{u.ue_id, u.path_loss_db, 0, ue.snr_db};
      ue.link.current_mcs = adapt_mcs(ue.link, cfg_.link);
      ue.harq.resize(static_cast<std::size_t>(cfg_.scheduler.harq_rtt_ms));
      ues_.push_back(std::move(ue));
    }
    for (auto& ue : ues_) {
      if (ue.cfg.ping) ue.next_ping_slot = next_ping_slot(0);
    }
    if (cfg_.access.enabled) access_.emplace(cfg_.access, cfg_.seed);
  }

  const SimConfig& config() const { return cfg_; }
  std::int64_t now_slot() const { return slot_; }
  std::int64_t now_us() const { return slot_ * kSlotUs; }

  // Advances n_slots and returns the emitted REPORT envelopes (msg_id 0;
  // the broker stamps ids per connection).
  std::vector<e2lite::E2Envelope> step(std::int64_t n_slots) {
    std::vector<e2lite::E2Envelope> out;
    run(n_slots, [&](e2lite::E2Envelope&& e) { out.push_back(std::move(e)); });
    return out;
  }

  template <class Sink>
  void run(std::int64_t n_slots, Sink&& sink) {
    for (std::int64_t i = 0; i < n_slots; ++i) {
      run_slot(sink);
      ++slot_;
    }
  }

  // Number of upcoming slots in which nothing can happen; lets an access-only
  // scenario skip idle time. Always >= 1.
  std::int64_t quiet_slots() const {
    for (const auto& ue : ues_)
      if (ue.cfg.full_buffer || ue.cfg.ping) return 1;
    if (!access_) return INT64_MAX / 4;
    std::int64_t next = access_->next_ts_us();
    if (next == INT64_MAX) return INT64_MAX / 4;
    std::int64_t target_slot = next / kSlotUs;
    return std::max<std::int64_t>(1, target_slot - slot_ + 1);
  }

  PolicyResult apply_policy(const e2lite::E2Envelope& env) {
    if (const auto* cap = std::get_if<e2lite::McsCapPolicy>(&env.payload))
      return apply(*cap);
    if (const auto* rej = std::get_if<e2lite::TaRejectPolicy>(&env.payload))
      return apply(*rej);
    return {false, "not a policy"};
  }

  PolicyResult apply(const e2lite::McsCapPolicy& p) {
    Ue* ue = find_ue(p.ue_id);
    if (!ue) return {false, "unknown ue " + std::to_string(p.ue_id)};
    if (p.cap && (*p.cap < 0 || *p.cap > cfg_.link.mcs_max))
      return {false, "cap " + std::to_string(*p.cap) + " out of range"};
    if (p.ttl_ms && *p.ttl_ms <= 0) return {false, "ttl must be positive"};
    ue->cap = p.cap;
    ue->cap_expiry_slot = p.ttl_ms ? std::optional<std::int64_t>(slot_ + *p.ttl_ms) : std::nullopt;
    ue->cap_changed = true;
    return {true, p.cap ? "cap installed" : "cap released"};
  }

  PolicyResult apply(const e2lite::TaRejectPolicy& p) {
    for (int ta : p.tas)
      if (ta < 0) return {false, "negative TA " + std::to_string(ta)};
    if (p.ttl_ms && *p.ttl_ms <= 0) return {false, "ttl must be positive"};
    for (int ta : p.tas)
      ta_reject_[ta] = p.ttl_ms ? std::optional<std::int64_t>(now_us() + *p.ttl_ms * 1000)
                                : std::nullopt;
    return {true, p.tas.empty() ? "no-op" : "ta reject installed"};
  }

  bool ta_rejected(int ta, std::int64_t ts_us) const {
    auto it = ta_reject_.find(ta);
    if (it == ta_reject_.end()) return false;
    return !it->second || ts_us < *it->second;
  }

  std::optional<int> cap_of(int ue_id) const {
    for (const auto& ue : ues_)
      if (ue.cfg.ue_id == ue_id) return ue.cap;
    return std::nullopt;
  }

  const LinkState& link(int ue_id) const {
    for (const auto& ue : ues_)
      if (ue.cfg.ue_id == ue_id) return ue.link;
    throw ConfigError("unknown ue " + std::to_string(ue_id));
  }

  const std::vector<PingSample>& pings() const { return pings_; }
  const std::vector<AccessRecord>& access_log() const { return access_log_; }
  std::vector<AttackWindow> attack_windows() const {
    return access_ ? access_->attacks() : std::vector<AttackWindow>{};
  }
  std::uint64_t rejected_count() const { return rejected_; }

 private:
  struct HarqProcess {
    bool busy = false;
    int retx = 0;
    int mcs = 0;
    double combined_lin = 0.0;
    std::int64_t ping_seq = -1;  // -1 for filler data
  };

  struct Ping {
    std::int64_t send_slot = 0;
    int blocks_left = 0;
    bool finished = false;
  };

  struct PingBlock {
    std::int64_t seq;
    std::int64_t ready_slot;
  };

  struct Ue {
    UeConfig cfg;
    LinkState link;
    double snr_db = 0.0;
    std::optional<int> cap;
    std::optional<std::int64_t> cap_expiry_slot;
    bool cap_changed = false;
    double sinr_acc = 0.0;
    std::int64_t sinr_n = 0;
    std::vector<HarqProcess> harq;
    std::deque<PingBlock> ping_queue;
    std::map<std::int64_t, Ping> pings_in_flight;
    std::int64_t next_ping_seq = 0;
    std::int64_t next_ping_slot = 0;
  };

  // Ping k leaves in [k * interval, (k + 1) * interval); with a random phase
  // the probe does not lock onto a keyed jammer's cycle.
  std::int64_t next_ping_slot(std::int64_t k) {
    std::int64_t base = k * cfg_.ping.interval_ms;
    if (!cfg_.ping.random_phase) return base;
    std::uniform_int_distribution<std::int64_t> d(0, cfg_.ping.interval_ms - 1);
    return base + d(ping_rng_);
  }

  Ue* find_ue(int ue_id) {
    for (auto& ue : ues_)
      if (ue.cfg.ue_id == ue_id) return &ue;
    return nullptr;
  }

  int assigned_mcs(const Ue& ue) const {
    return ue.cap ? std::min(ue.link.current_mcs, *ue.cap) : ue.link.current_mcs;
  }

  void finish_ping(Ue& ue, std::int64_t seq, bool delivered) {
    auto it = ue.pings_in_flight.find(seq);
    if (it == ue.pings_in_flight.end() || it->second.finished) return;
    it->second.finished = true;
    double rtt = delivered
                     ? static_cast<double>(slot_ + 1 + cfg_.ping.post_dl_ms - it->second.send_slot)
                     : 0.0;
    pings_.push_back({ue.cfg.ue_id, seq, rtt, delivered, it->second.send_slot});
    ue.pings_in_flight.erase(it);
  }

  template <class Sink>
  void run_slot(Sink& sink) {
    const std::int64_t t = slot_;
    const bool jam = jam_active(cfg_.jammer, t);
    const auto& sched = cfg_.scheduler;
    std::normal_distribution<double> fade(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    for (auto& ue : ues_) {
      if (ue.cap_expiry_slot && t >= *ue.cap_expiry_slot) {
        ue.cap.reset();
        ue.cap_expiry_slot.reset();
        ue.cap_changed = true;
      }

      // Channel draws happen every slot so random streams stay aligned
      // across runs that differ only in policy.
      double sig_fade = cfg_.channel.fading_sd_db * fade(chan_rng_);
      double jam_fade = cfg_.channel.jam_fading_sd_db * fade(jam_rng_);
      double u = uni(tb_rng_);
      double sjr = cfg_.jammer.sjr_db + sig_fade - jam_fade;
      double sinr = effective_sinr_db(ue.snr_db + sig_fade,
                                      jam ? std::optional<double>(sjr) : std::nullopt);

      if (t > 0 && t % sched.adaptation_period_ms == 0 && ue.sinr_n > 0) {
        ue.link.reported_sinr_db = ue.sinr_acc / static_cast<double>(ue.sinr_n);
        ue.sinr_acc = 0.0;
        ue.sinr_n = 0;
        ue.link.current_mcs = adapt_mcs(ue.link, cfg_.link);
        ue.cap_changed = true;
      }
      ue.sinr_acc += sinr;
      ++ue.sinr_n;
      if (t == 0) ue.cap_changed = true;
      if (ue.cap_changed) {
        ue.cap_changed = false;
        sink(e2lite::make_report(t * kSlotUs,
                                 e2lite::McsAssignment{ue.cfg.ue_id, t, assigned_mcs(ue)}));
      }

      if (ue.cfg.ping && t == ue.next_ping_slot) {
        std::uniform_int_distribution<std::int64_t> d(cfg_.ping.pre_dl_min_ms,
                                                      cfg_.ping.pre_dl_max_ms);
        std::int64_t seq = ue.next_ping_seq++;
        ue.next_ping_slot = next_ping_slot(seq + 1);
        std::int64_t ready = t + d(ping_rng_);
        ue.pings_in_flight[seq] = Ping{t, cfg_.ping.blocks_per_packet, false};
        for (int b = 0; b < cfg_.ping.blocks_per_packet; ++b) ue.ping_queue.push_back({seq, ready});
      }

      auto& proc = ue.harq[static_cast<std::size_t>(t % sched.harq_rtt_ms)];
      if (!proc.busy) {
        while (!ue.ping_queue.empty() && !ue.pings_in_flight.count(ue.ping_queue.front().seq))
          ue.ping_queue.pop_front();
        if (!ue.ping_queue.empty() && ue.ping_queue.front().ready_slot <= t) {
          proc = HarqProcess{true, 0, assigned_mcs(ue), 0.0, ue.ping_queue.front().seq};
          ue.ping_queue.pop_front();
        } else if (ue.cfg.full_buffer) {
          proc = HarqProcess{true, 0, assigned_mcs(ue), 0.0, -1};
        } else {
          continue;
        }
      } else if (ue.cap && proc.mcs > *ue.cap) {
        // A retransmission above a freshly installed cap is re-encoded.
        proc.mcs = *ue.cap;
        proc.combined_lin = 0.0;
      }

      double eff = sinr;
      if (sched.harq_combining) {
        proc.combined_lin += db_to_linear(sinr);
        eff = linear_to_db(proc.combined_lin);
      }
      bool ack = u < tb_outcome(eff, proc.mcs, cfg_.link);
      sink(e2lite::make_report(
          t * kSlotUs, e2lite::TbReport{ue.cfg.ue_id, t, proc.mcs, ack, e2lite::Direction::kDl}));

      if (ack) {
        proc.busy = false;
        if (proc.ping_seq >= 0) {
          auto it = ue.pings_in_flight.find(proc.ping_seq);
          if (it != ue.pings_in_flight.end() && --it->second.blocks_left == 0)
            finish_ping(ue, proc.ping_seq, true);
        }
      } else if (++proc.retx > sched.max_retx) {
        proc.busy = false;
        if (proc.ping_seq >= 0) finish_ping(ue, proc.ping_seq, false);
      }
    }

    if (access_) {
      access_->generate_until((t + 1) * kSlotUs, [&](const AccessRequest& r) {
        bool rejected = ta_rejected(r.ta, r.ts_us);
        if (rejected) ++rejected_;
        access_log_.push_back({r.ts_us, r.ue_id, r.ta, rejected, r.attacker});
        sink(e2lite::make_report(r.ts_us, e2lite::RarEvent{r.ue_id, r.ts_us, r.ta}));
      });
    }
  }

  SimConfig cfg_;
  std::int64_t slot_ = 0;
  std::vector<Ue> ues_;
  std::optional<AccessGenerator> access_;
  std::map<int, std::optional<std::int64_t>> ta_reject_;
  std::mt19937_64 chan_rng_, jam_rng_, tb_rng_, ping_rng_;
  std::vector<PingSample> pings_;
  std::vector<AccessRecord> access_log_;
  std::uint64_t rejected_ = 0;
};

}  // namespace oranlab::ransim
