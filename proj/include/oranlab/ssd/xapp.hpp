#pragma once

// Signaling-storm detection xApp. Trains a KPI profile on the first
// training_duration_s of rar_event REPORTs, then scores every request
// against it and blocks TAs whose score exceeds gamma.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oranlab/e2lite/envelope.hpp"
#include "oranlab/ssd/profile.hpp"

namespace oranlab::ssd {

struct SsdEvent {
  std::int64_t ts_us = 0;
  int ta = 0;
  std::int64_t count = 0;
  double z = 0.0;
  bool blocked = false;  // a block policy was sent with this event
};

struct BlockRecord {
  std::int64_t ts_us = 0;
  int ta = 0;
  std::optional<std::int64_t> until_us;
};

class SsdXapp {
 public:
  using Logger = std::function<void(const std::string&)>;

  // Starts in the training phase, which covers virtual time
  // [0, training_duration_s).
  explicit SsdXapp(SsdConfig cfg, Logger log = {})
      : cfg_(std::move(cfg)), log_(std::move(log)), counter_(cfg_.interval_s) {
    validate(cfg_);
  }

  // Skips training with an existing profile.
  SsdXapp(SsdConfig cfg, KpiProfile profile, Logger log = {})
      : SsdXapp(std::move(cfg), std::move(log)) {
    profile_ = std::move(profile);
  }

  static std::vector<e2lite::E2Envelope> subscriptions(const std::string& subscriber_id = "ssd") {
    return {e2lite::make_subscribe(subscriber_id, std::string(e2lite::style::kRarEvent))};
  }

  std::vector<e2lite::E2Envelope> on_envelope(const e2lite::E2Envelope& env) {
    std::vector<e2lite::E2Envelope> out;
    if (const auto* rar = std::get_if<e2lite::RarEvent>(&env.payload)) {
      on_rar(rar->ts_us, rar->ta, out);
    } else if (const auto* rc = std::get_if<e2lite::ControlReceipt>(&env.payload)) {
      if (!rc->accepted) say("policy " + std::to_string(rc->ref_msg_id) + " rejected: " + rc->reason);
    }
    return out;
  }

  // Ends training explicitly (e.g. when the stream goes quiet).
  void finish_training(std::int64_t end_us) {
    if (profile_) return;
    if (!builder_) throw EmptyTraining("no connection requests in training");
    profile_ = builder_->finish(end_us);
    say("profile trained: " + std::to_string(profile_->tas.size()) + " TAs");
  }

  bool training() const { return !profile_; }
  const std::optional<KpiProfile>& profile() const { return profile_; }
  const std::vector<SsdEvent>& events() const { return events_; }
  const std::vector<BlockRecord>& blocks() const { return blocks_; }
  std::optional<std::int64_t> training_end_us() const { return train_end_us_; }
  const SsdConfig& config() const { return cfg_; }

  bool is_blocked(int ta, std::int64_t ts_us) const {
    auto it = active_.find(ta);
    return it != active_.end() && (!it->second || ts_us < *it->second);
  }

 private:
  void say(const std::string& m) {
    if (log_) log_(m);
  }

  void on_rar(std::int64_t ts_us, int ta, std::vector<e2lite::E2Envelope>& out) {
    if (!profile_) {
      if (!builder_) {
        builder_.emplace(cfg_.interval_s, 0);
        train_end_us_ = static_cast<std::int64_t>(std::llround(cfg_.training_duration_s * 1e6));
      }
      if (ts_us < *train_end_us_) {
        builder_->add(ts_us, ta);
        return;
      }
      finish_training(*train_end_us_);
    }
    std::int64_t count = counter_.add(ts_us, ta);
    double z = anomaly_score(count, ta, *profile_, cfg_);
    bool send = z > cfg_.gamma && !is_blocked(ta, ts_us);
    if (send) {
      std::optional<std::int64_t> until;
      if (cfg_.block_ttl_ms) until = ts_us + *cfg_.block_ttl_ms * 1000;
      active_[ta] = until;
      blocks_.push_back({ts_us, ta, until});
      out.push_back(e2lite::make_control(ts_us, e2lite::TaRejectPolicy{{ta}, cfg_.block_ttl_ms}));
    }
    events_.push_back({ts_us, ta, count, z, send});
  }

  SsdConfig cfg_;
  Logger log_;
  IntervalCounter counter_;
  std::optional<ProfileBuilder> builder_;
  std::optional<std::int64_t> train_end_us_;
  std::optional<KpiProfile> profile_;
  std::map<int, std::optional<std::int64_t>> active_;
  std::vector<SsdEvent> events_;
  std::vector<BlockRecord> blocks_;
};

}  // namespace oranlab::ssd
