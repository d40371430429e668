#pragma once

// Jamming detection and mitigation xApp. Consumes tb_report and
// mcs_assignment REPORTs; when a UE's window BLER rises above beta it caps
// that UE's MCS, and lifts the cap after M consecutive clean windows.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "oranlab/e2lite/envelope.hpp"
#include "oranlab/error.hpp"
#include "oranlab/jd/bler_window.hpp"

namespace oranlab::jd {

struct CapMode {
  enum class Kind { kFixed, kMinObserved };
  Kind kind = Kind::kFixed;
  int value = 1;

  static CapMode fixed(int v) { return {Kind::kFixed, v}; }
  static CapMode min_observed() { return {Kind::kMinObserved, 1}; }
};

// "fixed:<v>" or "min-observed".
inline CapMode parse_cap_mode(const std::string& s) {
  if (s == "min-observed" || s == "min_observed") return CapMode::min_observed();
  if (s.rfind("fixed:", 0) == 0) {
    try {
      std::size_t used = 0;
      int v = std::stoi(s.substr(6), &used);
      if (used == s.size() - 6 && v >= 0) return CapMode::fixed(v);
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("cap mode must be fixed:<mcs> or min-observed, got '" + s + "'");
}

inline std::string to_string(const CapMode& m) {
  return m.kind == CapMode::Kind::kFixed ? "fixed:" + std::to_string(m.value) : "min-observed";
}

struct JdConfig {
  double beta = 0.2;
  std::size_t n_window = 10000;
  CapMode cap_mode;
  int release_windows = 3;
  // One window for the whole cell instead of one per UE; a detection then
  // caps every UE seen so far.
  bool cell_aggregate = false;
  std::optional<std::int64_t> cap_ttl_ms;
};

inline void validate(const JdConfig& c) {
  if (!(c.beta > 0.0 && c.beta < 1.0)) throw ConfigError("beta must be in (0, 1)");
  if (c.n_window == 0) throw ConfigError("n_window must be > 0");
  if (c.release_windows < 1) throw ConfigError("release_windows must be >= 1");
  if (c.cap_mode.value < 0) throw ConfigError("cap value must be >= 0");
}

// Assigned DL MCS values per UE over the last `horizon` assignments.
class McsHistogram {
 public:
  explicit McsHistogram(std::size_t horizon = 1000) : horizon_(horizon) {}

  void add(int ue_id, int mcs) {
    auto& h = hist_[ue_id];
    h.order.push_back(mcs);
    ++h.counts[mcs];
    if (h.order.size() > horizon_) {
      int old = h.order.front();
      h.order.pop_front();
      if (--h.counts[old] == 0) h.counts.erase(old);
    }
  }

  std::optional<int> min_observed(int ue_id) const {
    auto it = hist_.find(ue_id);
    if (it == hist_.end() || it->second.counts.empty()) return std::nullopt;
    return it->second.counts.begin()->first;
  }

  std::map<int, std::size_t> counts(int ue_id) const {
    auto it = hist_.find(ue_id);
    return it == hist_.end() ? std::map<int, std::size_t>{} : it->second.counts;
  }

 private:
  struct PerUe {
    std::deque<int> order;
    std::map<int, std::size_t> counts;
  };
  std::size_t horizon_;
  std::map<int, PerUe> hist_;
};

struct CapChoice {
  int cap = 1;
  bool fell_back = false;  // MIN_OBSERVED with an empty history
};

inline CapChoice choose_cap(const McsHistogram& hist, int ue_id, const CapMode& mode) {
  if (mode.kind == CapMode::Kind::kFixed) return {mode.value, false};
  if (auto m = hist.min_observed(ue_id)) return {*m, false};
  return {1, true};
}

struct JdEvent {
  std::int64_t ts_us = 0;
  int ue_id = 0;
  double bler = 0.0;
  bool detected = false;
  std::optional<int> policy_value;  // cap sent with this event
  bool released = false;
};

class JdXapp {
 public:
  using Logger = std::function<void(const std::string&)>;

  explicit JdXapp(JdConfig cfg, Logger log = {}) : cfg_(std::move(cfg)), log_(std::move(log)) {
    validate(cfg_);
  }

  static std::vector<e2lite::E2Envelope> subscriptions(const std::string& subscriber_id = "jd") {
    return {e2lite::make_subscribe(subscriber_id, std::string(e2lite::style::kTbReport)),
            e2lite::make_subscribe(subscriber_id, std::string(e2lite::style::kMcsAssignment))};
  }

  // Returns the CONTROL envelopes to send in response.
  std::vector<e2lite::E2Envelope> on_envelope(const e2lite::E2Envelope& env) {
    std::vector<e2lite::E2Envelope> out;
    if (const auto* a = std::get_if<e2lite::McsAssignment>(&env.payload)) {
      hist_.add(a->ue_id, a->mcs);
      seen_.emplace(a->ue_id, State{cfg_.n_window});
    } else if (const auto* tb = std::get_if<e2lite::TbReport>(&env.payload)) {
      on_tb(env.ts_us, *tb, out);
    } else if (const auto* rc = std::get_if<e2lite::ControlReceipt>(&env.payload)) {
      if (!rc->accepted) {
        ++rejected_receipts_;
        say("policy " + std::to_string(rc->ref_msg_id) + " rejected: " + rc->reason);
      }
    }
    return out;
  }

  const std::vector<JdEvent>& events() const { return events_; }
  std::uint64_t policies_sent() const { return policies_sent_; }
  std::uint64_t releases_sent() const { return releases_sent_; }
  std::uint64_t rejected_receipts() const { return rejected_receipts_; }
  const McsHistogram& histogram() const { return hist_; }
  const JdConfig& config() const { return cfg_; }

  std::optional<int> active_cap(int ue_id) const {
    auto it = seen_.find(ue_id);
    return it == seen_.end() ? std::nullopt : it->second.cap;
  }

 private:
  struct State {
    explicit State(std::size_t n) : window(n) {}
    BlerWindow window;
    std::optional<int> cap;
    std::optional<std::int64_t> cap_until_us;
    std::size_t since_check = 0;
    int clean_windows = 0;
    bool detected = false;
  };

  void say(const std::string& m) {
    if (log_) log_(m);
  }

  void on_tb(std::int64_t ts_us, const e2lite::TbReport& tb, std::vector<e2lite::E2Envelope>& out) {
    if (tb.direction != e2lite::Direction::kDl) return;
    auto& ue = seen_.emplace(tb.ue_id, State{cfg_.n_window}).first->second;
    if (ue.cap_until_us && ts_us >= *ue.cap_until_us) {
      ue.cap.reset();
      ue.cap_until_us.reset();
    }
    State& st = cfg_.cell_aggregate ? cell_ : ue;
    double bler = update_window(st.window, tb);
    if (!st.window.full()) return;

    bool hit = detect(bler, cfg_.beta);
    bool periodic = ++st.since_check >= cfg_.n_window;
    if (periodic) st.since_check = 0;

    if (cfg_.cell_aggregate) {
      if (hit && !st.detected) {
        for (auto& [id, s] : seen_)
          if (!s.cap) install(ts_us, id, s, bler, out);
        st.cap = 0;
        st.clean_windows = 0;
      } else if (periodic && st.cap) {
        if (advance_release(st, hit)) {
          for (auto& [id, s] : seen_)
            if (s.cap) release(ts_us, id, s, bler, out);
          st.cap.reset();
        }
      }
      if (hit != st.detected || periodic) record(ts_us, -1, bler, hit);
      st.detected = hit;
      return;
    }

    if (hit && !st.cap) {
      install(ts_us, tb.ue_id, st, bler, out);
    } else if (periodic && st.cap && advance_release(st, hit)) {
      release(ts_us, tb.ue_id, st, bler, out);
    } else if (hit != st.detected || periodic) {
      record(ts_us, tb.ue_id, bler, hit);
    }
    st.detected = hit;
  }

  // Counts a clean full window towards release; any dirty window resets.
  bool advance_release(State& st, bool hit) {
    st.clean_windows = hit ? 0 : st.clean_windows + 1;
    return st.clean_windows >= cfg_.release_windows;
  }

  void install(std::int64_t ts_us, int ue_id, State& st, double bler,
               std::vector<e2lite::E2Envelope>& out) {
    auto choice = choose_cap(hist_, ue_id, cfg_.cap_mode);
    if (choice.fell_back) say("no MCS history for ue " + std::to_string(ue_id) + ", capping at 1");
    st.cap = choice.cap;
    if (cfg_.cap_ttl_ms) st.cap_until_us = ts_us + *cfg_.cap_ttl_ms * 1000;
    st.clean_windows = 0;
    st.since_check = 0;
    ++policies_sent_;
    out.push_back(e2lite::make_control(ts_us, e2lite::McsCapPolicy{ue_id, choice.cap, cfg_.cap_ttl_ms}));
    events_.push_back({ts_us, ue_id, bler, true, choice.cap, false});
  }

  void release(std::int64_t ts_us, int ue_id, State& st, double bler,
               std::vector<e2lite::E2Envelope>& out) {
    st.cap.reset();
    st.cap_until_us.reset();
    st.clean_windows = 0;
    ++releases_sent_;
    out.push_back(e2lite::make_control(ts_us, e2lite::McsCapPolicy{ue_id, std::nullopt, std::nullopt}));
    events_.push_back({ts_us, ue_id, bler, false, std::nullopt, true});
  }

  void record(std::int64_t ts_us, int ue_id, double bler, bool hit) {
    events_.push_back({ts_us, ue_id, bler, hit, std::nullopt, false});
  }

  JdConfig cfg_;
  Logger log_;
  McsHistogram hist_;
  std::map<int, State> seen_;
  State cell_{cfg_.n_window};
  std::vector<JdEvent> events_;
  std::uint64_t policies_sent_ = 0;
  std::uint64_t releases_sent_ = 0;
  std::uint64_t rejected_receipts_ = 0;
};

}  // namespace oranlab::jd
