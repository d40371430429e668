#pragma once

// Per-TA KPI profile: mean and standard deviation of connection requests per
// tumbling interval, plus the trailing-window counter used at inference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <map>
#include <optional>
#include <string>

#include <json.hpp>

#include "oranlab/error.hpp"

namespace oranlab::ssd {

struct TaStats {
  double mean = 0.0;
  double std = 0.0;  // population
  std::int64_t samples = 0;

  bool operator==(const TaStats&) const = default;
};

struct KpiProfile {
  double interval_s = 60.0;
  std::map<int, TaStats> tas;

  bool operator==(const KpiProfile&) const = default;

  double combined_mean() const {
    double s = 0.0;
    for (const auto& [ta, st] : tas) s += st.mean;
    return s;
  }
};

enum class UnseenTaMode { kZeroProfile, kIgnore };

struct SsdConfig {
  double gamma = 1.0;
  double std_floor = 0.5;
  double interval_s = 60.0;
  double training_duration_s = 3600.0;
  UnseenTaMode unseen_ta_mode = UnseenTaMode::kZeroProfile;
  std::optional<std::int64_t> block_ttl_ms;  // absent: permanent
};

inline void validate(const SsdConfig& c) {
  if (!std::isfinite(c.gamma)) throw ConfigError("gamma must be finite");
  if (!(c.std_floor > 0)) throw ConfigError("std_floor must be > 0");
  if (!(c.interval_s > 0)) throw ConfigError("interval_s must be > 0");
  if (!(c.training_duration_s >= c.interval_s))
    throw ConfigError("training must cover at least one interval");
  if (c.block_ttl_ms && *c.block_ttl_ms <= 0) throw ConfigError("block ttl must be > 0");
}

inline double anomaly_score(std::int64_t count, int ta, const KpiProfile& profile,
                            const SsdConfig& cfg) {
  auto it = profile.tas.find(ta);
  double mean = 0.0, sd = 0.0;
  if (it != profile.tas.end()) {
    mean = it->second.mean;
    sd = it->second.std;
  } else if (cfg.unseen_ta_mode == UnseenTaMode::kIgnore) {
    return 0.0;
  }
  return (static_cast<double>(count) - mean) / std::max(sd, cfg.std_floor);
}

// Streaming profile training. Time is split into tumbling intervals starting
// at start_us; every TA accumulates one sample per interval, zero counts
// included, also for the intervals before it was first seen.
class ProfileBuilder {
 public:
  explicit ProfileBuilder(double interval_s = 60.0, std::int64_t start_us = 0)
      : interval_us_(static_cast<std::int64_t>(std::llround(interval_s * 1e6))),
        interval_s_(interval_s),
        start_us_(start_us) {
    if (interval_us_ <= 0) throw ConfigError("interval must be > 0");
  }

  void add(std::int64_t ts_us, int ta) {
    if (ts_us < start_us_) return;
    std::int64_t idx = (ts_us - start_us_) / interval_us_;
    if (idx < current_) return;  // out of order; already closed
    close_until(idx);
    auto [it, fresh] = tas_.try_emplace(ta);
    if (fresh) {
      for (std::int64_t i = 0; i < closed_; ++i) it->second.add(0.0);
    }
    ++it->second.count;
    ++events_;
  }

  // Closes every interval that ends at or before end_us and returns the
  // profile. A partial final interval is left out.
  KpiProfile finish(std::int64_t end_us) {
    std::int64_t full = (end_us - start_us_) / interval_us_;
    close_until(full);
    if (events_ == 0 || closed_ == 0) throw EmptyTraining("no connection requests in training");
    KpiProfile p;
    p.interval_s = interval_s_;
    for (const auto& [ta, acc] : tas_) {
      if (acc.n == 0) continue;
      p.tas[ta] = TaStats{acc.mean, std::sqrt(acc.m2 / static_cast<double>(acc.n)), acc.n};
    }
    if (p.tas.empty()) throw EmptyTraining("no complete training interval");
    return p;
  }

  std::int64_t closed_intervals() const { return closed_; }
  std::uint64_t events() const { return events_; }

 private:
  struct Acc {
    std::int64_t count = 0;  // in the open interval
    std::int64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
      ++n;
      double d = x - mean;
      mean += d / static_cast<double>(n);
      m2 += d * (x - mean);
    }
  };

  // Closes intervals [current_, idx).
  void close_until(std::int64_t idx) {
    while (current_ < idx) {
      for (auto& [ta, acc] : tas_) {
        acc.add(static_cast<double>(acc.count));
        acc.count = 0;
      }
      ++current_;
      ++closed_;
    }
  }

  std::int64_t interval_us_;
  double interval_s_;
  std::int64_t start_us_;
  std::int64_t current_ = 0;
  std::int64_t closed_ = 0;
  std::uint64_t events_ = 0;
  std::map<int, Acc> tas_;
};

// Requests per TA with ts in (now - interval, now].
class IntervalCounter {
 public:
  explicit IntervalCounter(double interval_s = 60.0)
      : interval_us_(static_cast<std::int64_t>(std::llround(interval_s * 1e6))) {}

  // Returns the TA's count after inserting the event.
  std::int64_t add(std::int64_t ts_us, int ta) {
    advance(ts_us);
    auto& q = events_[ta];
    q.push_back(ts_us);
    return static_cast<std::int64_t>(q.size());
  }

  void advance(std::int64_t now_us) {
    for (auto it = events_.begin(); it != events_.end();) {
      auto& q = it->second;
      while (!q.empty() && q.front() <= now_us - interval_us_) q.pop_front();
      if (q.empty())
        it = events_.erase(it);
      else
        ++it;
    }
  }

  std::int64_t count(int ta) const {
    auto it = events_.find(ta);
    return it == events_.end() ? 0 : static_cast<std::int64_t>(it->second.size());
  }

  std::map<int, std::int64_t> counts() const {
    std::map<int, std::int64_t> out;
    for (const auto& [ta, q] : events_) out[ta] = static_cast<std::int64_t>(q.size());
    return out;
  }

 private:
  std::int64_t interval_us_;
  std::map<int, std::deque<std::int64_t>> events_;
};

// ---- persistence -------------------------------------------------------------

inline nlohmann::json profile_to_json(const KpiProfile& p) {
  nlohmann::json tas = nlohmann::json::object();
  for (const auto& [ta, s] : p.tas)
    tas[std::to_string(ta)] = {{"mean", s.mean}, {"std", s.std}, {"samples", s.samples}};
  return {{"interval_s", p.interval_s}, {"tas", tas}};
}

inline KpiProfile profile_from_json(const nlohmann::json& j) {
  try {
    KpiProfile p;
    p.interval_s = j.at("interval_s").get<double>();
    for (const auto& [key, v] : j.at("tas").items()) {
      TaStats s{v.at("mean").get<double>(), v.at("std").get<double>(),
                v.at("samples").get<std::int64_t>()};
      if (s.std < 0 || s.mean < 0 || s.samples < 1) throw ConfigError("bad stats for TA " + key);
      p.tas[std::stoi(key)] = s;
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad profile: ") + e.what());
  }
}

inline void save_profile(const KpiProfile& p, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path);
  out << profile_to_json(p).dump(2) << '\n';
}

inline KpiProfile load_profile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  try {
    return profile_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("bad profile: ") + e.what());
  }
}

}  // namespace oranlab::ssd
