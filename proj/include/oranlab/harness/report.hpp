#pragma once

// Machine-readable outputs: report.json, cdf.csv, roc.csv. Every field is
// present in every report; unavailable values are null and an infinite
// percentile is written as the string "inf".

#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "oranlab/harness/runner.hpp"

namespace oranlab::harness {

using nlohmann::ordered_json;

inline ordered_json number_or_null(const std::optional<double>& v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  if (std::isnan(*v)) return nullptr;
  return *v;
}

inline ordered_json report_to_json(const MetricsReport& r) {
  ordered_json cdf = ordered_json::array();
  for (const auto& p : r.cdf) cdf.push_back({number_or_null(p.value), p.fraction});
  ordered_json blocked = r.blocked_tas;
  return {
      {"scenario", r.scenario},
      {"seed", r.seed},
      {"config_hash", r.config_hash},
      {"xapp_enabled", r.xapp_enabled},
      {"duration_s", r.duration_s},
      {"failed", r.failed},
      {"failure", r.failure},
      {"p95_rtt_ms", number_or_null(r.p95_rtt_ms)},
      {"pings", r.pings},
      {"undelivered", r.undelivered},
      {"beta", number_or_null(r.beta)},
      {"n_window", r.n_window},
      {"policies_sent", r.policies_sent},
      {"releases_sent", r.releases_sent},
      {"first_policy_s", number_or_null(r.first_policy_s)},
      {"p_d", number_or_null(r.p_d)},
      {"p_fa", number_or_null(r.p_fa)},
      {"collateral_rejection_rate", number_or_null(r.collateral_rejection_rate)},
      {"attacker_rejection_after_block", number_or_null(r.attacker_rejection_after_block)},
      {"attacks", r.attacks},
      {"legit_requests", r.legit_requests},
      {"attacker_requests", r.attacker_requests},
      {"blocked_tas", blocked},
      {"profile_tas", r.profile_tas ? ordered_json(*r.profile_tas) : ordered_json(nullptr)},
      {"profile_mean_per_interval", number_or_null(r.profile_mean_per_interval)},
      {"broker",
       {{"reports_published", r.broker.reports_published},
        {"reports_delivered", r.broker.reports_delivered},
        {"controls_forwarded", r.broker.controls_forwarded},
        {"errors_sent", r.broker.errors_sent},
        {"dropped_unknown_style", r.broker.dropped_unknown_style},
        {"dropped_malformed", r.broker.dropped_malformed},
        {"overflow_disconnects", r.broker.overflow_disconnects}}},
      {"cdf", cdf},
  };
}

inline ordered_json compare_to_json(const CompareReport& c) {
  return {{"without_xapp", report_to_json(c.without_xapp)},
          {"with_xapp", report_to_json(c.with_xapp)},
          {"reduction_ratio", number_or_null(c.reduction_ratio)}};
}

inline std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

inline constexpr const char* kCdfHeader = "arm,rtt_ms,cdf\n";

// Rows only; prepend kCdfHeader once per file.
inline std::string cdf_rows(const std::string& arm, const std::vector<CdfPoint>& points) {
  std::string out;
  for (const auto& p : points)
    out += arm + "," + format_number(p.value) + "," + format_number(p.fraction) + "\n";
  return out;
}

inline std::string roc_csv(const std::vector<RocRow>& rows) {
  std::string out = "threshold,p_d,p_fa,beta\n";
  for (const auto& r : rows) {
    out += format_number(r.threshold) + ",";
    out += (r.p_d ? format_number(*r.p_d) : std::string()) + ",";
    out += format_number(r.p_fa) + ",";
    out += (r.beta ? format_number(*r.beta) : std::string()) + "\n";
  }
  return out;
}

inline void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path);
  out << text;
}

}  // namespace oranlab::harness
