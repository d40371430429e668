#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace oranlab::e2lite {

// RIC service classes. INSERT, POLICY and QUERY are reserved: they have a
// wire name but the broker answers them with an ERROR envelope.
enum class Service {
  kReport,
  kInsert,
  kControl,
  kPolicy,
  kQuery,
  kSubscribe,
  kSubscribeAck,
  kError,
};

inline constexpr std::string_view to_string(Service s) {
  switch (s) {
    case Service::kReport: return "REPORT";
    case Service::kInsert: return "INSERT";
    case Service::kControl: return "CONTROL";
    case Service::kPolicy: return "POLICY";
    case Service::kQuery: return "QUERY";
    case Service::kSubscribe: return "SUBSCRIBE";
    case Service::kSubscribeAck: return "SUBSCRIBE_ACK";
    case Service::kError: return "ERROR";
  }
  return "?";
}

inline std::optional<Service> service_from_string(std::string_view s) {
  for (auto v : {Service::kReport, Service::kInsert, Service::kControl,
                 Service::kPolicy, Service::kQuery, Service::kSubscribe,
                 Service::kSubscribeAck, Service::kError}) {
    if (to_string(v) == s) return v;
  }
  return std::nullopt;
}

inline constexpr bool is_reserved(Service s) {
  return s == Service::kInsert || s == Service::kPolicy || s == Service::kQuery;
}

namespace style {
inline constexpr std::string_view kTbReport = "tb_report";
inline constexpr std::string_view kMcsAssignment = "mcs_assignment";
inline constexpr std::string_view kRarEvent = "rar_event";
inline constexpr std::string_view kControlReceipt = "control_receipt";
inline constexpr std::string_view kMcsCapPolicy = "mcs_cap_policy";
inline constexpr std::string_view kTaRejectPolicy = "ta_reject_policy";
// SUBSCRIBE with this style registers the sender as the E2 node.
inline constexpr std::string_view kE2Setup = "e2_setup";
inline constexpr std::string_view kError = "error";
}  // namespace style

inline bool is_report_style(std::string_view s) {
  return s == style::kTbReport || s == style::kMcsAssignment ||
         s == style::kRarEvent || s == style::kControlReceipt;
}

// Report styles an xApp may subscribe to (receipts are routed, not fanned out).
inline bool is_subscribable_style(std::string_view s) {
  return s == style::kTbReport || s == style::kMcsAssignment ||
         s == style::kRarEvent;
}

inline bool is_policy_style(std::string_view s) {
  return s == style::kMcsCapPolicy || s == style::kTaRejectPolicy;
}

enum class Direction { kDl, kUl };

struct TbReport {
  std::int32_t ue_id = 0;
  std::int64_t slot = 0;
  std::int32_t mcs = 0;
  bool ack = true;
  Direction direction = Direction::kDl;
  bool operator==(const TbReport&) const = default;
};

struct McsAssignment {
  std::int32_t ue_id = 0;
  std::int64_t slot = 0;
  std::int32_t mcs = 0;
  bool operator==(const McsAssignment&) const = default;
};

struct RarEvent {
  std::int32_t ue_id = 0;
  std::int64_t ts_us = 0;
  std::int32_t ta = 0;
  bool operator==(const RarEvent&) const = default;
};

// An absent cap releases a previously installed cap.
struct McsCapPolicy {
  std::int32_t ue_id = 0;
  std::optional<std::int32_t> cap;
  std::optional<std::int64_t> ttl_ms;
  bool operator==(const McsCapPolicy&) const = default;
};

struct TaRejectPolicy {
  std::vector<std::int32_t> tas;
  std::optional<std::int64_t> ttl_ms;
  bool operator==(const TaRejectPolicy&) const = default;
};

struct ControlReceipt {
  std::uint64_t ref_msg_id = 0;
  bool accepted = false;
  std::string reason;
  bool operator==(const ControlReceipt&) const = default;
};

struct SubscriptionRequest {
  std::string subscriber_id;
  std::optional<std::vector<std::int32_t>> ue_filter;
  bool operator==(const SubscriptionRequest&) const = default;
};

struct SubscriptionAck {
  std::string subscriber_id;
  bool operator==(const SubscriptionAck&) const = default;
};

struct ErrorInfo {
  std::string code;
  std::string reason;
  bool operator==(const ErrorInfo&) const = default;
};

using Payload =
    std::variant<TbReport, McsAssignment, RarEvent, McsCapPolicy,
                 TaRejectPolicy, ControlReceipt, SubscriptionRequest,
                 SubscriptionAck, ErrorInfo>;

struct E2Envelope {
  std::uint64_t msg_id = 0;
  Service service = Service::kReport;
  std::string style;
  std::int64_t ts_us = 0;
  Payload payload;

  bool operator==(const E2Envelope&) const = default;
};

// Subscription as held by the broker; (subscriber_id, style) is the key.
struct Subscription {
  std::string subscriber_id;
  std::string style;
  std::optional<std::vector<std::int32_t>> ue_filter;
  bool operator==(const Subscription&) const = default;
};

// UE id carried by a report payload, if the payload is UE-scoped.
inline std::optional<std::int32_t> ue_of(const Payload& p) {
  if (auto* tb = std::get_if<TbReport>(&p)) return tb->ue_id;
  if (auto* m = std::get_if<McsAssignment>(&p)) return m->ue_id;
  if (auto* r = std::get_if<RarEvent>(&p)) return r->ue_id;
  if (auto* c = std::get_if<McsCapPolicy>(&p)) return c->ue_id;
  return std::nullopt;
}

inline E2Envelope make_report(std::int64_t ts_us, TbReport r) {
  return {0, Service::kReport, std::string(style::kTbReport), ts_us, r};
}
inline E2Envelope make_report(std::int64_t ts_us, McsAssignment r) {
  return {0, Service::kReport, std::string(style::kMcsAssignment), ts_us, r};
}
inline E2Envelope make_report(std::int64_t ts_us, RarEvent r) {
  return {0, Service::kReport, std::string(style::kRarEvent), ts_us, r};
}
inline E2Envelope make_report(std::int64_t ts_us, ControlReceipt r) {
  return {0, Service::kReport, std::string(style::kControlReceipt), ts_us, std::move(r)};
}
inline E2Envelope make_control(std::int64_t ts_us, McsCapPolicy p) {
  return {0, Service::kControl, std::string(style::kMcsCapPolicy), ts_us, p};
}
inline E2Envelope make_control(std::int64_t ts_us, TaRejectPolicy p) {
  return {0, Service::kControl, std::string(style::kTaRejectPolicy), ts_us,
          std::move(p)};
}
inline E2Envelope make_subscribe(std::string subscriber_id, std::string style,
                                 std::optional<std::vector<std::int32_t>>
                                     ue_filter = std::nullopt) {
  return {0, Service::kSubscribe, std::move(style), 0,
          SubscriptionRequest{std::move(subscriber_id), std::move(ue_filter)}};
}
inline E2Envelope make_error(std::string_view style, std::int64_t ts_us,
                             std::string code, std::string reason) {
  return {0, Service::kError, std::string(style), ts_us,
          ErrorInfo{std::move(code), std::move(reason)}};
}

}  // namespace oranlab::e2lite
