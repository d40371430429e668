#pragma once

// Newline-delimited text codec for E2-lite envelopes. One envelope is one
// JSON object on one line:
//   {"msg_id":7,"service":"REPORT","style":"tb_report","ts_us":12000,
//    "payload":{"ue_id":1,"slot":12,"mcs":9,"ack":true,"direction":"DL"}}

#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include <json.hpp>

#include "oranlab/e2lite/envelope.hpp"
#include "oranlab/error.hpp"

namespace oranlab::e2lite {

namespace detail {

using Json = nlohmann::ordered_json;

template <class Int>
Int get_int(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing field '") + key + "'");
  if (!it->is_number_integer())
    throw ParseError(std::string("field '") + key + "' is not an integer");
  if (it->is_number_unsigned()) {
    auto v = it->get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))
      throw ParseError(std::string("field '") + key + "' out of range");
    return static_cast<Int>(v);
  }
  auto v = it->get<std::int64_t>();
  if constexpr (std::is_unsigned_v<Int>) {
    if (v < 0) throw ParseError(std::string("field '") + key + "' is negative");
    return static_cast<Int>(v);
  } else {
    if (v < std::numeric_limits<Int>::min() || v > std::numeric_limits<Int>::max())
      throw ParseError(std::string("field '") + key + "' out of range");
    return static_cast<Int>(v);
  }
}

template <class Int>
std::optional<Int> get_opt_int(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  return get_int<Int>(obj, key);
}

inline bool get_bool(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_boolean())
    throw ParseError(std::string("field '") + key + "' missing or not a boolean");
  return it->get<bool>();
}

inline std::string get_string(const Json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string())
    throw ParseError(std::string("field '") + key + "' missing or not a string");
  return it->get<std::string>();
}

inline std::vector<std::int32_t> get_int_list(const Json& arr, const char* key) {
  if (!arr.is_array()) throw ParseError(std::string("field '") + key + "' is not a list");
  std::vector<std::int32_t> out;
  out.reserve(arr.size());
  for (const auto& v : arr) {
    if (!v.is_number_integer()) throw ParseError(std::string("non-integer in '") + key + "'");
    auto x = v.get<std::int64_t>();
    if (x < std::numeric_limits<std::int32_t>::min() ||
        x > std::numeric_limits<std::int32_t>::max())
      throw ParseError(std::string("value out of range in '") + key + "'");
    out.push_back(static_cast<std::int32_t>(x));
  }
  return out;
}

template <class T>
const T& expect(const Payload& p, const E2Envelope& e) {
  if (auto* v = std::get_if<T>(&p)) return *v;
  throw EncodeError("payload does not match service " +
                    std::string(to_string(e.service)) + " / style '" + e.style + "'");
}

inline Json encode_payload(const E2Envelope& e) {
  Json p = Json::object();
  switch (e.service) {
    case Service::kReport:
      if (e.style == style::kTbReport) {
        const auto& r = expect<TbReport>(e.payload, e);
        p["ue_id"] = r.ue_id;
        p["slot"] = r.slot;
        p["mcs"] = r.mcs;
        p["ack"] = r.ack;
        p["direction"] = r.direction == Direction::kDl ? "DL" : "UL";
      } else if (e.style == style::kMcsAssignment) {
        const auto& r = expect<McsAssignment>(e.payload, e);
        p["ue_id"] = r.ue_id;
        p["slot"] = r.slot;
        p["mcs"] = r.mcs;
      } else if (e.style == style::kRarEvent) {
        const auto& r = expect<RarEvent>(e.payload, e);
        p["ue_id"] = r.ue_id;
        p["ts_us"] = r.ts_us;
        p["ta"] = r.ta;
      } else if (e.style == style::kControlReceipt) {
        const auto& r = expect<ControlReceipt>(e.payload, e);
        p["ref_msg_id"] = r.ref_msg_id;
        p["accepted"] = r.accepted;
        p["reason"] = r.reason;
      } else {
        throw EncodeError("unknown report style '" + e.style + "'");
      }
      break;
    case Service::kControl:
      if (e.style == style::kMcsCapPolicy) {
        const auto& r = expect<McsCapPolicy>(e.payload, e);
        p["ue_id"] = r.ue_id;
        p["cap"] = r.cap ? Json(*r.cap) : Json(nullptr);
        p["ttl_ms"] = r.ttl_ms ? Json(*r.ttl_ms) : Json(nullptr);
      } else if (e.style == style::kTaRejectPolicy) {
        const auto& r = expect<TaRejectPolicy>(e.payload, e);
        p["tas"] = r.tas;
        p["ttl_ms"] = r.ttl_ms ? Json(*r.ttl_ms) : Json(nullptr);
      } else {
        throw EncodeError("unknown control style '" + e.style + "'");
      }
      break;
    case Service::kSubscribe: {
      const auto& r = expect<SubscriptionRequest>(e.payload, e);
      p["subscriber_id"] = r.subscriber_id;
      p["ue_filter"] = r.ue_filter ? Json(*r.ue_filter) : Json(nullptr);
      break;
    }
    case Service::kSubscribeAck:
      p["subscriber_id"] = expect<SubscriptionAck>(e.payload, e).subscriber_id;
      break;
    case Service::kError: {
      const auto& r = expect<ErrorInfo>(e.payload, e);
      p["code"] = r.code;
      p["reason"] = r.reason;
      break;
    }
    case Service::kInsert:
    case Service::kPolicy:
    case Service::kQuery:
      throw EncodeError("service " + std::string(to_string(e.service)) +
                        " is reserved");
  }
  return p;
}

inline Payload decode_payload(Service service, const std::string& st, const Json& p) {
  if (!p.is_object()) throw ParseError("payload is not an object");
  switch (service) {
    case Service::kReport:
      if (st == style::kTbReport) {
        auto dir = get_string(p, "direction");
        if (dir != "DL" && dir != "UL") throw ParseError("bad direction '" + dir + "'");
        return TbReport{get_int<std::int32_t>(p, "ue_id"), get_int<std::int64_t>(p, "slot"),
                        get_int<std::int32_t>(p, "mcs"), get_bool(p, "ack"),
                        dir == "DL" ? Direction::kDl : Direction::kUl};
      }
      if (st == style::kMcsAssignment)
        return McsAssignment{get_int<std::int32_t>(p, "ue_id"),
                             get_int<std::int64_t>(p, "slot"),
                             get_int<std::int32_t>(p, "mcs")};
      if (st == style::kRarEvent)
        return RarEvent{get_int<std::int32_t>(p, "ue_id"), get_int<std::int64_t>(p, "ts_us"),
                        get_int<std::int32_t>(p, "ta")};
      if (st == style::kControlReceipt)
        return ControlReceipt{get_int<std::uint64_t>(p, "ref_msg_id"),
                              get_bool(p, "accepted"), get_string(p, "reason")};
      throw UnknownStyle(st);
    case Service::kControl:
      if (st == style::kMcsCapPolicy)
        return McsCapPolicy{get_int<std::int32_t>(p, "ue_id"),
                            get_opt_int<std::int32_t>(p, "cap"),
                            get_opt_int<std::int64_t>(p, "ttl_ms")};
      if (st == style::kTaRejectPolicy) {
        auto it = p.find("tas");
        if (it == p.end()) throw ParseError("missing field 'tas'");
        return TaRejectPolicy{get_int_list(*it, "tas"), get_opt_int<std::int64_t>(p, "ttl_ms")};
      }
      throw UnknownStyle(st);
    case Service::kSubscribe: {
      SubscriptionRequest r{get_string(p, "subscriber_id"), std::nullopt};
      if (auto it = p.find("ue_filter"); it != p.end() && !it->is_null())
        r.ue_filter = get_int_list(*it, "ue_filter");
      return r;
    }
    case Service::kSubscribeAck:
      return SubscriptionAck{get_string(p, "subscriber_id")};
    case Service::kError:
      return ErrorInfo{get_string(p, "code"), get_string(p, "reason")};
    case Service::kInsert:
    case Service::kPolicy:
    case Service::kQuery:
      break;
  }
  throw ParseError("service " + std::string(to_string(service)) + " is reserved");
}

}  // namespace detail

// Serializes one envelope as a single newline-terminated line.
inline std::string encode(const E2Envelope& e) {
  detail::Json j = detail::Json::object();
  j["msg_id"] = e.msg_id;
  j["service"] = std::string(to_string(e.service));
  j["style"] = e.style;
  j["ts_us"] = e.ts_us;
  j["payload"] = detail::encode_payload(e);
  std::string out;
  try {
    out = j.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::strict);
  } catch (const nlohmann::json::exception& ex) {
    throw EncodeError(ex.what());
  }
  out.push_back('\n');
  return out;
}

// Parses one line (trailing '\n' / "\r\n" optional). Throws ParseError for
// malformed text and UnknownStyle for a well-formed envelope whose style the
// codec does not know.
inline E2Envelope decode(std::string_view line) {
  while (!line.empty() && (line.back() == '\n' || line.back() == '\r'))
    line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos)
    throw ParseError("embedded newline");
  detail::Json j;
  try {
    j = detail::Json::parse(line);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(ex.what());
  }
  if (!j.is_object()) throw ParseError("envelope is not an object");
  E2Envelope e;
  try {
    e.msg_id = detail::get_int<std::uint64_t>(j, "msg_id");
    auto service = service_from_string(detail::get_string(j, "service"));
    if (!service) throw ParseError("unknown service '" + j["service"].get<std::string>() + "'");
    e.service = *service;
    e.style = detail::get_string(j, "style");
    e.ts_us = detail::get_int<std::int64_t>(j, "ts_us");
    auto it = j.find("payload");
    if (it == j.end()) throw ParseError("missing field 'payload'");
    e.payload = detail::decode_payload(e.service, e.style, *it);
  } catch (const nlohmann::json::exception& ex) {
    throw ParseError(ex.what());
  }
  return e;
}

}  // namespace oranlab::e2lite
