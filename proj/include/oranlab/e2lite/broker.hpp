#pragma once

// In-process E2-lite broker. Transports (TCP server, harness) own one
// connection per peer and feed inbound envelopes through submit(); outbound
// envelopes queue per connection and are fetched with drain().
//
// Routing:
//   SUBSCRIBE e2_setup         -> sender becomes the E2 node
//   SUBSCRIBE <report style>   -> subscription added (idempotent), ACK
//   REPORT from E2 node        -> fan-out to matching subscribers;
//                                 control_receipt goes back to its originator
//   CONTROL from an xApp       -> forwarded to the E2 node
// Anything else is answered with an ERROR envelope on the sender's queue.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "oranlab/e2lite/envelope.hpp"

namespace oranlab::e2lite {

using ConnectionId = std::uint64_t;

struct BrokerOptions {
  std::size_t queue_capacity = 65536;
};

struct BrokerStats {
  std::uint64_t reports_published = 0;
  std::uint64_t reports_delivered = 0;
  std::uint64_t controls_forwarded = 0;
  std::uint64_t errors_sent = 0;
  std::uint64_t dropped_unknown_style = 0;
  std::uint64_t dropped_malformed = 0;
  std::uint64_t overflow_disconnects = 0;
};

enum class SubmitStatus {
  kOk,
  kRejected,        // an ERROR envelope was queued for the sender
  kDeliveryFailed,  // CONTROL with no E2 node connected
  kClosed,          // sender connection is not open
};

class Broker {
 public:
  // Called (outside the broker lock) whenever a connection's queue gains
  // envelopes or the connection is closed by the broker.
  using Notifier = std::function<void()>;

  explicit Broker(BrokerOptions options = {}) : options_(options) {}

  Broker(const Broker&) = delete;
  Broker& operator=(const Broker&) = delete;

  ConnectionId open(std::string peer_name, Notifier notify = {}) {
    std::lock_guard lock(mu_);
    ConnectionId id = next_conn_++;
    Connection c;
    c.name = std::move(peer_name);
    c.notify = std::move(notify);
    conns_.emplace(id, std::move(c));
    return id;
  }

  void close(ConnectionId id) {
    std::lock_guard lock(mu_);
    close_locked(id);
  }

  bool is_open(ConnectionId id) const {
    std::lock_guard lock(mu_);
    auto it = conns_.find(id);
    return it != conns_.end() && it->second.open;
  }

  std::optional<ConnectionId> e2_node() const {
    std::lock_guard lock(mu_);
    return e2_node_;
  }

  SubmitStatus submit(ConnectionId from, const E2Envelope& env) {
    std::vector<Notifier> wake;
    SubmitStatus status;
    {
      std::lock_guard lock(mu_);
      status = route_locked(from, env, wake);
    }
    for (auto& n : wake) n();
    return status;
  }

  // Transports report lines they could not decode; UnknownStyle drops are
  // counted separately from malformed input.
  void note_dropped(bool unknown_style) {
    std::lock_guard lock(mu_);
    if (unknown_style)
      ++stats_.dropped_unknown_style;
    else
      ++stats_.dropped_malformed;
  }

  // Queues a free-standing ERROR envelope (e.g. for an undecodable line).
  void send_error(ConnectionId to, std::string code, std::string reason) {
    std::vector<Notifier> wake;
    {
      std::lock_guard lock(mu_);
      ++stats_.errors_sent;
      enqueue_locked(to, make_error(style::kError, 0, std::move(code), std::move(reason)), wake);
    }
    for (auto& n : wake) n();
  }

  std::vector<E2Envelope> drain(ConnectionId id,
                                std::size_t max = static_cast<std::size_t>(-1)) {
    std::lock_guard lock(mu_);
    std::vector<E2Envelope> out;
    auto it = conns_.find(id);
    if (it == conns_.end()) return out;
    auto& q = it->second.queue;
    std::size_t n = std::min(max, q.size());
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(std::move(q.front()));
      q.pop_front();
    }
    return out;
  }

  std::size_t pending(ConnectionId id) const {
    std::lock_guard lock(mu_);
    auto it = conns_.find(id);
    return it == conns_.end() ? 0 : it->second.queue.size();
  }

  std::vector<Subscription> subscriptions() const {
    std::lock_guard lock(mu_);
    std::vector<Subscription> out;
    for (const auto& [key, sub] : subs_) out.push_back(sub.sub);
    return out;
  }

  BrokerStats stats() const {
    std::lock_guard lock(mu_);
    return stats_;
  }

 private:
  struct Connection {
    std::string name;
    Notifier notify;
    std::deque<E2Envelope> queue;
    std::uint64_t next_msg_id = 1;
    bool open = true;
  };

  struct SubEntry {
    ConnectionId conn;
    Subscription sub;
  };

  struct PendingControl {
    ConnectionId origin;
    std::uint64_t origin_msg_id;
  };

  // Appends to a connection queue, stamping the per-connection msg_id.
  // Overflow closes the connection with a final ERROR envelope.
  void enqueue_locked(ConnectionId id, E2Envelope env, std::vector<Notifier>& wake) {
    auto it = conns_.find(id);
    if (it == conns_.end() || !it->second.open) return;
    auto& c = it->second;
    if (c.queue.size() >= options_.queue_capacity) {
      E2Envelope err = make_error(env.style, env.ts_us, "QueueOverflow",
                                  "subscriber queue exceeded " +
                                      std::to_string(options_.queue_capacity) +
                                      " envelopes; disconnecting");
      err.msg_id = c.next_msg_id++;
      c.queue.push_back(std::move(err));
      ++stats_.overflow_disconnects;
      ++stats_.errors_sent;
      if (c.notify) wake.push_back(c.notify);
      close_locked(id);
      return;
    }
    env.msg_id = c.next_msg_id++;
    c.queue.push_back(std::move(env));
    if (c.notify) wake.push_back(c.notify);
  }

  void send_error_locked(ConnectionId to, const E2Envelope& cause, std::string code,
                         std::string reason, std::vector<Notifier>& wake) {
    ++stats_.errors_sent;
    enqueue_locked(to, make_error(cause.style, cause.ts_us, std::move(code), std::move(reason)),
                   wake);
  }

  void close_locked(ConnectionId id) {
    auto it = conns_.find(id);
    if (it == conns_.end()) return;
    it->second.open = false;
    for (auto s = subs_.begin(); s != subs_.end();) {
      if (s->second.conn == id)
        s = subs_.erase(s);
      else
        ++s;
    }
    if (e2_node_ == id) e2_node_.reset();
  }

  static bool matches(const Subscription& sub, const E2Envelope& env) {
    if (sub.style != env.style) return false;
    if (!sub.ue_filter) return true;
    auto ue = ue_of(env.payload);
    if (!ue) return true;
    const auto& f = *sub.ue_filter;
    return std::find(f.begin(), f.end(), *ue) != f.end();
  }

  SubmitStatus route_locked(ConnectionId from, const E2Envelope& env,
                            std::vector<Notifier>& wake) {
    auto cit = conns_.find(from);
    if (cit == conns_.end() || !cit->second.open) return SubmitStatus::kClosed;

    switch (env.service) {
      case Service::kSubscribe: {
        const auto* req = std::get_if<SubscriptionRequest>(&env.payload);
        if (!req) {
          send_error_locked(from, env, "BadPayload", "SUBSCRIBE without subscription", wake);
          return SubmitStatus::kRejected;
        }
        if (env.style == style::kE2Setup) {
          e2_node_ = from;
        } else if (is_subscribable_style(env.style)) {
          Subscription sub{req->subscriber_id, env.style, req->ue_filter};
          subs_[{req->subscriber_id, env.style}] = SubEntry{from, std::move(sub)};
        } else {
          send_error_locked(from, env, "UnknownStyle",
                            "cannot subscribe to style '" + env.style + "'", wake);
          return SubmitStatus::kRejected;
        }
        enqueue_locked(from,
                       E2Envelope{0, Service::kSubscribeAck, env.style, env.ts_us,
                                  SubscriptionAck{req->subscriber_id}},
                       wake);
        return SubmitStatus::kOk;
      }

      case Service::kReport: {
        if (e2_node_ != from) {
          send_error_locked(from, env, "DirectionViolation",
                            "REPORT accepted from the E2 node only", wake);
          return SubmitStatus::kRejected;
        }
        if (env.style == style::kControlReceipt) {
          const auto* rc = std::get_if<ControlReceipt>(&env.payload);
          if (!rc) return SubmitStatus::kRejected;
          auto pit = pending_controls_.find(rc->ref_msg_id);
          if (pit == pending_controls_.end()) return SubmitStatus::kRejected;
          ControlReceipt fwd = *rc;
          fwd.ref_msg_id = pit->second.origin_msg_id;
          ConnectionId origin = pit->second.origin;
          pending_controls_.erase(pit);
          enqueue_locked(origin, E2Envelope{0, env.service, env.style, env.ts_us, fwd},
                         wake);
          return SubmitStatus::kOk;
        }
        ++stats_.reports_published;
        // Collected first: an overflowing subscriber is unsubscribed mid-loop.
        std::vector<ConnectionId> targets;
        for (const auto& [key, entry] : subs_)
          if (matches(entry.sub, env)) targets.push_back(entry.conn);
        for (ConnectionId to : targets) {
          ++stats_.reports_delivered;
          enqueue_locked(to, env, wake);
        }
        return SubmitStatus::kOk;
      }

      case Service::kControl: {
        if (e2_node_ == from) {
          send_error_locked(from, env, "DirectionViolation",
                            "CONTROL flows from xApps to the E2 node only", wake);
          return SubmitStatus::kRejected;
        }
        if (!is_policy_style(env.style)) {
          send_error_locked(from, env, "UnknownStyle",
                            "'" + env.style + "' is not a policy style", wake);
          return SubmitStatus::kRejected;
        }
        if (!e2_node_) {
          send_error_locked(from, env, "DeliveryFailed", "no E2 node connected", wake);
          return SubmitStatus::kDeliveryFailed;
        }
        auto& node = conns_.at(*e2_node_);
        std::uint64_t fwd_id = node.next_msg_id;
        bool will_overflow = node.queue.size() >= options_.queue_capacity;
        enqueue_locked(*e2_node_, env, wake);
        if (will_overflow) return SubmitStatus::kDeliveryFailed;
        pending_controls_[fwd_id] = PendingControl{from, env.msg_id};
        ++stats_.controls_forwarded;
        return SubmitStatus::kOk;
      }

      case Service::kSubscribeAck:
      case Service::kError:
        // Peers have nothing to acknowledge towards the broker; ignore.
        return SubmitStatus::kOk;

      case Service::kInsert:
      case Service::kPolicy:
      case Service::kQuery:
        break;
    }
    send_error_locked(from, env, "Unsupported",
                      "service " + std::string(to_string(env.service)) + " is reserved", wake);
    return SubmitStatus::kRejected;
  }

  BrokerOptions options_;
  mutable std::mutex mu_;
  std::map<ConnectionId, Connection> conns_;
  std::map<std::pair<std::string, std::string>, SubEntry> subs_;
  std::map<std::uint64_t, PendingControl> pending_controls_;
  std::optional<ConnectionId> e2_node_;
  ConnectionId next_conn_ = 1;
  BrokerStats stats_;
};

// Convenience wrappers named after the protocol operations.

inline SubmitStatus subscribe(Broker& broker, ConnectionId conn, const Subscription& sub) {
  return broker.submit(conn, make_subscribe(sub.subscriber_id, sub.style, sub.ue_filter));
}

// Forwards a CONTROL envelope to the E2 node. The node's acceptance arrives
// later on `conn` as a control_receipt REPORT referencing env.msg_id.
inline SubmitStatus send_control(Broker& broker, ConnectionId conn, const E2Envelope& env) {
  return broker.submit(conn, env);
}

}  // namespace oranlab::e2lite
