#pragma once

// Random-access traffic: legitimate devices arrive as Poisson processes,
// attackers launch Poisson-timed bursts of connection-establish requests.
// Every request carries the device's Timing Advance, which jitters around a
// base value.

#include <cstdint>
#include <queue>
#include <random>
#include <vector>

#include "oranlab/ransim/config.hpp"

namespace oranlab::ransim {

// Maps a uniform draw in [0,1) to base_ta - 1, base_ta or base_ta + 1.
inline int ta_of(const AccessDevice& device, double draw) {
  const auto& j = device.jitter;
  int ta = device.base_ta;
  if (draw < j.p_minus)
    ta -= 1;
  else if (draw >= j.p_minus + j.p_zero)
    ta += 1;
  return ta < 0 ? 0 : ta;
}

struct AccessRequest {
  std::int64_t ts_us = 0;
  int ue_id = 0;
  int ta = 0;
  bool attacker = false;
};

// Ground-truth label of one attack burst.
struct AttackWindow {
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;  // timestamp of the last request of the burst
  int ue_id = 0;
  int base_ta = 0;
};

class AccessGenerator {
 public:
  AccessGenerator(const AccessConfig& cfg, std::uint64_t seed) : cfg_(cfg) {
    std::seed_seq seq{seed, std::uint64_t{0xacce55}};
    rng_.seed(seq);
    const auto& t = cfg_.traffic;
    for (std::size_t i = 0; i < cfg_.devices.size(); ++i) {
      const auto& d = cfg_.devices[i];
      if (d.attacker) {
        if (t.attacks_per_hour > 0 && t.burst_len > 0) {
          auto first = static_cast<std::int64_t>(t.attack_start_s * 1e6);
          schedule_attack(i, first);
        }
      } else if (t.legit_rate_per_min > 0) {
        push({exp_gap_us(t.legit_rate_per_min / 60e6), i, Kind::kLegit});
      }
    }
  }

  // Emits every request with ts_us < until_us, in timestamp order.
  template <class Fn>
  void generate_until(std::int64_t until_us, Fn&& on_request) {
    while (!pending_.empty() && pending_.top().ts_us < until_us) {
      Pending ev = pending_.top();
      pending_.pop();
      const auto& d = cfg_.devices[ev.device];
      const auto& t = cfg_.traffic;
      switch (ev.kind) {
        case Kind::kLegit:
          push({ev.ts_us + exp_gap_us(t.legit_rate_per_min / 60e6), ev.device, Kind::kLegit});
          break;
        case Kind::kAttackStart: {
          auto gap = static_cast<std::int64_t>(t.burst_interval_s * 1e6);
          attacks_.push_back({ev.ts_us, ev.ts_us + gap * (t.burst_len - 1), d.ue_id, d.base_ta});
          for (int k = 1; k < t.burst_len; ++k)
            push({ev.ts_us + gap * k, ev.device, Kind::kBurst});
          schedule_attack(ev.device, ev.ts_us);
          break;
        }
        case Kind::kBurst:
          break;
      }
      on_request(AccessRequest{ev.ts_us, d.ue_id, ta_of(d, uniform_(rng_)), d.attacker});
    }
  }

  std::int64_t next_ts_us() const {
    return pending_.empty() ? INT64_MAX : pending_.top().ts_us;
  }

  const std::vector<AttackWindow>& attacks() const { return attacks_; }

 private:
  enum class Kind { kLegit, kAttackStart, kBurst };
  struct Pending {
    std::int64_t ts_us;
    std::size_t device;
    Kind kind;
    std::uint64_t order = 0;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      if (a.ts_us != b.ts_us) return a.ts_us > b.ts_us;
      return a.order > b.order;
    }
  };

  void push(Pending p) {
    p.order = order_++;
    pending_.push(p);
  }

  std::int64_t exp_gap_us(double rate_per_us) {
    std::exponential_distribution<double> e(rate_per_us);
    auto gap = static_cast<std::int64_t>(e(rng_));
    return gap < 1 ? 1 : gap;
  }

  void schedule_attack(std::size_t device, std::int64_t after_us) {
    push({after_us + exp_gap_us(cfg_.traffic.attacks_per_hour / 3600e6), device,
          Kind::kAttackStart});
  }

  AccessConfig cfg_;
  std::mt19937_64 rng_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::priority_queue<Pending, std::vector<Pending>, Later> pending_;
  std::uint64_t order_ = 0;
  std::vector<AttackWindow> attacks_;
};

}  // namespace oranlab::ransim
