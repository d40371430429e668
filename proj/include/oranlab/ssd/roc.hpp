#pragma once

// Detection and false-alarm probabilities of one SSD run against the
// simulator's ground-truth attack labels.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <optional>
#include <vector>

#include "oranlab/error.hpp"
#include "oranlab/ssd/xapp.hpp"

namespace oranlab::ssd {

struct AttackLabel {
  std::int64_t start_us = 0;
  std::int64_t end_us = 0;
  int base_ta = 0;
};

struct LabeledTrace {
  std::optional<std::vector<AttackLabel>> attacks;  // absent: unlabeled
  std::int64_t start_us = 0;                        // evaluation period
  std::int64_t end_us = 0;
};

struct RocPoint {
  double threshold = 0.0;
  std::optional<double> p_d;  // absent without attacks
  double p_fa = 0.0;
  std::size_t attacks = 0;
  std::size_t detected = 0;
  std::size_t intervals = 0;
  std::size_t false_blocks = 0;
};

// P_d: fraction of attacks whose base TA is under a block at some point
// between the attack start and one interval after its last request.
// P_fa: false block policies per tumbling interval of the evaluation period.
// A block is false when its TA is not within one unit of the base TA of an
// attack in progress, counting an attack as in progress from its start to
// one interval after its last request.
inline RocPoint roc_point(const std::vector<BlockRecord>& blocks, const LabeledTrace& trace,
                          double interval_s, double threshold = 0.0) {
  if (!trace.attacks) throw LabelError("trace carries no attack labels");
  const auto interval_us = static_cast<std::int64_t>(std::llround(interval_s * 1e6));
  if (interval_us <= 0) throw ConfigError("interval must be > 0");
  RocPoint r;
  r.threshold = threshold;
  const auto& attacks = *trace.attacks;

  r.attacks = attacks.size();
  for (const auto& a : attacks) {
    std::int64_t lo = a.start_us, hi = a.end_us + interval_us;
    for (const auto& b : blocks) {
      if (b.ta != a.base_ta) continue;
      if (b.ts_us <= hi && (!b.until_us || *b.until_us > lo)) {
        ++r.detected;
        break;
      }
    }
  }
  if (r.attacks > 0) r.p_d = static_cast<double>(r.detected) / static_cast<double>(r.attacks);

  if (trace.end_us > trace.start_us)
    r.intervals = static_cast<std::size_t>((trace.end_us - trace.start_us) / interval_us);
  for (const auto& b : blocks) {
    if (b.ts_us < trace.start_us || b.ts_us >= trace.end_us) continue;
    bool attacked = false;
    for (const auto& a : attacks) {
      if (std::abs(b.ta - a.base_ta) <= 1 && b.ts_us >= a.start_us &&
          b.ts_us <= a.end_us + interval_us) {
        attacked = true;
        break;
      }
    }
    if (!attacked) ++r.false_blocks;
  }
  if (r.intervals > 0)
    r.p_fa = std::min(1.0, static_cast<double>(r.false_blocks) / static_cast<double>(r.intervals));
  return r;
}

}  // namespace oranlab::ssd
