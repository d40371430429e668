#pragma once

// Synthetic link-level model: logistic transport-block success probability
// versus SINR, one threshold per MCS index, and threshold-based link
// adaptation.

#include <cmath>
#include <functional>
#include <optional>
#include <string>

#include "oranlab/error.hpp"

namespace oranlab::ransim {

struct LinkModelParams {
  double theta0_db = -2.0;   // 50% success point of MCS 0
  double step_db = 1.0;      // threshold increase per MCS index
  double slope_per_db = 2.0; // logistic steepness k
  int mcs_max = 27;
  double bler_target = 0.1;
};

struct LinkState {
  int ue_id = 0;
  double path_loss_db = 45.0;
  int current_mcs = 0;
  double reported_sinr_db = 0.0;
};

inline double mcs_threshold_db(int mcs, const LinkModelParams& p) {
  return p.theta0_db + p.step_db * mcs;
}

// Success probability of one transport block:
//   p = 1 / (1 + exp(k * (theta(mcs) - sinr)))
inline double tb_outcome(double effective_sinr_db, int mcs, const LinkModelParams& p) {
  if (mcs < 0 || mcs > p.mcs_max)
    throw ConfigError("mcs " + std::to_string(mcs) + " outside [0, " +
                      std::to_string(p.mcs_max) + "]");
  double x = p.slope_per_db * (mcs_threshold_db(mcs, p) - effective_sinr_db);
  if (x > 700.0) return 0.0;
  return 1.0 / (1.0 + std::exp(x));
}

inline double predicted_bler(double sinr_db, int mcs, const LinkModelParams& p) {
  return 1.0 - tb_outcome(sinr_db, mcs, p);
}

// Highest MCS in [0, mcs_max] whose predicted BLER does not exceed the
// target; MCS 0 when none qualifies. The optional cap clamps the result.
inline int select_mcs(const std::function<double(int)>& bler_at, double target, int mcs_max,
                      std::optional<int> cap = std::nullopt) {
  int chosen = 0;
  for (int m = 0; m <= mcs_max; ++m) {
    if (bler_at(m) <= target) chosen = m;
  }
  if (cap) chosen = std::min(chosen, std::max(0, *cap));
  return chosen;
}

inline int adapt_mcs(const LinkState& link, const LinkModelParams& p,
                     std::optional<int> cap = std::nullopt) {
  return select_mcs([&](int m) { return predicted_bler(link.reported_sinr_db, m, p); },
                    p.bler_target, p.mcs_max, cap);
}

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// SINR in dB of a signal `snr_db` above noise with an interferer whose
// signal-to-jamming ratio is `sjr_db`.
inline double effective_sinr_db(double snr_db, std::optional<double> sjr_db) {
  if (!sjr_db) return snr_db;
  return -linear_to_db(db_to_linear(-snr_db) + db_to_linear(-*sjr_db));
}

}  // namespace oranlab::ransim
