#pragma once

// (beta, N) calibration from a jam-free ACK/NACK stream and detection
// probability on a jammed one. Windows are non-overlapping (stride N).

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "oranlab/error.hpp"

namespace oranlab::jd {

inline const std::vector<std::size_t>& default_window_grid() {
  static const std::vector<std::size_t> grid{100, 1000, 10000};
  return grid;
}

struct CalibrationPair {
  double beta = 0.0;
  std::size_t n = 0;
  double pfa = 0.0;
  std::size_t windows = 0;
};

// BLER of each complete stride-n window; a trailing partial window is dropped.
inline std::vector<double> window_blers(const std::vector<std::uint8_t>& nacks, std::size_t n) {
  std::vector<double> out;
  if (n == 0) return out;
  for (std::size_t i = 0; i + n <= nacks.size(); i += n) {
    std::size_t s = 0;
    for (std::size_t k = 0; k < n; ++k) s += nacks[i + k] ? 1 : 0;
    out.push_back(static_cast<double>(s) / static_cast<double>(n));
  }
  return out;
}

inline double alarm_rate(const std::vector<double>& blers, double beta) {
  if (blers.empty()) return 0.0;
  std::size_t a = 0;
  for (double b : blers) a += b > beta ? 1 : 0;
  return static_cast<double>(a) / static_cast<double>(blers.size());
}

// Every (beta, N) with measured P_fa <= target_pfa. Beta candidates are the
// distinct window BLERs inside (0, 1).
inline std::vector<CalibrationPair> calibrate(const std::vector<std::uint8_t>& training,
                                              double target_pfa,
                                              const std::vector<std::size_t>& grid =
                                                  default_window_grid()) {
  if (grid.empty()) return {};
  std::size_t largest = *std::max_element(grid.begin(), grid.end());
  if (training.size() < largest)
    throw InsufficientData("training stream has " + std::to_string(training.size()) +
                           " reports, largest window needs " + std::to_string(largest));
  std::vector<CalibrationPair> out;
  for (std::size_t n : grid) {
    auto blers = window_blers(training, n);
    std::set<double> candidates(blers.begin(), blers.end());
    for (double beta : candidates) {
      if (!(beta > 0.0 && beta < 1.0)) continue;
      double pfa = alarm_rate(blers, beta);
      if (pfa <= target_pfa) out.push_back({beta, n, pfa, blers.size()});
    }
  }
  return out;
}

// Lowest calibrated beta for window n, i.e. the most sensitive detector that
// still meets the false-alarm target.
inline std::optional<CalibrationPair> select_beta(const std::vector<CalibrationPair>& pairs,
                                                  std::size_t n) {
  std::optional<CalibrationPair> best;
  for (const auto& p : pairs)
    if (p.n == n && (!best || p.beta < best->beta)) best = p;
  return best;
}

inline double detection_probability(const std::vector<std::uint8_t>& jammed, double beta,
                                    std::size_t n) {
  auto blers = window_blers(jammed, n);
  if (blers.empty())
    throw InsufficientData("jammed trace shorter than one window of " + std::to_string(n));
  return alarm_rate(blers, beta);
}

}  // namespace oranlab::jd
