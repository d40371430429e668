#pragma once

// Empirical CDF and nearest-rank percentiles. Undelivered packets enter as
// +infinity and occupy the tail.

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "oranlab/error.hpp"

namespace oranlab::harness {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct CdfPoint {
  double value = 0.0;
  double fraction = 0.0;  // P(X <= value)

  bool operator==(const CdfPoint&) const = default;
};

class Cdf {
 public:
  explicit Cdf(std::vector<double> samples) : sorted_(std::move(samples)) {
    if (sorted_.empty()) throw EmptySamples("CDF of an empty sample");
    std::sort(sorted_.begin(), sorted_.end());
  }

  // Smallest sample x with at least ceil(q * n) samples <= x.
  double percentile(double q) const {
    if (!(q > 0.0 && q <= 1.0)) throw ConfigError("percentile must be in (0, 1]");
    auto n = sorted_.size();
    auto rank = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n) - 1e-12));
    rank = std::clamp<std::size_t>(rank, 1, n);
    return sorted_[rank - 1];
  }

  // One point per distinct value.
  std::vector<CdfPoint> points() const {
    std::vector<CdfPoint> out;
    const double n = static_cast<double>(sorted_.size());
    for (std::size_t i = 0; i < sorted_.size(); ++i) {
      if (i + 1 < sorted_.size() && sorted_[i + 1] == sorted_[i]) continue;
      out.push_back({sorted_[i], static_cast<double>(i + 1) / n});
    }
    return out;
  }

  std::size_t size() const { return sorted_.size(); }
  const std::vector<double>& sorted() const { return sorted_; }

 private:
  std::vector<double> sorted_;
};

inline Cdf cdf(std::vector<double> samples) { return Cdf(std::move(samples)); }

inline double percentile(std::vector<double> samples, double q) {
  return Cdf(std::move(samples)).percentile(q);
}

}  // namespace oranlab::harness
