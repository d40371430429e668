#pragma once

// Sliding BLER over the last N transport blocks.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "oranlab/e2lite/envelope.hpp"
#include "oranlab/error.hpp"

namespace oranlab::jd {

class BlerWindow {
 public:
  explicit BlerWindow(std::size_t capacity = 10000) : buf_(capacity, 0) {
    if (capacity == 0) throw ConfigError("BLER window capacity must be > 0");
  }

  // Records one outcome and returns the mean BLER over the retained blocks.
  double push(bool nack) {
    if (filled_ == buf_.size()) {
      nacks_ -= buf_[head_];
    } else {
      ++filled_;
    }
    buf_[head_] = nack ? 1 : 0;
    nacks_ += buf_[head_];
    head_ = (head_ + 1) % buf_.size();
    return bler();
  }

  double bler() const {
    return filled_ == 0 ? 0.0 : static_cast<double>(nacks_) / static_cast<double>(filled_);
  }

  std::size_t capacity() const { return buf_.size(); }
  std::size_t filled() const { return filled_; }
  std::size_t nack_count() const { return nacks_; }
  bool full() const { return filled_ == buf_.size(); }

  // Oldest first.
  std::vector<bool> retained() const {
    std::vector<bool> out;
    out.reserve(filled_);
    std::size_t start = filled_ == buf_.size() ? head_ : 0;
    for (std::size_t i = 0; i < filled_; ++i) out.push_back(buf_[(start + i) % buf_.size()] != 0);
    return out;
  }

  void clear() {
    std::fill(buf_.begin(), buf_.end(), 0);
    head_ = filled_ = nacks_ = 0;
  }

 private:
  std::vector<std::uint8_t> buf_;
  std::size_t head_ = 0;
  std::size_t filled_ = 0;
  std::size_t nacks_ = 0;
};

// Uplink reports are ignored; the window tracks the jammed downlink.
inline double update_window(BlerWindow& w, const e2lite::TbReport& r) {
  if (r.direction != e2lite::Direction::kDl) return w.bler();
  return w.push(!r.ack);
}

// Strictly above the threshold.
inline bool detect(double bler, double beta) { return bler > beta; }

}  // namespace oranlab::jd
