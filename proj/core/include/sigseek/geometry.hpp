#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace sigseek {

/// Planar point in meters. All signal queries live in this domain.
struct Location {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Location&, const Location&) = default;
};

inline bool is_finite(const Location& p) {
  return std::isfinite(p.x) && std::isfinite(p.y);
}

inline double euclidean_distance(const Location& a, const Location& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

/// A single signal reading (SNR, dB) taken at `location`.
struct Measurement {
  Location location;
  double value = 0.0;
  std::uint64_t time_index = 0;
};

/// Mean/variance pair returned by every inference path.
class GaussianBelief {
 public:
  GaussianBelief(double mean, double variance) : mean_(mean), variance_(variance) {
    if (!std::isfinite(mean) || !std::isfinite(variance)) {
      throw std::invalid_argument("GaussianBelief: non-finite mean or variance");
    }
    if (!(variance > 0.0)) {
      throw std::invalid_argument("GaussianBelief: variance must be > 0, got " +
                                  std::to_string(variance));
    }
  }

  double mean() const { return mean_; }
  double variance() const { return variance_; }
  double stddev() const { return std::sqrt(variance_); }

  friend bool operator==(const GaussianBelief&, const GaussianBelief&) = default;

 private:
  double mean_;
  double variance_;
};

/// Elapsed mission time against the time budget, both in seconds.
class MissionClock {
 public:
  explicit MissionClock(double budget) : budget_(budget) {
    if (!(budget >= 0.0) || !std::isfinite(budget)) {
      throw std::invalid_argument("MissionClock: budget must be non-negative");
    }
  }

  double elapsed() const { return t_; }
  double budget() const { return budget_; }
  double remaining() const { return budget_ - t_; }
  bool exhausted() const { return t_ >= budget_; }

  /// Advances the clock. Throws if the advance would overrun the budget.
  void advance(double seconds) {
    if (seconds < 0.0) throw std::invalid_argument("MissionClock: negative advance");
    if (t_ + seconds > budget_ + 1e-9) {
      throw std::logic_error("MissionClock: advance exceeds budget");
    }
    t_ = std::min(t_ + seconds, budget_);
  }

 private:
  double t_ = 0.0;
  double budget_;
};

}  // namespace sigseek
