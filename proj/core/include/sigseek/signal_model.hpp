#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "sigseek/geometry.hpp"
#include "sigseek/grid.hpp"

namespace sigseek {

/// A planned-but-not-taken measurement used to condition the belief.
struct HypoPoint {
  Location location;
  double value = 0.0;

  friend bool operator==(const HypoPoint&, const HypoPoint&) = default;
};

using HypotheticalSet = std::vector<HypoPoint>;

struct CacheStats {
  std::uint64_t hits = 0;
  std::uint64_t misses = 0;

  friend bool operator==(const CacheStats&, const CacheStats&) = default;
};

/// Belief over the signal field as consumed by the planner. Mutations
/// (add_measurement, update_local) are exclusive; the const inference calls
/// may run concurrently between mutations.
class SignalModel {
 public:
  virtual ~SignalModel() = default;

  virtual std::string_view name() const = 0;

  virtual void add_measurement(const Measurement& m) = 0;
  /// A fresh local IRM is available around `robot`.
  virtual void update_local(const LocalIRM& irm, const Location& robot) = 0;

  /// True when `query` can be answered by infer().
  virtual bool covers_local(const Location& query) const = 0;
  /// Local belief at `query` conditioned on the hypothetical measurements.
  virtual GaussianBelief infer(const Location& query, std::span<const HypoPoint> hypo) const = 0;
  /// Belief anywhere in the world, from the long-range model.
  virtual GaussianBelief infer_global(const Location& query) const = 0;

  /// Highest posterior mean over the locations measured so far.
  virtual double best_measured_mean() const = 0;

  virtual CacheStats cache_stats() const { return {}; }

  /// CSV rows `layer,x,y,mean,variance,p_occ` (header included).
  virtual void write_snapshot_csv(std::ostream& out) const = 0;

  /// Unconditioned prediction at `query`, local when possible.
  GaussianBelief predict(const Location& query) const {
    return covers_local(query) ? infer(query, {}) : infer_global(query);
  }
};

}  // namespace sigseek
