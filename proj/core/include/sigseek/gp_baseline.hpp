#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "sigseek/signal_model.hpp"

namespace sigseek {

struct GPParams {
  double length_scale = 3.0;
  double sigma2_obs = 0.01;
  double d_min = 0.25;
  /// Use only the limit_k points nearest each query.
  std::optional<std::size_t> limit_k;

  void validate() const;
};

/// Zero-mean (or constant-mean, see set_prior_mean) Gaussian-process
/// regressor with a unit-amplitude squared-exponential kernel.
class GPModel {
 public:
  explicit GPModel(GPParams params = {});

  const GPParams& params() const { return params_; }
  std::size_t size() const { return locations_.size(); }
  std::span<const Location> locations() const { return locations_; }
  std::span<const double> values() const { return values_; }

  double kernel(const Location& a, const Location& b) const;

  /// Appends `m` iff it lies more than d_min from the most recently added
  /// training location. Returns whether it was appended.
  bool add(const Measurement& m);

  /// Constant prior mean; 0 by default.
  void set_prior_mean(double mean);
  double prior_mean() const { return prior_mean_; }

  /// Posterior at `query` with `hypo` appended as temporary training points.
  GaussianBelief predict(const Location& query, std::span<const HypoPoint> hypo = {}) const;

 private:
  GaussianBelief predict_full(const Location& query, std::span<const HypoPoint> hypo) const;
  GaussianBelief predict_limited(const Location& query, std::span<const HypoPoint> hypo) const;
  // Brings chol_ up to date with the training set. Caller holds mutex_.
  void update_factor() const;

  GPParams params_;
  double prior_mean_ = 0.0;
  std::vector<Location> locations_;
  std::vector<double> values_;

  mutable std::mutex mutex_;
  mutable Eigen::MatrixXd chol_;         // lower factor of K + σ²I, leading block valid
  mutable std::size_t chol_size_ = 0;
  mutable Eigen::VectorXd whitened_;     // L⁻¹(y - prior mean)
  mutable bool whitened_valid_ = false;
};

/// SignalModel adapter: subtracts the running mean of the training values
/// and serves both local and global queries from the same regressor. The
/// best measured mean is taken over the kBestMeanCandidates highest
/// observations.
class GpSignalModel final : public SignalModel {
 public:
  explicit GpSignalModel(GPParams params = {});

  std::string_view name() const override;
  const GPModel& model() const { return gp_; }

  void add_measurement(const Measurement& m) override;
  void update_local(const LocalIRM& irm, const Location& robot) override;
  bool covers_local(const Location& query) const override;
  GaussianBelief infer(const Location& query, std::span<const HypoPoint> hypo) const override;
  GaussianBelief infer_global(const Location& query) const override;
  double best_measured_mean() const override;
  void write_snapshot_csv(std::ostream& out) const override;

 private:
  static constexpr std::size_t kBestMeanCandidates = 16;

  GPModel gp_;
  double value_sum_ = 0.0;
  mutable std::mutex best_mutex_;
  mutable std::optional<double> best_mean_;
  std::optional<LocalIRM> irm_;
};

}  // namespace sigseek
