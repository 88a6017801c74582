#include "sigseek/gp_baseline.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace sigseek {

namespace {

// Rows appended one at a time before falling back to a blocked refactor.
constexpr std::size_t kMaxRowAppends = 64;
// Spare rows reserved after a full refactor.
constexpr std::size_t kSpareRows = 256;
// Posterior variances are floored here so rounding never yields a
// non-positive belief.
constexpr double kVarianceFloor = 1e-12;

}  // namespace

void GPParams::validate() const {
  if (!(length_scale > 0.0)) throw std::invalid_argument("length_scale must be > 0");
  if (!(sigma2_obs > 0.0)) throw std::invalid_argument("sigma2_obs must be > 0");
  if (!(d_min >= 0.0)) throw std::invalid_argument("d_min must be >= 0");
  if (limit_k && *limit_k == 0) throw std::invalid_argument("limit_k must be >= 1");
}

GPModel::GPModel(GPParams params) : params_(params) { params_.validate(); }

double GPModel::kernel(const Location& a, const Location& b) const {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::exp(-(dx * dx + dy * dy) / (2.0 * params_.length_scale * params_.length_scale));
}

bool GPModel::add(const Measurement& m) {
  if (!is_finite(m.location) || !std::isfinite(m.value)) {
    throw std::invalid_argument("gp add: non-finite measurement");
  }
  if (!locations_.empty() && euclidean_distance(m.location, locations_.back()) <= params_.d_min) {
    return false;
  }
  std::lock_guard lock(mutex_);
  locations_.push_back(m.location);
  values_.push_back(m.value);
  whitened_valid_ = false;
  return true;
}

void GPModel::set_prior_mean(double mean) {
  if (!std::isfinite(mean)) throw std::invalid_argument("gp prior mean must be finite");
  std::lock_guard lock(mutex_);
  if (mean != prior_mean_) whitened_valid_ = false;
  prior_mean_ = mean;
}

void GPModel::update_factor() const {
  const std::size_t n = locations_.size();
  const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };

  if (chol_size_ < n) {
    const std::size_t pending = n - chol_size_;
    const bool room = static_cast<std::size_t>(chol_.rows()) >= n;
    if (chol_size_ == 0 || pending > kMaxRowAppends || !room) {
      Eigen::MatrixXd k(idx(n), idx(n));
      for (std::size_t i = 0; i < n; ++i) {
        k(idx(i), idx(i)) = 1.0 + params_.sigma2_obs;
        for (std::size_t j = 0; j < i; ++j) {
          k(idx(i), idx(j)) = k(idx(j), idx(i)) = kernel(locations_[i], locations_[j]);
        }
      }
      Eigen::LLT<Eigen::MatrixXd> llt(k);
      if (llt.info() != Eigen::Success) {
        throw std::runtime_error("gp: kernel matrix is not positive definite");
      }
      chol_.setZero(idx(n + kSpareRows), idx(n + kSpareRows));
      chol_.topLeftCorner(idx(n), idx(n)) = llt.matrixL();
    } else {
      for (std::size_t j = chol_size_; j < n; ++j) {
        Eigen::VectorXd kj(idx(j));
        for (std::size_t i = 0; i < j; ++i) kj[idx(i)] = kernel(locations_[i], locations_[j]);
        const auto lead = chol_.topLeftCorner(idx(j), idx(j));
        const Eigen::VectorXd row = lead.triangularView<Eigen::Lower>().solve(kj);
        const double pivot = 1.0 + params_.sigma2_obs - row.squaredNorm();
        if (!(pivot > 0.0)) throw std::runtime_error("gp: kernel matrix is not positive definite");
        chol_.block(idx(j), 0, 1, idx(j)) = row.transpose();
        chol_(idx(j), idx(j)) = std::sqrt(pivot);
      }
    }
    chol_size_ = n;
    whitened_valid_ = false;
  }
  if (!whitened_valid_) {
    Eigen::VectorXd centered(idx(n));
    for (std::size_t i = 0; i < n; ++i) centered[idx(i)] = values_[i] - prior_mean_;
    whitened_ = chol_.topLeftCorner(idx(n), idx(n)).triangularView<Eigen::Lower>().solve(centered);
    whitened_valid_ = true;
  }
}

GaussianBelief GPModel::predict(const Location& query, std::span<const HypoPoint> hypo) const {
  if (!is_finite(query)) throw std::invalid_argument("gp predict: non-finite query");
  for (const auto& p : hypo) {
    if (!is_finite(p.location) || !std::isfinite(p.value)) {
      throw std::invalid_argument("gp predict: non-finite hypothetical point");
    }
  }
  if (locations_.empty() && hypo.empty()) throw std::logic_error("gp predict: empty model");
  if (params_.limit_k && *params_.limit_k < locations_.size() + hypo.size()) {
    return predict_limited(query, hypo);
  }
  return predict_full(query, hypo);
}

GaussianBelief GPModel::predict_full(const Location& query, std::span<const HypoPoint> hypo) const {
  const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
  std::lock_guard lock(mutex_);
  update_factor();

  const std::size_t n = locations_.size();
  const std::size_t h = hypo.size();
  const auto lower = chol_.topLeftCorner(idx(n), idx(n)).triangularView<Eigen::Lower>();

  Eigen::VectorXd kq(idx(n));
  for (std::size_t i = 0; i < n; ++i) kq[idx(i)] = kernel(locations_[i], query);
  const Eigen::VectorXd v1 = lower.solve(kq);
  double mean = prior_mean_ + v1.dot(whitened_);
  double var = 1.0 - v1.squaredNorm();

  if (h > 0) {
    // Block-extend the factor with the hypothetical points:
    // [L 0; Bᵀ L22] with B = L⁻¹K_nh and L22 L22ᵀ = K_hh + σ²I - BᵀB.
    Eigen::MatrixXd knh(idx(n), idx(h));
    for (std::size_t j = 0; j < h; ++j) {
      for (std::size_t i = 0; i < n; ++i) knh(idx(i), idx(j)) = kernel(locations_[i], hypo[j].location);
    }
    const Eigen::MatrixXd b = lower.solve(knh);
    Eigen::MatrixXd schur(idx(h), idx(h));
    Eigen::VectorXd yh(idx(h));
    Eigen::VectorXd kh(idx(h));
    for (std::size_t i = 0; i < h; ++i) {
      for (std::size_t j = 0; j < h; ++j) {
        schur(idx(i), idx(j)) = kernel(hypo[i].location, hypo[j].location);
      }
      schur(idx(i), idx(i)) += params_.sigma2_obs;
      yh[idx(i)] = hypo[i].value - prior_mean_;
      kh[idx(i)] = kernel(hypo[i].location, query);
    }
    schur.noalias() -= b.transpose() * b;
    Eigen::LLT<Eigen::MatrixXd> llt(schur);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("gp: hypothetical block is not positive definite");
    }
    const Eigen::VectorXd w2 = llt.matrixL().solve(yh - b.transpose() * whitened_);
    const Eigen::VectorXd v2 = llt.matrixL().solve(kh - b.transpose() * v1);
    mean += v2.dot(w2);
    var -= v2.squaredNorm();
  }
  return {mean, std::max(var, kVarianceFloor)};
}

GaussianBelief GPModel::predict_limited(const Location& query,
                                        std::span<const HypoPoint> hypo) const {
  const auto idx = [](std::size_t i) { return static_cast<Eigen::Index>(i); };
  const std::size_t n = locations_.size();
  const std::size_t total = n + hypo.size();
  const std::size_t k = *params_.limit_k;

  auto location_of = [&](std::size_t i) { return i < n ? locations_[i] : hypo[i - n].location; };
  auto value_of = [&](std::size_t i) { return i < n ? values_[i] : hypo[i - n].value; };

  std::vector<std::pair<double, std::size_t>> by_distance(total);
  for (std::size_t i = 0; i < total; ++i) {
    by_distance[i] = {euclidean_distance(location_of(i), query), i};
  }
  std::nth_element(by_distance.begin(), by_distance.begin() + static_cast<std::ptrdiff_t>(k - 1),
                   by_distance.end());
  std::vector<std::size_t> chosen(k);
  for (std::size_t i = 0; i < k; ++i) chosen[i] = by_distance[i].second;
  std::sort(chosen.begin(), chosen.end());

  Eigen::MatrixXd kmat(idx(k), idx(k));
  Eigen::VectorXd centered(idx(k));
  Eigen::VectorXd kq(idx(k));
  for (std::size_t i = 0; i < k; ++i) {
    const Location li = location_of(chosen[i]);
    kmat(idx(i), idx(i)) = 1.0 + params_.sigma2_obs;
    for (std::size_t j = 0; j < i; ++j) {
      kmat(idx(i), idx(j)) = kmat(idx(j), idx(i)) = kernel(li, location_of(chosen[j]));
    }
    centered[idx(i)] = value_of(chosen[i]) - prior_mean_;
    kq[idx(i)] = kernel(li, query);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(kmat);
  if (llt.info() != Eigen::Success) {
    throw std::runtime_error("gp: kernel matrix is not positive definite");
  }
  const Eigen::VectorXd w = llt.matrixL().solve(centered);
  const Eigen::VectorXd v = llt.matrixL().solve(kq);
  return {prior_mean_ + v.dot(w), std::max(1.0 - v.squaredNorm(), kVarianceFloor)};
}

// ---------------------------------------------------------------------------
// GpSignalModel

GpSignalModel::GpSignalModel(GPParams params) : gp_(params) {}

std::string_view GpSignalModel::name() const {
  return gp_.params().limit_k ? "gp_limited" : "gp";
}

void GpSignalModel::add_measurement(const Measurement& m) {
  if (gp_.add(m)) {
    std::lock_guard lock(best_mutex_);
    best_mean_.reset();
    value_sum_ += m.value;
    gp_.set_prior_mean(value_sum_ / static_cast<double>(gp_.size()));
  }
}

void GpSignalModel::update_local(const LocalIRM& irm, const Location&) { irm_ = irm; }

bool GpSignalModel::covers_local(const Location&) const { return true; }

GaussianBelief GpSignalModel::infer(const Location& query, std::span<const HypoPoint> hypo) const {
  return gp_.predict(query, hypo);
}

GaussianBelief GpSignalModel::infer_global(const Location& query) const {
  return gp_.predict(query);
}

double GpSignalModel::best_measured_mean() const {
  if (gp_.size() == 0) throw std::logic_error("best_measured_mean: no measurements");
  std::lock_guard lock(best_mutex_);
  if (best_mean_) return *best_mean_;

  // The posterior maximum over training points sits at one of the highest
  // observations; scoring the top few keeps this O(N²) for either variant.
  const auto values = gp_.values();
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto m = std::min(kBestMeanCandidates, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(m), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return values[a] != values[b] ? values[a] > values[b] : a < b;
                    });
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < m; ++i) {
    best = std::max(best, gp_.predict(gp_.locations()[order[i]]).mean());
  }
  best_mean_ = best;
  return best;
}

void GpSignalModel::write_snapshot_csv(std::ostream& out) const {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "layer,x,y,mean,variance,p_occ\n";
  for (const Location& x : gp_.locations()) {
    const GaussianBelief b = gp_.predict(x);
    out << "global," << x.x << ',' << x.y << ',' << b.mean() << ',' << b.variance() << ",\n";
  }
  if (irm_) {
    for (std::size_t i = 0; i < irm_->size(); ++i) {
      const Location x = irm_->location(i);
      const GaussianBelief b = gp_.predict(x);
      out << "local," << x.x << ',' << x.y << ',' << b.mean() << ',' << b.variance() << ','
          << irm_->p_occ(i) << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace sigseek
