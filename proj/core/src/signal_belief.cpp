#include "sigseek/signal_belief.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace sigseek {

namespace {

std::uint64_t mix(std::uint64_t h, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v + 0.0);  // folds -0.0 into 0.0
  h ^= bits + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

}  // namespace

void SignalParams::validate() const {
  if (!(d_min > 0.0)) throw std::invalid_argument("d_min must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (!(alpha_dist > 0.0)) throw std::invalid_argument("alpha_dist must be > 0");
  if (!(alpha_occ > 0.0)) throw std::invalid_argument("alpha_occ must be > 0");
  if (!(sigma2_meas > 0.0)) throw std::invalid_argument("sigma2_meas must be > 0");
  if (k_g < 1) throw std::invalid_argument("k_g must be >= 1");
}

ValueId LocalGraph::closest(const Location& p) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < locations.size(); ++i) {
    const double d = euclidean_distance(p, locations[i]);
    if (d < best_d) {
      best_d = d;
      best = i;
    }
  }
  return value_id(best);
}

bool LocalGraph::contains(const Location& p) const {
  const double half = 0.5 * pitch;
  return is_finite(p) && p.x >= min_x - half && p.x <= max_x + half && p.y >= min_y - half &&
         p.y <= max_y + half;
}

std::size_t SignalBelief::HypoKeyHash::operator()(const HypoKey& key) const {
  std::uint64_t h = key.points.size();
  for (const auto& p : key.points) {
    h = mix(h, p.location.x);
    h = mix(h, p.location.y);
    h = mix(h, p.value);
  }
  return static_cast<std::size_t>(h);
}

SignalBelief::SignalBelief(SignalParams params) : params_(params) { params_.validate(); }

SignalBelief::HypoKey SignalBelief::make_key(std::span<const HypoPoint> hypo) {
  HypoKey key{{hypo.begin(), hypo.end()}};
  for (const auto& p : key.points) {
    if (!is_finite(p.location) || !std::isfinite(p.value)) {
      throw std::invalid_argument("hypothetical measurement must be finite");
    }
  }
  std::sort(key.points.begin(), key.points.end(), [](const HypoPoint& a, const HypoPoint& b) {
    return std::tie(a.location.x, a.location.y, a.value) <
           std::tie(b.location.x, b.location.y, b.value);
  });
  return key;
}

void SignalBelief::clear_cache() {
  std::lock_guard lock(mutex_);
  cache_.clear();
  stats_ = {};
}

void SignalBelief::add_measurement(const Measurement& m) {
  if (!is_finite(m.location) || !std::isfinite(m.value)) {
    throw std::invalid_argument("add_measurement: non-finite measurement");
  }
  if (nodes_.empty() ||
      euclidean_distance(m.location, nodes_.back().location) > params_.d_min) {
    const ValueId v = global_.add_value();
    if (!nodes_.empty()) {
      const GlobalNode& prev = nodes_.back();
      global_.add_link({prev.value, v, params_.sigma2_dist(m.location, prev.location)});
    }
    nodes_.push_back({v, m.location, 0});
  }
  global_.add_unary({nodes_.back().value, m.value, params_.sigma2_meas});
  ++nodes_.back().measurement_count;

  // The chain is re-solved on first use rather than after every reading.
  {
    std::lock_guard lock(global_mutex_);
    global_posterior_.reset();
  }
  clear_cache();
}

const Posterior& SignalBelief::global_posterior() const {
  std::lock_guard lock(global_mutex_);
  if (!global_posterior_) global_posterior_.emplace(global_.factorize());
  return *global_posterior_;
}

GaussianBelief SignalBelief::global_belief(std::size_t node) const {
  return global_posterior().belief(nodes_.at(node).value);
}

const LocalGraph& SignalBelief::create_local_graph(const LocalIRM& irm, const Location& robot) {
  if (irm.size() == 0) throw std::invalid_argument("create_local_graph: empty IRM");

  LocalGraph local;
  local.irm_id = irm.id();
  local.pitch = irm.pitch();
  local.locations.reserve(irm.size());
  local.p_occ.reserve(irm.size());
  for (std::size_t i = 0; i < irm.size(); ++i) {
    local.graph.add_value();
    local.locations.push_back(irm.location(i));
    local.p_occ.push_back(irm.p_occ(i));
  }
  const auto [min_x, max_x] = std::minmax_element(
      local.locations.begin(), local.locations.end(),
      [](const Location& a, const Location& b) { return a.x < b.x; });
  const auto [min_y, max_y] = std::minmax_element(
      local.locations.begin(), local.locations.end(),
      [](const Location& a, const Location& b) { return a.y < b.y; });
  local.min_x = min_x->x;
  local.max_x = max_x->x;
  local.min_y = min_y->y;
  local.max_y = max_y->y;

  for (const auto& [i, j] : irm.edges()) {
    const double variance = params_.sigma2_dist(local.locations[i], local.locations[j]) +
                            params_.sigma2_occ(local.p_occ[i]) +
                            params_.sigma2_occ(local.p_occ[j]);
    local.graph.add_link({value_id(i), value_id(j), variance});
  }

  if (!nodes_.empty()) {
    std::vector<std::size_t> order(nodes_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto k = std::min(params_.k_g, order.size());
    auto nearer = [&](std::size_t a, std::size_t b) {
      const double da = euclidean_distance(nodes_[a].location, robot);
      const double db = euclidean_distance(nodes_[b].location, robot);
      return da != db ? da < db : a < b;
    };
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                      nearer);
    const Posterior& global = global_posterior();
    for (std::size_t n = 0; n < k; ++n) {
      const GlobalNode& node = nodes_[order[n]];
      const ValueId l = local.closest(node.location);
      const GaussianBelief prior = global.belief(node.value);
      local.graph.add_unary(
          {l, prior.mean(),
           prior.variance() + params_.sigma2_dist(local.locations[to_index(l)], node.location)});
      ++local.global_factor_count;
    }
  }

  local_ = std::move(local);
  local_base_.reset();
  try {
    local_base_ = std::make_shared<const Posterior>(local_->graph.factorize());
  } catch (const UnderconstrainedError&) {
    // No global anchor yet; infer() reports the error when asked.
  }
  clear_cache();
  return *local_;
}

bool SignalBelief::covers_local(const Location& query) const {
  return local_ && local_->contains(query);
}

SignalBelief::PosteriorPtr SignalBelief::solve_conditioned(const HypoKey& key) const {
  if (!local_base_) {
    // Surfaces the underconstrained-component error of the bare lattice.
    (void)local_->graph.factorize();
  }
  if (key.points.empty()) return local_base_;

  FactorGraph conditioned = local_->graph;
  for (const auto& p : key.points) {
    const ValueId l = local_->closest(p.location);
    conditioned.add_unary({l, p.value, local_base_->variance(l)});
  }
  return std::make_shared<const Posterior>(conditioned.factorize());
}

GaussianBelief SignalBelief::infer(const Location& query, std::span<const HypoPoint> hypo) const {
  if (!local_) throw std::logic_error("infer: no local graph; call create_local_graph first");
  if (!local_->contains(query)) {
    throw std::out_of_range("infer: query lies outside the local lattice; use infer_global");
  }
  HypoKey key = make_key(hypo);

  PosteriorPtr posterior;
  {
    std::lock_guard lock(mutex_);
    if (auto it = cache_.find(key); it != cache_.end()) {
      ++stats_.hits;
      posterior = it->second;
    } else {
      ++stats_.misses;
    }
  }
  if (!posterior) {
    posterior = solve_conditioned(key);
    std::lock_guard lock(mutex_);
    posterior = cache_.emplace(std::move(key), posterior).first->second;
  }
  return posterior->belief(local_->closest(query));
}

GaussianBelief SignalBelief::infer_global(const Location& query) const {
  if (nodes_.empty()) throw std::logic_error("infer_global: global graph is empty");
  if (!is_finite(query)) throw std::invalid_argument("infer_global: non-finite query");

  std::size_t nearest = 0;
  double nearest_d = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const double d = euclidean_distance(query, nodes_[i].location);
    if (d < nearest_d) {
      nearest_d = d;
      nearest = i;
    }
  }
  // A temporary value hanging off one node by a single link is a leaf: it
  // leaves the rest of the chain unchanged, and its marginal is the node's
  // marginal widened by the link variance.
  const GaussianBelief node = global_belief(nearest);
  return {node.mean(), node.variance() + params_.sigma2_dist(query, nodes_[nearest].location)};
}

double SignalBelief::best_measured_mean() const {
  if (nodes_.empty()) throw std::logic_error("best_measured_mean: no measurements");
  const Posterior& post = global_posterior();
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& node : nodes_) best = std::max(best, post.mean(node.value));
  return best;
}

CacheStats SignalBelief::cache_stats() const {
  std::lock_guard lock(mutex_);
  return stats_;
}

void SignalBelief::write_snapshot_csv(std::ostream& out) const {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "layer,x,y,mean,variance,p_occ\n";
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const GaussianBelief b = global_belief(i);
    out << "global," << nodes_[i].location.x << ',' << nodes_[i].location.y << ',' << b.mean()
        << ',' << b.variance() << ",\n";
  }
  if (local_ && local_base_) {
    for (std::size_t i = 0; i < local_->locations.size(); ++i) {
      const GaussianBelief b = local_base_->belief(value_id(i));
      out << "local," << local_->locations[i].x << ',' << local_->locations[i].y << ','
          << b.mean() << ',' << b.variance() << ',' << local_->p_occ[i] << '\n';
    }
  }
  out.precision(old_precision);
}

}  // namespace sigseek
