#pragma once

#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "sigseek/factor_graph.hpp"
#include "sigseek/signal_model.hpp"

namespace sigseek {

struct SignalParams {
  double d_min = 0.25;        // meters between global nodes
  double epsilon = 1e-4;      // variance floor of every link
  double alpha_dist = 0.1;    // link variance per meter
  double alpha_occ = 0.5;     // link variance per unit occupancy, per endpoint
  double sigma2_meas = 0.01;  // measurement variance
  std::size_t k_g = 100;      // global nodes linked into each local graph

  void validate() const;

  double sigma2_dist(const Location& a, const Location& b) const {
    return epsilon + alpha_dist * euclidean_distance(a, b);
  }
  double sigma2_occ(double p_occ) const { return alpha_occ * p_occ; }
};

struct GlobalNode {
  ValueId value;
  Location location;
  std::size_t measurement_count = 0;
};

/// Robot-centered lattice graph: one value per IRM node (ValueId == node
/// index), links between adjacent nodes, unary priors from nearby global
/// nodes.
struct LocalGraph {
  FactorGraph graph;
  std::vector<Location> locations;
  std::vector<double> p_occ;
  std::uint64_t irm_id = 0;
  double pitch = 1.0;
  std::size_t global_factor_count = 0;

  /// Closest lattice value to `p`, ties to the lowest ValueId.
  ValueId closest(const Location& p) const;
  /// Inside the lattice's bounding box grown by half a cell.
  bool contains(const Location& p) const;

  double min_x = 0.0, max_x = 0.0, min_y = 0.0, max_y = 0.0;
};

/// Two-level factor-graph signal belief: a global chain of measurement
/// nodes and a local lattice graph rebuilt for every local IRM, with a
/// posterior cache keyed by hypothetical measurement sets.
class SignalBelief final : public SignalModel {
 public:
  explicit SignalBelief(SignalParams params = {});

  std::string_view name() const override { return "factor_graph"; }
  const SignalParams& params() const { return params_; }

  /// Adds a real measurement to the global chain. A new global node is
  /// created only when the reading is more than d_min from the last node;
  /// otherwise the reading becomes another unary on that node. Clears the
  /// inference cache.
  void add_measurement(const Measurement& m) override;

  /// Builds the local lattice graph for `irm`, replacing any previous one,
  /// and clears the cache.
  const LocalGraph& create_local_graph(const LocalIRM& irm, const Location& robot);
  void update_local(const LocalIRM& irm, const Location& robot) override {
    create_local_graph(irm, robot);
  }

  bool covers_local(const Location& query) const override;
  GaussianBelief infer(const Location& query, std::span<const HypoPoint> hypo) const override;
  GaussianBelief infer_global(const Location& query) const override;
  double best_measured_mean() const override;
  CacheStats cache_stats() const override;
  void write_snapshot_csv(std::ostream& out) const override;

  std::span<const GlobalNode> global_nodes() const { return nodes_; }
  const FactorGraph& global_graph() const { return global_; }
  GaussianBelief global_belief(std::size_t node) const;
  /// Null before the first create_local_graph.
  const LocalGraph* local_graph() const { return local_ ? &*local_ : nullptr; }

 private:
  struct HypoKey {
    std::vector<HypoPoint> points;  // sorted by (x, y, value)
    friend bool operator==(const HypoKey&, const HypoKey&) = default;
  };
  struct HypoKeyHash {
    std::size_t operator()(const HypoKey& key) const;
  };
  using PosteriorPtr = std::shared_ptr<const Posterior>;

  static HypoKey make_key(std::span<const HypoPoint> hypo);
  const Posterior& global_posterior() const;
  PosteriorPtr solve_conditioned(const HypoKey& key) const;
  void clear_cache();

  SignalParams params_;
  FactorGraph global_;
  std::vector<GlobalNode> nodes_;

  std::optional<LocalGraph> local_;
  PosteriorPtr local_base_;  // unconditioned local posterior

  mutable std::mutex global_mutex_;
  mutable std::optional<Posterior> global_posterior_;  // lazily re-solved after additions

  mutable std::mutex mutex_;  // guards cache_ and stats_
  mutable std::unordered_map<HypoKey, PosteriorPtr, HypoKeyHash> cache_;
  mutable CacheStats stats_;
};

}  // namespace sigseek
