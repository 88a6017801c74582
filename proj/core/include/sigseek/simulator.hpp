#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "sigseek/grid.hpp"
#include "sigseek/planner.hpp"

namespace sigseek {

/// Log-distance path loss with per-wall attenuation:
///   SNR(x) = p0 - 10·η·log10(max(d, d0)) - w·N_walls(source → x).
struct SignalFieldParams {
  double p0_db = 60.0;
  double path_loss_exponent = 2.2;
  double reference_distance = 0.5;
  double wall_attenuation_db = 6.0;
  double noise_std_db = 0.1;

  void validate() const;
};

/// Ground-truth world: occupancy grid, signal source, robot start, and the
/// explored-cell mask grown by local IRM extraction.
class Environment {
 public:
  Environment(OccupancyGrid grid, Location source, GridCell start, SignalFieldParams field = {},
              std::uint64_t seed = 0);

  const OccupancyGrid& grid() const { return grid_; }
  const Location& source() const { return source_; }
  GridCell start_cell() const { return start_; }
  Location start() const { return grid_.center(start_); }
  const SignalFieldParams& field() const { return field_; }
  std::uint64_t seed() const { return seed_; }

  bool visited(const GridCell& c) const { return visited_[grid_.index(c)] != 0; }
  void mark_visited(const GridCell& c) { visited_[grid_.index(c)] = 1; }
  const std::vector<std::uint8_t>& visited_mask() const { return visited_; }
  void reset_visited();

 private:
  OccupancyGrid grid_;
  Location source_;
  GridCell start_;
  SignalFieldParams field_;
  std::uint64_t seed_;
  std::vector<std::uint8_t> visited_;
};

/// Throws std::out_of_range when `x` is outside the grid.
double ground_truth_snr(const Environment& env, const Location& x);

/// Number of distinct occupied cells hit by a half-pitch ray march from
/// `from` to `to` (both endpoints sampled).
int count_walls(const OccupancyGrid& grid, const Location& from, const Location& to);

/// Largest ground-truth SNR over traversable cell centers.
double ground_truth_max(const Environment& env);
/// Smallest ground-truth SNR over traversable cell centers.
double ground_truth_min(const Environment& env);

Measurement sample_measurement(const Environment& env, const Location& x, std::mt19937_64& rng,
                               std::uint64_t time_index);

/// width×height window centered on the robot cell, clipped at the world
/// edges. Marks the window cells visited.
LocalIRM extract_local_irm(Environment& env, const Location& robot, int width, int height,
                           std::uint64_t id = 0);

struct GlobalIRMView {
  std::vector<std::uint8_t> visited;
  FrontierSet frontiers;
  /// Grid cell of each frontier representative.
  std::vector<GridCell> frontier_cells;
};

/// Frontier cells are visited traversable cells 4-adjacent to an unvisited
/// traversable cell. They are grouped into 8-connected clusters; each cluster
/// is represented by the member nearest its centroid. Travel times follow
/// shortest paths over visited traversable cells at `speed`; clusters not
/// reachable from the robot are dropped.
GlobalIRMView extract_frontiers(const Environment& env, const Location& robot, double speed);

/// Shortest 4-connected path of traversable cells from `from` to `to`,
/// excluding `from`. With `visited_only`, only visited cells (plus `to`)
/// may be used. Empty when from == to; throws std::runtime_error when
/// unreachable.
std::vector<GridCell> shortest_path(const Environment& env, const GridCell& from,
                                    const GridCell& to, bool visited_only = false);

struct MoveResult {
  Location location;
  double elapsed = 0.0;
};

/// Moves along the shortest traversable path; elapsed = length / speed.
MoveResult move_robot(const Environment& env, const Location& robot, const Location& waypoint,
                      double speed);

}  // namespace sigseek
