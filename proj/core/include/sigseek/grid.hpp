#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "sigseek/geometry.hpp"

namespace sigseek {

/// Cells with occupancy probability at or above this are walls: not
/// traversable, and counted by the wall-attenuation ray march.
inline constexpr double kOccupiedThreshold = 0.5;

/// Integer cell index; the cell center sits at (ix·pitch, iy·pitch).
struct GridCell {
  int ix = 0;
  int iy = 0;

  friend bool operator==(const GridCell&, const GridCell&) = default;
};

/// Row-major occupancy grid. Row 0 is y = 0.
class OccupancyGrid {
 public:
  OccupancyGrid(int width, int height, double pitch, std::vector<double> p_occ);

  int width() const { return width_; }
  int height() const { return height_; }
  double pitch() const { return pitch_; }
  std::size_t cell_count() const { return p_occ_.size(); }

  bool in_bounds(const GridCell& c) const {
    return c.ix >= 0 && c.iy >= 0 && c.ix < width_ && c.iy < height_;
  }
  bool in_bounds(const Location& p) const;

  std::size_t index(const GridCell& c) const {
    return static_cast<std::size_t>(c.iy) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(c.ix);
  }
  GridCell cell(std::size_t index) const {
    return {static_cast<int>(index % static_cast<std::size_t>(width_)),
            static_cast<int>(index / static_cast<std::size_t>(width_))};
  }

  Location center(const GridCell& c) const { return {c.ix * pitch_, c.iy * pitch_}; }
  /// Cell whose square contains `p`. Caller checks in_bounds.
  GridCell cell_at(const Location& p) const;

  double p_occ(const GridCell& c) const { return p_occ_[index(c)]; }
  bool occupied(const GridCell& c) const { return p_occ(c) >= kOccupiedThreshold; }
  bool traversable(const GridCell& c) const { return in_bounds(c) && !occupied(c); }

  /// In-bounds 4-neighbors in the fixed order +x, -x, +y, -y.
  std::vector<GridCell> neighbors4(const GridCell& c) const;

 private:
  int width_;
  int height_;
  double pitch_;
  std::vector<double> p_occ_;
};

/// Robot-centered lattice window of the occupancy grid. Nodes are indexed
/// row-major inside the window. Every pair of 4-adjacent window cells is a
/// signal edge (occupancy only inflates the link variance); motion is
/// restricted to traversable neighbors.
class LocalIRM {
 public:
  /// `origin` is the grid cell of window node 0.
  LocalIRM(GridCell origin, int width, int height, double pitch, std::vector<double> p_occ,
           std::uint64_t id = 0);

  std::size_t size() const { return p_occ_.size(); }
  int width() const { return width_; }
  int height() const { return height_; }
  double pitch() const { return pitch_; }
  GridCell origin() const { return origin_; }
  std::uint64_t id() const { return id_; }

  GridCell cell(std::size_t node) const;
  Location location(std::size_t node) const;
  double p_occ(std::size_t node) const { return p_occ_.at(node); }
  bool traversable(std::size_t node) const { return p_occ(node) < kOccupiedThreshold; }

  std::optional<std::size_t> node_of(const GridCell& c) const;
  /// Node whose cell contains `p`, if inside the window.
  std::optional<std::size_t> node_at(const Location& p) const;
  Location center() const;

  /// Unordered 4-adjacent pairs (i < j).
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const { return edges_; }
  /// Traversable 4-neighbors of a traversable node, order +x, -x, +y, -y.
  std::vector<std::size_t> traversable_neighbors(std::size_t node) const;

 private:
  GridCell origin_;
  int width_;
  int height_;
  double pitch_;
  std::vector<double> p_occ_;
  std::uint64_t id_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

}  // namespace sigseek
