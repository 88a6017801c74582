#include "sigseek/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace sigseek {

OccupancyGrid::OccupancyGrid(int width, int height, double pitch, std::vector<double> p_occ)
    : width_(width), height_(height), pitch_(pitch), p_occ_(std::move(p_occ)) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("OccupancyGrid: empty grid");
  if (!(pitch > 0.0) || !std::isfinite(pitch)) {
    throw std::invalid_argument("OccupancyGrid: pitch must be > 0");
  }
  if (p_occ_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("OccupancyGrid: occupancy size mismatch");
  }
  for (double p : p_occ_) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("OccupancyGrid: p_occ outside [0,1]");
  }
}

bool OccupancyGrid::in_bounds(const Location& p) const {
  if (!is_finite(p)) return false;
  const double half = 0.5 * pitch_;
  return p.x >= -half && p.y >= -half && p.x < (width_ - 0.5) * pitch_ &&
         p.y < (height_ - 0.5) * pitch_;
}

GridCell OccupancyGrid::cell_at(const Location& p) const {
  return {static_cast<int>(std::floor(p.x / pitch_ + 0.5)),
          static_cast<int>(std::floor(p.y / pitch_ + 0.5))};
}

std::vector<GridCell> OccupancyGrid::neighbors4(const GridCell& c) const {
  std::vector<GridCell> out;
  out.reserve(4);
  for (const GridCell n : {GridCell{c.ix + 1, c.iy}, GridCell{c.ix - 1, c.iy},
                           GridCell{c.ix, c.iy + 1}, GridCell{c.ix, c.iy - 1}}) {
    if (in_bounds(n)) out.push_back(n);
  }
  return out;
}

LocalIRM::LocalIRM(GridCell origin, int width, int height, double pitch,
                   std::vector<double> p_occ, std::uint64_t id)
    : origin_(origin), width_(width), height_(height), pitch_(pitch),
      p_occ_(std::move(p_occ)), id_(id) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("LocalIRM: empty window");
  if (!(pitch > 0.0)) throw std::invalid_argument("LocalIRM: pitch must be > 0");
  if (p_occ_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw std::invalid_argument("LocalIRM: occupancy size mismatch");
  }
  for (int r = 0; r < height_; ++r) {
    for (int c = 0; c < width_; ++c) {
      const auto i = static_cast<std::size_t>(r * width_ + c);
      if (c + 1 < width_) edges_.emplace_back(i, i + 1);
      if (r + 1 < height_) edges_.emplace_back(i, i + static_cast<std::size_t>(width_));
    }
  }
}

GridCell LocalIRM::cell(std::size_t node) const {
  if (node >= size()) throw std::out_of_range("LocalIRM: node out of range");
  const int w = width_;
  return {origin_.ix + static_cast<int>(node) % w, origin_.iy + static_cast<int>(node) / w};
}

Location LocalIRM::location(std::size_t node) const {
  const GridCell c = cell(node);
  return {c.ix * pitch_, c.iy * pitch_};
}

std::optional<std::size_t> LocalIRM::node_of(const GridCell& c) const {
  const int col = c.ix - origin_.ix;
  const int row = c.iy - origin_.iy;
  if (col < 0 || row < 0 || col >= width_ || row >= height_) return std::nullopt;
  return static_cast<std::size_t>(row * width_ + col);
}

std::optional<std::size_t> LocalIRM::node_at(const Location& p) const {
  if (!is_finite(p)) return std::nullopt;
  return node_of({static_cast<int>(std::floor(p.x / pitch_ + 0.5)),
                  static_cast<int>(std::floor(p.y / pitch_ + 0.5))});
}

Location LocalIRM::center() const {
  return {(origin_.ix + 0.5 * (width_ - 1)) * pitch_, (origin_.iy + 0.5 * (height_ - 1)) * pitch_};
}

std::vector<std::size_t> LocalIRM::traversable_neighbors(std::size_t node) const {
  std::vector<std::size_t> out;
  if (!traversable(node)) return out;
  const GridCell c = cell(node);
  for (const GridCell n : {GridCell{c.ix + 1, c.iy}, GridCell{c.ix - 1, c.iy},
                           GridCell{c.ix, c.iy + 1}, GridCell{c.ix, c.iy - 1}}) {
    if (auto k = node_of(n); k && traversable(*k)) out.push_back(*k);
  }
  return out;
}

}  // namespace sigseek
