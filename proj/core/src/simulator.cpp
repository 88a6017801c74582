#include "sigseek/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <set>
#include <stdexcept>

namespace sigseek {

void SignalFieldParams::validate() const {
  if (!std::isfinite(p0_db)) throw std::invalid_argument("p0_db must be finite");
  if (!(path_loss_exponent > 0.0)) throw std::invalid_argument("path_loss_exponent must be > 0");
  if (!(reference_distance > 0.0)) throw std::invalid_argument("reference_distance must be > 0");
  if (!(wall_attenuation_db >= 0.0)) throw std::invalid_argument("wall_attenuation_db must be >= 0");
  if (!(noise_std_db >= 0.0)) throw std::invalid_argument("noise_std_db must be >= 0");
}

Environment::Environment(OccupancyGrid grid, Location source, GridCell start,
                         SignalFieldParams field, std::uint64_t seed)
    : grid_(std::move(grid)), source_(source), start_(start), field_(field), seed_(seed),
      visited_(grid_.cell_count(), 0) {
  field_.validate();
  if (!grid_.in_bounds(source_)) throw std::invalid_argument("Environment: source out of bounds");
  if (!grid_.traversable(start_)) {
    throw std::invalid_argument("Environment: start cell must be traversable");
  }
}

void Environment::reset_visited() { std::fill(visited_.begin(), visited_.end(), 0); }

int count_walls(const OccupancyGrid& grid, const Location& from, const Location& to) {
  const double length = euclidean_distance(from, to);
  const double step = 0.5 * grid.pitch();
  const auto samples = static_cast<int>(std::ceil(length / step));
  std::set<std::size_t> walls;
  for (int k = 0; k <= samples; ++k) {
    const double t = samples == 0 ? 0.0 : static_cast<double>(k) / samples;
    const Location p{from.x + t * (to.x - from.x), from.y + t * (to.y - from.y)};
    const GridCell c = grid.cell_at(p);
    if (grid.in_bounds(c) && grid.occupied(c)) walls.insert(grid.index(c));
  }
  return static_cast<int>(walls.size());
}

double ground_truth_snr(const Environment& env, const Location& x) {
  if (!env.grid().in_bounds(x)) throw std::out_of_range("ground_truth_snr: location out of bounds");
  const SignalFieldParams& f = env.field();
  const double d = std::max(euclidean_distance(env.source(), x), f.reference_distance);
  return f.p0_db - 10.0 * f.path_loss_exponent * std::log10(d) -
         f.wall_attenuation_db * count_walls(env.grid(), env.source(), x);
}

namespace {

template <typename Pick>
double ground_truth_extreme(const Environment& env, Pick pick, double init) {
  double out = init;
  const OccupancyGrid& g = env.grid();
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const GridCell c = g.cell(i);
    if (!g.occupied(c)) out = pick(out, ground_truth_snr(env, g.center(c)));
  }
  return out;
}

// BFS distances (in steps) from `from` over cells accepted by `allowed`.
template <typename Allowed>
std::vector<int> bfs_steps(const OccupancyGrid& g, const GridCell& from, Allowed allowed,
                           std::vector<std::size_t>* parent = nullptr) {
  std::vector<int> dist(g.cell_count(), -1);
  if (parent) parent->assign(g.cell_count(), std::numeric_limits<std::size_t>::max());
  std::queue<GridCell> queue;
  dist[g.index(from)] = 0;
  queue.push(from);
  while (!queue.empty()) {
    const GridCell c = queue.front();
    queue.pop();
    for (const GridCell n : g.neighbors4(c)) {
      const auto ni = g.index(n);
      if (dist[ni] >= 0 || !allowed(n)) continue;
      dist[ni] = dist[g.index(c)] + 1;
      if (parent) (*parent)[ni] = g.index(c);
      queue.push(n);
    }
  }
  return dist;
}

}  // namespace

double ground_truth_max(const Environment& env) {
  return ground_truth_extreme(env, [](double a, double b) { return std::max(a, b); },
                              -std::numeric_limits<double>::infinity());
}

double ground_truth_min(const Environment& env) {
  return ground_truth_extreme(env, [](double a, double b) { return std::min(a, b); },
                              std::numeric_limits<double>::infinity());
}

Measurement sample_measurement(const Environment& env, const Location& x, std::mt19937_64& rng,
                               std::uint64_t time_index) {
  const double truth = ground_truth_snr(env, x);
  double noise = 0.0;
  if (env.field().noise_std_db > 0.0) {
    std::normal_distribution<double> dist(0.0, env.field().noise_std_db);
    noise = dist(rng);
  }
  return {x, truth + noise, time_index};
}

LocalIRM extract_local_irm(Environment& env, const Location& robot, int width, int height,
                           std::uint64_t id) {
  const OccupancyGrid& g = env.grid();
  if (!g.in_bounds(robot)) throw std::out_of_range("extract_local_irm: robot out of bounds");
  if (width < 1 || height < 1) throw std::invalid_argument("extract_local_irm: empty window");
  const GridCell r = g.cell_at(robot);

  const int x0 = std::max(0, r.ix - (width - 1) / 2);
  const int y0 = std::max(0, r.iy - (height - 1) / 2);
  const int x1 = std::min(g.width() - 1, r.ix + width / 2);
  const int y1 = std::min(g.height() - 1, r.iy + height / 2);

  std::vector<double> p_occ;
  p_occ.reserve(static_cast<std::size_t>((x1 - x0 + 1) * (y1 - y0 + 1)));
  for (int iy = y0; iy <= y1; ++iy) {
    for (int ix = x0; ix <= x1; ++ix) {
      p_occ.push_back(g.p_occ({ix, iy}));
      env.mark_visited({ix, iy});
    }
  }
  return LocalIRM({x0, y0}, x1 - x0 + 1, y1 - y0 + 1, g.pitch(), std::move(p_occ), id);
}

GlobalIRMView extract_frontiers(const Environment& env, const Location& robot, double speed) {
  const OccupancyGrid& g = env.grid();
  GlobalIRMView view;
  view.visited = env.visited_mask();
  if (std::none_of(view.visited.begin(), view.visited.end(), [](auto v) { return v != 0; })) {
    throw std::logic_error("extract_frontiers: no visited cells");
  }

  auto known_free = [&](const GridCell& c) { return env.visited(c) && !g.occupied(c); };
  std::vector<char> is_frontier(g.cell_count(), 0);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    const GridCell c = g.cell(i);
    if (!known_free(c)) continue;
    for (const GridCell n : g.neighbors4(c)) {
      if (!env.visited(n) && !g.occupied(n)) {
        is_frontier[i] = 1;
        break;
      }
    }
  }

  const GridCell robot_cell = g.cell_at(robot);
  const std::vector<int> from_robot = bfs_steps(g, robot_cell, known_free);
  const double step_time = g.pitch() / speed;

  // 8-connected clusters, scanned row-major.
  std::vector<char> seen(g.cell_count(), 0);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    if (!is_frontier[i] || seen[i]) continue;
    std::vector<GridCell> members;
    std::queue<GridCell> queue;
    queue.push(g.cell(i));
    seen[i] = 1;
    while (!queue.empty()) {
      const GridCell c = queue.front();
      queue.pop();
      members.push_back(c);
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const GridCell n{c.ix + dx, c.iy + dy};
          if (!g.in_bounds(n)) continue;
          const auto ni = g.index(n);
          if (is_frontier[ni] && !seen[ni]) {
            seen[ni] = 1;
            queue.push(n);
          }
        }
      }
    }
    double cx = 0.0, cy = 0.0;
    for (const auto& m : members) {
      cx += m.ix;
      cy += m.iy;
    }
    cx /= static_cast<double>(members.size());
    cy /= static_cast<double>(members.size());
    const GridCell rep = *std::min_element(members.begin(), members.end(),
                                           [&](const GridCell& a, const GridCell& b) {
                                             const double da = std::hypot(a.ix - cx, a.iy - cy);
                                             const double db = std::hypot(b.ix - cx, b.iy - cy);
                                             return da != db ? da < db : g.index(a) < g.index(b);
                                           });
    const int steps = from_robot[g.index(rep)];
    if (steps < 0) continue;
    view.frontier_cells.push_back(rep);
    view.frontiers.frontiers.push_back({g.center(rep), steps * step_time});
  }

  const std::size_t n = view.frontier_cells.size();
  view.frontiers.travel_times.assign(n * n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    const std::vector<int> dist = bfs_steps(g, view.frontier_cells[a], known_free);
    for (std::size_t b = 0; b < n; ++b) {
      const int steps = dist[g.index(view.frontier_cells[b])];
      view.frontiers.travel_times[a * n + b] =
          steps < 0 ? std::numeric_limits<double>::infinity() : steps * step_time;
    }
  }
  return view;
}

std::vector<GridCell> shortest_path(const Environment& env, const GridCell& from,
                                    const GridCell& to, bool visited_only) {
  const OccupancyGrid& g = env.grid();
  if (!g.traversable(from) || !g.traversable(to)) {
    throw std::runtime_error("shortest_path: endpoints must be traversable");
  }
  if (from == to) return {};
  std::vector<std::size_t> parent;
  const auto dist = bfs_steps(
      g, from,
      [&](const GridCell& c) {
        return !g.occupied(c) && (!visited_only || env.visited(c) || c == to);
      },
      &parent);
  if (dist[g.index(to)] < 0) throw std::runtime_error("shortest_path: waypoint unreachable");
  std::vector<GridCell> path;
  for (std::size_t i = g.index(to); i != g.index(from); i = parent[i]) path.push_back(g.cell(i));
  std::reverse(path.begin(), path.end());
  return path;
}

MoveResult move_robot(const Environment& env, const Location& robot, const Location& waypoint,
                      double speed) {
  const OccupancyGrid& g = env.grid();
  if (!g.in_bounds(robot) || !g.in_bounds(waypoint)) {
    throw std::runtime_error("move_robot: location out of bounds");
  }
  const GridCell to = g.cell_at(waypoint);
  const auto path = shortest_path(env, g.cell_at(robot), to);
  return {g.center(to), static_cast<double>(path.size()) * g.pitch() / speed};
}

}  // namespace sigseek
