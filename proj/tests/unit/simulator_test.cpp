#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "sigseek/map_io.hpp"
#include "sigseek/simulator.hpp"

namespace sigseek {
namespace {

Environment make_env(const std::string& text, SignalFieldParams field = {}, std::uint64_t seed = 0) {
  std::istringstream in(text);
  MapSpec map = parse_text_map(in);
  return Environment(std::move(map.grid), map.source, map.start, field, seed);
}

OccupancyGrid open_grid(int w, int h) {
  return OccupancyGrid(w, h, 1.0, std::vector<double>(static_cast<std::size_t>(w * h), 0.0));
}

TEST(GroundTruth, ReferenceDistanceAndWall) {
  SignalFieldParams field;
  Environment open = make_env("X....\n....S\n", field);
  // Source is at (0,1); within d0 the path loss is clamped.
  EXPECT_NEAR(ground_truth_snr(open, {0.0, 1.0}), field.p0_db - 10.0 * field.path_loss_exponent *
                                                                   std::log10(field.reference_distance),
              1e-12);
  const double d = 4.0;
  const double free_value = ground_truth_snr(open, {4.0, 1.0});
  EXPECT_NEAR(free_value, field.p0_db - 10.0 * field.path_loss_exponent * std::log10(d), 1e-12);

  Environment walled = make_env("X.#..\n..#.S\n", field);
  EXPECT_NEAR(ground_truth_snr(walled, {4.0, 1.0}), free_value - field.wall_attenuation_db, 1e-12);
  EXPECT_THROW((void)ground_truth_snr(walled, {-3.0, 0.0}), std::out_of_range);
}

TEST(GroundTruth, Extremes) {
  Environment env = make_env("X....\n....S\n");
  EXPECT_DOUBLE_EQ(ground_truth_max(env), ground_truth_snr(env, {0.0, 1.0}));
  EXPECT_DOUBLE_EQ(ground_truth_min(env), ground_truth_snr(env, {4.0, 0.0}));
}

TEST(CountWalls, DistinctCells) {
  std::vector<double> p(25, 0.0);
  p[2] = p[7] = 1.0;  // column x=2, rows 0 and 1
  const OccupancyGrid g(5, 5, 1.0, p);
  EXPECT_EQ(count_walls(g, {0.0, 0.0}, {4.0, 0.0}), 1);
  EXPECT_EQ(count_walls(g, {0.0, 0.0}, {0.0, 4.0}), 0);
  EXPECT_EQ(count_walls(g, {2.0, 0.0}, {2.0, 4.0}), 2);
}

TEST(SampleMeasurement, NoiseFreeIsExact) {
  SignalFieldParams field;
  field.noise_std_db = 0.0;
  Environment env = make_env("X....\n....S\n", field);
  std::mt19937_64 rng(1);
  const Measurement m = sample_measurement(env, {3.0, 0.0}, rng, 7);
  EXPECT_EQ(m.value, ground_truth_snr(env, {3.0, 0.0}));
  EXPECT_EQ(m.time_index, 7u);
}

TEST(SampleMeasurement, SeededAndUnbiased) {
  SignalFieldParams field;
  field.noise_std_db = 2.0;
  Environment env = make_env("X....\n....S\n", field);
  std::mt19937_64 a(9), b(9);
  EXPECT_EQ(sample_measurement(env, {2.0, 0.0}, a, 0).value,
            sample_measurement(env, {2.0, 0.0}, b, 0).value);
  double sum = 0.0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) sum += sample_measurement(env, {2.0, 0.0}, a, 0).value;
  EXPECT_NEAR(sum / n, ground_truth_snr(env, {2.0, 0.0}), 4.0 * field.noise_std_db / 100.0);
}

TEST(ExtractLocalIrm, CenteredAndClipped) {
  Environment env(open_grid(10, 10), {5.0, 5.0}, {5, 5});
  const LocalIRM mid = extract_local_irm(env, {5.0, 5.0}, 3, 3);
  EXPECT_EQ(mid.origin(), (GridCell{4, 4}));
  EXPECT_EQ(mid.size(), 9u);
  EXPECT_EQ(mid.center(), (Location{5.0, 5.0}));
  EXPECT_EQ(mid.edges().size(), 12u);
  EXPECT_TRUE(env.visited({4, 4}));
  EXPECT_FALSE(env.visited({3, 3}));

  const LocalIRM corner = extract_local_irm(env, {0.0, 0.0}, 5, 5);
  EXPECT_EQ(corner.origin(), (GridCell{0, 0}));
  EXPECT_EQ(corner.width(), 3);
  EXPECT_EQ(corner.height(), 3);
  EXPECT_THROW((void)extract_local_irm(env, {-5.0, 0.0}, 3, 3), std::out_of_range);
}

TEST(ExtractFrontiers, FullyVisitedHasNone) {
  Environment env(open_grid(4, 4), {1.0, 1.0}, {0, 0});
  EXPECT_THROW((void)extract_frontiers(env, {0.0, 0.0}, 1.0), std::logic_error);
  (void)extract_local_irm(env, {1.0, 1.0}, 9, 9);
  EXPECT_EQ(extract_frontiers(env, {0.0, 0.0}, 1.0).frontiers.size(), 0u);
}

TEST(ExtractFrontiers, HalfVisitedRoom) {
  Environment env(open_grid(8, 5), {7.0, 2.0}, {0, 2});
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 4; ++x) env.mark_visited({x, y});
  }
  const GlobalIRMView view = extract_frontiers(env, {0.0, 2.0}, 2.0);
  ASSERT_EQ(view.frontiers.size(), 1u);
  EXPECT_EQ(view.frontier_cells[0], (GridCell{3, 2}));
  EXPECT_DOUBLE_EQ(view.frontiers.frontiers[0].path_time_from_robot, 3 * 0.5);
  EXPECT_EQ(view.frontiers.travel_time(0, 0), 0.0);
}

TEST(ExtractFrontiers, TwoSeparateClusters) {
  // Corridor along y=3 with a wall band; explored middle, both ends unknown.
  Environment env = make_env(
      "#######\n"
      "#######\n"
      "#######\n"
      "...S..X\n");
  for (int x = 2; x <= 4; ++x) env.mark_visited({x, 0});
  const GlobalIRMView view = extract_frontiers(env, {3.0, 0.0}, 1.0);
  ASSERT_EQ(view.frontiers.size(), 2u);
  EXPECT_EQ(view.frontier_cells[0], (GridCell{2, 0}));
  EXPECT_EQ(view.frontier_cells[1], (GridCell{4, 0}));
  EXPECT_DOUBLE_EQ(view.frontiers.travel_time(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(view.frontiers.travel_time(1, 0), 2.0);
}

TEST(ShortestPath, AroundWall) {
  Environment env = make_env(
      "X..\n"
      ".#.\n"
      "S#.\n");
  // Start (0,0) to (2,0): must go up and around through the top row.
  const auto path = shortest_path(env, {0, 0}, {2, 0});
  EXPECT_EQ(path.size(), 6u);
  EXPECT_EQ(path.back(), (GridCell{2, 0}));
  EXPECT_TRUE(shortest_path(env, {0, 0}, {0, 0}).empty());
  EXPECT_THROW((void)shortest_path(env, {0, 0}, {1, 1}), std::runtime_error);
  EXPECT_THROW((void)shortest_path(env, {0, 0}, {2, 0}, true), std::runtime_error);
}

TEST(MoveRobot, ElapsedMatchesPathLength) {
  Environment env = make_env(
      "X..\n"
      ".#.\n"
      "S#.\n");
  const MoveResult stay = move_robot(env, {0.0, 0.0}, {0.0, 0.0}, 1.0);
  EXPECT_EQ(stay.elapsed, 0.0);
  EXPECT_DOUBLE_EQ(move_robot(env, {0.0, 0.0}, {0.0, 1.0}, 2.0).elapsed, 0.5);
  const MoveResult around = move_robot(env, {0.0, 0.0}, {2.0, 0.0}, 1.0);
  EXPECT_EQ(around.location, (Location{2.0, 0.0}));
  EXPECT_DOUBLE_EQ(around.elapsed, 6.0);
}

TEST(Environment, Validation) {
  std::vector<double> p(4, 0.0);
  p[0] = 1.0;
  EXPECT_THROW(Environment(OccupancyGrid(2, 2, 1.0, p), {1.0, 1.0}, {0, 0}), std::invalid_argument);
  EXPECT_THROW(Environment(open_grid(2, 2), {9.0, 1.0}, {0, 0}), std::invalid_argument);
  SignalFieldParams f;
  f.noise_std_db = -1.0;
  EXPECT_THROW(f.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace sigseek
