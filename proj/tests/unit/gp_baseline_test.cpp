#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "sigseek/gp_baseline.hpp"

namespace sigseek {
namespace {

TEST(GPParams, Validation) {
  GPParams p;
  EXPECT_NO_THROW(p.validate());
  p.length_scale = 0.0;
  EXPECT_THROW(GPModel{p}, std::invalid_argument);
  p = {};
  p.limit_k = 0;
  EXPECT_THROW(GPModel{p}, std::invalid_argument);
}

TEST(GPModel, DMinRule) {
  GPModel gp;
  EXPECT_TRUE(gp.add({{0.0, 0.0}, 1.0, 0}));
  EXPECT_FALSE(gp.add({{0.1, 0.0}, 1.0, 1}));
  EXPECT_TRUE(gp.add({{1.0, 0.0}, 1.0, 2}));
  EXPECT_EQ(gp.size(), 2u);
  EXPECT_THROW(gp.add({{NAN, 0.0}, 1.0, 3}), std::invalid_argument);
}

TEST(GPModel, TraceReplayMatchesOracle) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> step(-0.4, 0.4);
  GPModel gp;
  std::vector<Location> trace;
  Location p{0, 0};
  for (int i = 0; i < 300; ++i) {
    p = {p.x + step(rng), p.y + step(rng)};
    trace.push_back(p);
    gp.add({p, 0.0, static_cast<std::uint64_t>(i)});
  }
  EXPECT_EQ(gp.size(), oracle::replay_node_count(trace, 0.25));
}

TEST(GPModel, LonePointClosedForm) {
  GPModel gp;
  const double v = 0.8, s2 = gp.params().sigma2_obs;
  gp.add({{1.0, 2.0}, v, 0});
  const auto b = gp.predict({1.0, 2.0});
  EXPECT_NEAR(b.mean(), v / (1.0 + s2), 1e-14);
  EXPECT_NEAR(b.variance(), 1.0 - 1.0 / (1.0 + s2), 1e-14);
}

TEST(GPModel, FarQueryIsPrior) {
  GPModel gp;
  gp.add({{0.0, 0.0}, 0.8, 0});
  const auto b = gp.predict({1e6, 1e6});
  EXPECT_EQ(b.mean(), 0.0);
  EXPECT_EQ(b.variance(), 1.0);
}

TEST(GPModel, FivePointsMatchDenseOracle) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  GPModel gp;
  std::vector<Location> xs;
  std::vector<double> ys;
  for (int i = 0; i < 5; ++i) {
    xs.push_back({u(rng), u(rng)});
    ys.push_back(u(rng) / 6.0);
    gp.add({xs.back(), ys.back(), static_cast<std::uint64_t>(i)});
  }
  for (int q = 0; q < 10; ++q) {
    const Location query{u(rng), u(rng)};
    const auto got = gp.predict(query);
    const auto [mean, var] = oracle::gp_posterior(xs, ys, gp.params().sigma2_obs,
                                                  gp.params().length_scale, 0.0, query);
    EXPECT_NEAR(got.mean(), mean, 1e-10);
    EXPECT_NEAR(got.variance(), var, 1e-10);
  }
}

TEST(GPModel, EmptyModel) {
  GPModel gp;
  EXPECT_THROW((void)gp.predict({0.0, 0.0}), std::logic_error);
  const HypotheticalSet hypo{{{0.0, 0.0}, 0.5}};
  const auto b = gp.predict({0.0, 0.0}, hypo);
  EXPECT_NEAR(b.mean(), 0.5 / (1.0 + gp.params().sigma2_obs), 1e-14);
}

TEST(GPModel, RowAppendsMatchFullRefactor) {
  // Interleaving predictions with additions exercises the appended-row path.
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 20.0);
  GPModel incremental;
  std::vector<Location> xs;
  std::vector<double> ys;
  for (int i = 0; i < 150; ++i) {
    xs.push_back({u(rng), u(rng)});
    ys.push_back(u(rng) / 20.0);
    incremental.add({xs.back(), ys.back(), static_cast<std::uint64_t>(i)});
    if (i % 3 == 0) (void)incremental.predict({1.0, 1.0});
  }
  const Location q{7.0, 9.0};
  const auto [mean, var] = oracle::gp_posterior(xs, ys, incremental.params().sigma2_obs,
                                                incremental.params().length_scale, 0.0, q);
  EXPECT_NEAR(incremental.predict(q).mean(), mean, 1e-10);
  EXPECT_NEAR(incremental.predict(q).variance(), var, 1e-10);
}

TEST(GPModel, LimitedUsesNearestPoints) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  GPParams p;
  p.limit_k = 6;
  GPModel gp(p);
  std::vector<Location> xs;
  std::vector<double> ys;
  for (int i = 0; i < 40; ++i) {
    xs.push_back({u(rng), u(rng)});
    ys.push_back(u(rng) / 10.0);
    ASSERT_TRUE(gp.add({xs.back(), ys.back(), static_cast<std::uint64_t>(i)}));
  }
  const Location q{5.0, 5.0};
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return euclidean_distance(xs[a], q) < euclidean_distance(xs[b], q);
  });
  order.resize(6);
  std::sort(order.begin(), order.end());
  std::vector<Location> near_x;
  std::vector<double> near_y;
  for (std::size_t i : order) {
    near_x.push_back(xs[i]);
    near_y.push_back(ys[i]);
  }
  const auto [mean, var] = oracle::gp_posterior(near_x, near_y, p.sigma2_obs, p.length_scale, 0.0, q);
  EXPECT_NEAR(gp.predict(q).mean(), mean, 1e-10);
  EXPECT_NEAR(gp.predict(q).variance(), var, 1e-10);
}

TEST(GpSignalModel, RunningMeanPrior) {
  GpSignalModel m;
  m.add_measurement({{0.0, 0.0}, 0.2, 0});
  m.add_measurement({{5.0, 0.0}, 0.6, 1});
  m.add_measurement({{5.1, 0.0}, 100.0, 2});  // rejected by d_min
  EXPECT_EQ(m.model().size(), 2u);
  EXPECT_NEAR(m.model().prior_mean(), 0.4, 1e-15);
  EXPECT_NEAR(m.infer_global({1e4, 1e4}).mean(), 0.4, 1e-15);
  EXPECT_TRUE(m.covers_local({1e4, 1e4}));
  EXPECT_EQ(m.name(), "gp");
}

TEST(GpSignalModel, BestMeasuredMean) {
  GpSignalModel m;
  m.add_measurement({{0.0, 0.0}, 0.2, 0});
  m.add_measurement({{30.0, 0.0}, 0.9, 1});
  const double expect = m.model().predict({30.0, 0.0}).mean();
  EXPECT_DOUBLE_EQ(m.best_measured_mean(), expect);
  GpSignalModel empty;
  EXPECT_THROW((void)empty.best_measured_mean(), std::logic_error);
}

TEST(GpSignalModel, LimitedName) {
  GPParams p;
  p.limit_k = 3;
  EXPECT_EQ(GpSignalModel(p).name(), "gp_limited");
}

TEST(GpSignalModel, Snapshot) {
  GpSignalModel m;
  m.add_measurement({{0.0, 0.0}, 0.2, 0});
  m.update_local(LocalIRM({0, 0}, 2, 1, 1.0, {0.0, 0.3}), {0.0, 0.0});
  std::ostringstream out;
  m.write_snapshot_csv(out);
  const std::string s = out.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 4);
  EXPECT_NE(s.find("local,1,0,"), std::string::npos);
}

}  // namespace
}  // namespace sigseek
