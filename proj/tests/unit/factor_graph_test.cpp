#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "oracles.hpp"
#include "properties.hpp"
#include "sigseek/factor_graph.hpp"

namespace sigseek {
namespace {

TEST(FactorGraph, ValueIdsAreDense) {
  FactorGraph g;
  EXPECT_EQ(to_index(g.add_value()), 0u);
  EXPECT_EQ(to_index(g.add_value()), 1u);
  for (int i = 0; i < 998; ++i) g.add_value();
  EXPECT_EQ(g.num_values(), 1000u);
}

TEST(FactorGraph, SingleUnary) {
  FactorGraph g;
  const ValueId v = g.add_value();
  g.add_unary({v, 5.0, 0.01});
  const auto s = g.solve();
  EXPECT_DOUBLE_EQ(s.mean(v), 5.0);
  EXPECT_DOUBLE_EQ(s.variance(v), 0.01);
}

TEST(FactorGraph, EqualPrecisionFusion) {
  FactorGraph g;
  const ValueId v = g.add_value();
  g.add_unary({v, 4.0, 1.0});
  g.add_unary({v, 6.0, 1.0});
  const auto s = g.solve();
  EXPECT_NEAR(s.mean(v), 5.0, 1e-12);
  EXPECT_NEAR(s.variance(v), 0.5, 1e-12);
}

TEST(FactorGraph, PrecisionWeightedFusion) {
  FactorGraph g;
  const ValueId v = g.add_value();
  g.add_unary({v, 0.0, 1.0});
  g.add_unary({v, 10.0, 0.25});
  const auto s = g.solve();
  // (0·1 + 10·4) / 5 = 8, 1 / 5 = 0.2
  EXPECT_NEAR(s.mean(v), 8.0, 1e-12);
  EXPECT_NEAR(s.variance(v), 0.2, 1e-12);
}

TEST(FactorGraph, LinkPropagatesAnchor) {
  FactorGraph g;
  const ValueId a = g.add_value(), b = g.add_value();
  g.add_unary({a, 3.0, 0.01});
  g.add_link({a, b, 2.0});
  const auto s = g.solve();
  EXPECT_NEAR(s.mean(b), 3.0, 1e-12);
  EXPECT_NEAR(s.variance(b), s.variance(a) + 2.0, 1e-12);
}

TEST(FactorGraph, ThreeNodeChainMatchesDenseOracle) {
  oracle::DenseGraph dense;
  dense.n = 3;
  dense.unaries = {{0, 1.0, 0.5}, {2, 4.0, 0.1}};
  dense.links = {{0, 1, 0.3}, {1, 2, 0.7}};
  const auto expect = oracle::normal_equations(dense);
  const auto got = props::to_factor_graph(dense).solve();
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_NEAR(got.mean(value_id(i)), expect.mean[i], 1e-12);
    EXPECT_NEAR(got.variance(value_id(i)), expect.variance[i], 1e-12);
  }
}

TEST(FactorGraph, RandomFiftyNodeChain) {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> var(0.05, 1.0), val(-5.0, 5.0);
  oracle::DenseGraph dense;
  dense.n = 50;
  for (std::size_t i = 1; i < 50; ++i) dense.links.push_back({i - 1, i, var(rng)});
  for (std::size_t i = 0; i < 50; i += 7) dense.unaries.push_back({i, val(rng), var(rng)});
  const auto expect = oracle::normal_equations(dense);
  const auto got = props::to_factor_graph(dense).solve();
  for (std::size_t i = 0; i < 50; ++i) {
    EXPECT_NEAR(got.mean(value_id(i)), expect.mean[i], 1e-8);
    EXPECT_NEAR(got.variance(value_id(i)), expect.variance[i], 1e-8);
  }
}

TEST(FactorGraph, RejectsInvalidFactors) {
  FactorGraph g;
  const ValueId a = g.add_value();
  EXPECT_THROW(g.add_unary({value_id(3), 0.0, 1.0}), std::out_of_range);
  EXPECT_THROW(g.add_unary({a, 0.0, 0.0}), std::invalid_argument);
  EXPECT_THROW(g.add_unary({a, 0.0, -1.0}), std::invalid_argument);
  EXPECT_THROW(g.add_link({a, a, 1.0}), std::invalid_argument);
  EXPECT_THROW(g.add_link({a, value_id(1), 1.0}), std::out_of_range);
}

TEST(FactorGraph, UnderconstrainedComponentIsNamed) {
  FactorGraph g;
  const ValueId a = g.add_value(), b = g.add_value(), c = g.add_value(), d = g.add_value();
  g.add_unary({a, 0.0, 1.0});
  g.add_link({a, b, 1.0});
  g.add_link({c, d, 1.0});
  try {
    (void)g.solve();
    FAIL() << "expected UnderconstrainedError";
  } catch (const UnderconstrainedError& e) {
    EXPECT_EQ(e.first_value(), c);
    EXPECT_EQ(e.component_size(), 2u);
  }
}

TEST(FactorGraph, SubsetVariances) {
  FactorGraph g;
  const ValueId a = g.add_value(), b = g.add_value();
  g.add_unary({a, 1.0, 1.0});
  g.add_link({a, b, 1.0});
  const std::vector<ValueId> want{b};
  const auto s = g.solve(want);
  EXPECT_TRUE(s.has_variance(b));
  EXPECT_FALSE(s.has_variance(a));
  EXPECT_THROW((void)s.variance(a), std::logic_error);
  EXPECT_NEAR(s.variance(b), 2.0, 1e-12);
  EXPECT_NEAR(s.mean(a), 1.0, 1e-12);
}

TEST(FactorGraph, PosteriorMemoizesOnDemandVariances) {
  FactorGraph g;
  const ValueId a = g.add_value(), b = g.add_value();
  g.add_unary({a, 2.0, 0.5});
  g.add_link({a, b, 0.25});
  const Posterior p = g.factorize();
  EXPECT_NEAR(p.variance(b), 0.75, 1e-12);
  EXPECT_EQ(p.variance(b), p.variance(b));
  EXPECT_NEAR(p.belief(a).variance(), 0.5, 1e-12);
  EXPECT_NEAR(p.belief(a).mean(), 2.0, 1e-12);
  EXPECT_EQ(p.revision(), g.revision());
}

TEST(FactorGraph, IncrementalNoChangeReturnsPrevious) {
  FactorGraph g;
  const ValueId a = g.add_value();
  g.add_unary({a, 1.0, 1.0});
  const auto s = g.solve();
  const auto again = g.solve_incremental(s);
  EXPECT_EQ(again.mean(a), s.mean(a));
  EXPECT_EQ(again.variance(a), s.variance(a));
  EXPECT_EQ(again.revision(), s.revision());
}

TEST(FactorGraph, IncrementalOneUnaryEqualsFreshSolve) {
  FactorGraph g;
  const ValueId a = g.add_value(), b = g.add_value();
  g.add_unary({a, 1.0, 1.0});
  g.add_link({a, b, 0.5});
  const auto s = g.solve();
  g.add_unary({b, 3.0, 0.2});
  const auto inc = g.solve_incremental(s);
  const auto fresh = g.solve();
  for (ValueId v : {a, b}) {
    EXPECT_NEAR(inc.mean(v), fresh.mean(v), 1e-9);
    EXPECT_NEAR(inc.variance(v), fresh.variance(v), 1e-9);
  }
}

TEST(FactorGraph, HundredSequentialAdditions) {
  std::mt19937_64 rng(100);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  FactorGraph g;
  ValueId last = g.add_value();
  g.add_unary({last, 0.0, 1.0});
  GraphSolution s = g.solve();
  for (int k = 0; k < 100; ++k) {
    if (k % 2 == 0) {
      const ValueId next = g.add_value();
      g.add_link({last, next, u(rng)});
      last = next;
    } else {
      g.add_unary({last, 10.0 * u(rng), u(rng)});
    }
    s = g.solve_incremental(s);
  }
  const auto fresh = g.solve();
  for (std::size_t i = 0; i < g.num_values(); ++i) {
    EXPECT_NEAR(s.mean(value_id(i)), fresh.mean(value_id(i)), 1e-9);
    EXPECT_NEAR(s.variance(value_id(i)), fresh.variance(value_id(i)), 1e-9);
  }
}

TEST(FactorGraph, EdgeListExport) {
  FactorGraph g;
  const ValueId a = g.add_value(), b = g.add_value();
  g.add_unary({a, 1.5, 0.25});
  g.add_link({a, b, 2.0});
  std::ostringstream out;
  g.write_edge_list(out);
  EXPECT_EQ(out.str(), "values 2\nunary 0 1.5 0.25\nlink 0 1 2\n");
}

}  // namespace
}  // namespace sigseek
