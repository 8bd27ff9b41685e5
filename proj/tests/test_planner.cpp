#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "mintops/errors.hpp"
#include "mintops/planner.hpp"
#include "oracles.hpp"

using namespace mintops;
using namespace mintops::planner;

namespace {

SemanticMap random_map(std::mt19937& rng, int w, int h, double density) {
  SemanticMap m(w, h);
  std::bernoulli_distribution wall(density);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (wall(rng)) m.set_blocked({x, y}, true);
    }
  }
  return m;
}

std::vector<Coord> random_walk(std::mt19937& rng, std::size_t len) {
  std::uniform_int_distribution<int> step(-1, 1);
  std::vector<Coord> out{{0, 0}};
  while (out.size() < len) out.push_back({out.back().x + step(rng), out.back().y + step(rng)});
  return out;
}

}  // namespace

TEST(PlanPath, StraightLine) {
  SemanticMap m(5, 1);
  const auto t = plan_path(m, {0, 0}, {4, 0});
  ASSERT_TRUE(t);
  EXPECT_EQ(t->cost, 4);
  EXPECT_EQ(t->cells.front(), (Coord{0, 0}));
  EXPECT_EQ(t->cells.back(), (Coord{4, 0}));
}

TEST(PlanPath, StartEqualsGoal) {
  SemanticMap m(3, 3);
  const auto t = plan_path(m, {1, 1}, {1, 1});
  ASSERT_TRUE(t);
  EXPECT_EQ(t->cost, 0);
  EXPECT_EQ(t->cells, (std::vector<Coord>{{1, 1}}));
}

TEST(PlanPath, WalledOffGoalIsNoPath) {
  SemanticMap m(5, 5);
  for (int y = 0; y < 5; ++y) m.set_blocked({2, y}, true);
  EXPECT_FALSE(plan_path(m, {0, 0}, {4, 4}));
  EXPECT_FALSE(dijkstra_reference(m, {0, 0}, {4, 4}));
}

TEST(PlanPath, BlockedEndpointsAreNoPath) {
  SemanticMap m(3, 3);
  m.set_blocked({2, 2}, true);
  EXPECT_FALSE(plan_path(m, {0, 0}, {2, 2}));
  EXPECT_FALSE(plan_path(m, {2, 2}, {0, 0}));
}

TEST(PlanPath, OutOfBoundsEndpointsThrow) {
  SemanticMap m(3, 3);
  EXPECT_THROW(plan_path(m, {0, 0}, {5, 5}), std::invalid_argument);
  EXPECT_THROW(plan_path(m, {-1, 0}, {1, 1}), std::invalid_argument);
}

TEST(PlanPath, DetourAroundWall) {
  SemanticMap m(7, 7);
  for (int y = 0; y < 7; ++y) {
    if (y != 6) m.set_blocked({3, y}, true);
  }
  const auto t = plan_path(m, {0, 2}, {6, 2});
  ASSERT_TRUE(t);
  EXPECT_EQ(t->cost, 14);
  EXPECT_TRUE(is_valid_path(m, *t));
}

TEST(PlanPath, DeterministicTieBreaking) {
  SemanticMap m(6, 6);
  const auto a = plan_path(m, {0, 0}, {5, 5});
  const auto b = plan_path(m, {0, 0}, {5, 5});
  ASSERT_TRUE(a && b);
  EXPECT_EQ(a->cells, b->cells);
}

TEST(PlanPath, MatchesBreadthFirstOracle) {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 300; ++trial) {
    std::uniform_int_distribution<int> dim(1, 15);
    const int w = dim(rng), h = dim(rng);
    const auto m = random_map(rng, w, h, 0.3);
    std::uniform_int_distribution<int> xs(0, w - 1), ys(0, h - 1);
    const Coord s{xs(rng), ys(rng)}, g{xs(rng), ys(rng)};
    const auto t = plan_path(m, s, g);
    const auto expected = oracle::bfs_cost(m, s, g);
    ASSERT_EQ(t.has_value(), expected.has_value()) << "trial " << trial;
    if (t) {
      EXPECT_EQ(t->cost, *expected) << "trial " << trial;
      EXPECT_TRUE(is_valid_path(m, *t));
      EXPECT_EQ(t->cells.front(), s);
      EXPECT_EQ(t->cells.back(), g);
      EXPECT_EQ(dijkstra_reference(m, s, g), expected);
    }
  }
}

TEST(PlanPath, ValidityChecker) {
  SemanticMap m(3, 3);
  m.set_blocked({1, 1}, true);
  EXPECT_TRUE(is_valid_path(m, {{{0, 0}, {1, 0}, {2, 0}}, 2}));
  EXPECT_FALSE(is_valid_path(m, {{{0, 0}, {2, 0}}, 1}));           // jump
  EXPECT_FALSE(is_valid_path(m, {{{0, 1}, {1, 1}, {2, 1}}, 2}));   // through a wall
  EXPECT_FALSE(is_valid_path(m, {{{0, 0}, {1, 0}}, 3}));           // wrong cost
  EXPECT_FALSE(is_valid_path(m, {{}, 0}));
}

TEST(Divergence, IdenticalIsZero) {
  const std::vector<Coord> a{{0, 0}, {1, 0}, {2, 0}};
  EXPECT_EQ(divergence(a, a), 0.0);
}

TEST(Divergence, KnownValue) {
  const std::vector<Coord> a{{0, 0}, {1, 0}, {2, 0}};
  const std::vector<Coord> b{{0, 3}, {1, 3}, {2, 3}};
  EXPECT_EQ(divergence(a, b), 3.0);
  // Endpoints must be matched, so a shared route with one far stop is far.
  const std::vector<Coord> c{{0, 0}, {1, 0}, {2, 0}, {2, 5}};
  EXPECT_EQ(divergence(a, c), 5.0);
}

TEST(Divergence, EmptyInputThrows) {
  const std::vector<Coord> a{{0, 0}};
  EXPECT_THROW(divergence(a, std::vector<Coord>{}), std::invalid_argument);
}

TEST(Divergence, MatchesCouplingEnumeration) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<std::size_t> len(1, 6);
  for (int trial = 0; trial < 400; ++trial) {
    const auto a = random_walk(rng, len(rng));
    const auto b = random_walk(rng, len(rng));
    EXPECT_DOUBLE_EQ(divergence(a, b), oracle::frechet_by_couplings(a, b)) << "trial " << trial;
    EXPECT_DOUBLE_EQ(divergence(a, b), divergence(b, a));
  }
}

TEST(Divergence, BoundedBelowByEndpoints) {
  std::mt19937 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    const auto a = random_walk(rng, 8);
    const auto b = random_walk(rng, 5);
    const double d = divergence(a, b);
    EXPECT_GE(d, chebyshev(a.front(), b.front()));
    EXPECT_GE(d, chebyshev(a.back(), b.back()));
  }
}

TEST(PlanTask, ChainsSegments) {
  const auto sc = fixtures::bundled("decoy-box");
  const auto map = world::apply_hypothesis(sc.scene, {}, world::DefaultPolicy::Conservative);
  const auto plan = plan_task(sc.scene, map, {"box-2", "person-1"});
  ASSERT_TRUE(plan);
  ASSERT_EQ(plan->segments.size(), 2U);
  EXPECT_EQ(plan->segments[0].cells.back(), sc.scene.find_object("box-2")->cell);
  EXPECT_EQ(plan->segments[1].cells.front(), sc.scene.find_object("box-2")->cell);
  EXPECT_EQ(plan->total_cost, plan->segments[0].cost + plan->segments[1].cost);
  const auto cells = plan->cells();
  EXPECT_EQ(static_cast<int>(cells.size()), plan->total_cost + 1);
  EXPECT_THROW(plan_task(sc.scene, map, {"box-9", "person-1"}), ValidationError);
}

TEST(PlanTask, NoPathPropagates) {
  const auto sc = fixtures::bundled("shortcut");
  auto map = world::apply_hypothesis(sc.scene, {}, world::DefaultPolicy::Conservative);
  map.set_blocked({3, 6}, true);
  EXPECT_FALSE(plan_task(sc.scene, map, {"person-1"}));
  EXPECT_TRUE(std::isinf(plan_cost(std::nullopt)));
}

TEST(PlanDivergence, NoPathConventions) {
  const auto sc = fixtures::bundled("shortcut");
  const auto map = world::apply_hypothesis(sc.scene, {}, world::DefaultPolicy::Optimistic);
  const auto p = plan_task(sc.scene, map, {"person-1"});
  EXPECT_EQ(plan_divergence(std::nullopt, std::nullopt), 0.0);
  EXPECT_TRUE(std::isinf(plan_divergence(p, std::nullopt)));
  EXPECT_EQ(plan_divergence(p, p), 0.0);
}

TEST(PlanDivergence, DifferentStopsOnTheSameRouteDiverge) {
  const auto sc = fixtures::bundled("decoy-box");
  const auto map = world::apply_hypothesis(sc.scene, {}, world::DefaultPolicy::Conservative);
  const auto near = plan_task(sc.scene, map, {"box-1", "person-1"});
  const auto far = plan_task(sc.scene, map, {"box-2", "person-1"});
  ASSERT_TRUE(near && far);
  EXPECT_GT(plan_divergence(near, far), 2.0);
  EXPECT_NE(plan_signature(near), plan_signature(far));
}
