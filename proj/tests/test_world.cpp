#include <gtest/gtest.h>

#include "fixtures.hpp"
#include "mintops/errors.hpp"
#include "mintops/world.hpp"

using namespace mintops;
using namespace mintops::world;

namespace {

const char* kMinimal = R"({
  "grid": {"width": 4, "height": 3, "obstacles": [[1, 1]]},
  "objects": [{"id": "p", "label": "person", "attributes": {}, "cell": [3, 1]}],
  "regions": [{"id": "smoke", "cells": [[2, 1]],
               "hypotheses": [{"name": "safe", "traversable": true, "prior": 0.4},
                              {"name": "toxic", "traversable": false, "prior": 0.6}],
               "truth": 1}],
  "instruction": {"steps": [{"action": "Visit", "constraints": {"label": "person"}}]},
  "start": [0, 1],
  "truth_goals": ["p"],
  "step_budget": 20
})";

std::string with(std::string doc, const std::string& from, const std::string& to) {
  const auto pos = doc.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return doc.replace(pos, from.size(), to);
}

}  // namespace

TEST(ScenarioLoad, MinimalDocument) {
  const auto sc = load_scenario(kMinimal);
  EXPECT_EQ(sc.scene.grid.width, 4);
  EXPECT_EQ(sc.scene.grid.at({1, 1}), Terrain::Obstacle);
  ASSERT_EQ(sc.scene.regions.size(), 1U);
  EXPECT_EQ(sc.scene.regions[0].label, "smoke");  // defaults to the id
  EXPECT_EQ(sc.truth.region_truth.at("smoke"), 1U);
  EXPECT_EQ(sc.scene.start, (Coord{0, 1}));
}

TEST(ScenarioLoad, RoundTripIsStable) {
  for (const char* name : {"trivial", "shortcut", "warehouse-smoke", "decoy-box"}) {
    const auto sc = fixtures::bundled(name);
    const std::string text = serialize_scenario(sc);
    const auto again = load_scenario(text);
    EXPECT_EQ(again, sc) << name;
    EXPECT_EQ(serialize_scenario(again), text) << name;
  }
}

TEST(ScenarioLoad, ParseErrorsNameTheField) {
  EXPECT_THROW(load_scenario("{not json"), ParseError);
  EXPECT_THROW(load_scenario("[]"), ParseError);
  try {
    load_scenario(with(kMinimal, R"("start": [0, 1],)", ""));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_NE(std::string(e.what()).find("start"), std::string::npos) << e.what();
  }
  EXPECT_THROW(load_scenario(with(kMinimal, R"("width": 4)", R"("width": "4")")), ParseError);
}

TEST(ScenarioLoad, ValidationErrors) {
  EXPECT_THROW(load_scenario(with(kMinimal, R"("prior": 0.6)", R"("prior": 0.5)")), ValidationError);
  EXPECT_THROW(load_scenario(with(kMinimal, R"("truth": 1)", R"("truth": 2)")), ValidationError);
  EXPECT_THROW(load_scenario(with(kMinimal, R"("start": [0, 1])", R"("start": [1, 1])")), ValidationError);
  EXPECT_THROW(load_scenario(with(kMinimal, R"("start": [0, 1])", R"("start": [9, 1])")), ValidationError);
  EXPECT_THROW(load_scenario(with(kMinimal, R"("id": "smoke")", R"("id": "goal:0")")), ValidationError);
  EXPECT_THROW(load_scenario(with(kMinimal, R"("truth_goals": ["p"])", R"("truth_goals": ["q"])")),
               ValidationError);
  EXPECT_THROW(load_scenario(with(kMinimal, R"("action": "Visit")", R"("action": "Fly")")),
               ValidationError);
  EXPECT_THROW(load_scenario(with(kMinimal, R"("traversable": true)", R"("traversable": false)")),
               ValidationError);
  try {
    load_scenario(with(kMinimal, R"("prior": 0.4)", R"("prior": 0.0)"));
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("smoke"), std::string::npos) << e.what();
  }
}

TEST(ScenarioLoad, GoalWeightsMustCoverCandidatesAndSumToOne) {
  auto two = with(kMinimal, R"("cell": [3, 1]}])",
                  R"("cell": [3, 1]}, {"id": "q", "label": "person", "attributes": {}, "cell": [3, 0]}])");
  const auto ok = with(two, R"("step_budget": 20)",
                       R"("step_budget": 20, "goal_weights": [{"step": 0, "weights": {"p": 0.75, "q": 0.25}}])");
  const auto sc = load_scenario(ok);
  const auto beliefs = make_beliefs(sc.scene, identify_gaps(sc.scene));
  const auto* g = beliefs.find("goal:0");
  ASSERT_NE(g, nullptr);
  EXPECT_DOUBLE_EQ(g->probs[0], 0.75);

  EXPECT_THROW(load_scenario(with(two, R"("step_budget": 20)",
                                  R"("step_budget": 20, "goal_weights": [{"step": 0, "weights": {"p": 0.7, "q": 0.2}}])")),
               ValidationError);
  EXPECT_THROW(load_scenario(with(two, R"("step_budget": 20)",
                                  R"("step_budget": 20, "goal_weights": [{"step": 0, "weights": {"p": 1.0}}])")),
               ValidationError);
}

TEST(ScenarioLoad, MissingFileIsIoError) {
  EXPECT_THROW(load_scenario_file("/nonexistent/scenario.json"), IoError);
}

TEST(Gaps, TrivialScenarioHasNone) {
  EXPECT_TRUE(identify_gaps(fixtures::bundled("trivial").scene).empty());
}

TEST(Gaps, RegionsFirstThenGoals) {
  const auto gaps = identify_gaps(fixtures::bundled("warehouse-smoke").scene);
  ASSERT_EQ(gaps.size(), 2U);
  EXPECT_EQ(gap_id(gaps[0]), "smoke-1");
  EXPECT_EQ(gap_id(gaps[1]), "goal:0");
  const auto& goal = std::get<GoalGap>(gaps[1]);
  EXPECT_EQ(goal.candidates, (std::vector<std::string>{"person-hall", "person-room"}));
  EXPECT_EQ(goal.weights, (std::vector<double>{0.5, 0.5}));
}

TEST(Gaps, DecoyBoxHasOneFourWayGoalGap) {
  const auto gaps = identify_gaps(fixtures::bundled("decoy-box").scene);
  ASSERT_EQ(gaps.size(), 1U);
  const auto& goal = std::get<GoalGap>(gaps[0]);
  EXPECT_EQ(goal.step_index, 0U);
  EXPECT_EQ(goal.candidates.size(), 4U);
  for (double w : goal.weights) EXPECT_DOUBLE_EQ(w, 0.25);
}

TEST(Gaps, StepWithoutCandidateIsRejected) {
  auto sc = load_scenario(kMinimal);
  sc.scene.instruction.steps[0].constraints["label"] = "box";
  EXPECT_THROW(identify_gaps(sc.scene), ValidationError);
}

TEST(Hypotheses, DefaultPolicyControlsUnassignedRegions) {
  const auto sc = load_scenario(kMinimal);
  EXPECT_TRUE(apply_hypothesis(sc.scene, {}, DefaultPolicy::Conservative).blocked({2, 1}));
  EXPECT_FALSE(apply_hypothesis(sc.scene, {}, DefaultPolicy::Optimistic).blocked({2, 1}));
  EXPECT_FALSE(apply_hypothesis(sc.scene, {{"smoke", 0}}, DefaultPolicy::Conservative).blocked({2, 1}));
  EXPECT_TRUE(apply_hypothesis(sc.scene, {{"smoke", 1}}, DefaultPolicy::Optimistic).blocked({2, 1}));
  EXPECT_TRUE(apply_hypothesis(sc.scene, {}, DefaultPolicy::Optimistic).blocked({1, 1}));
  EXPECT_NO_THROW(apply_hypothesis(sc.scene, {{"goal:0", 0}}, DefaultPolicy::Optimistic));
  EXPECT_THROW(apply_hypothesis(sc.scene, {{"fog", 0}}, DefaultPolicy::Optimistic), ValidationError);
  EXPECT_THROW(apply_hypothesis(sc.scene, {{"smoke", 2}}, DefaultPolicy::Optimistic), ValidationError);
}

TEST(Hypotheses, TruthMapUsesHiddenState) {
  const auto sc = load_scenario(kMinimal);
  EXPECT_TRUE(truth_map(sc).blocked({2, 1}));
  EXPECT_EQ(truth_assignment(sc).at("smoke"), 1U);
}

TEST(Beliefs, PriorsAndSafeIndex) {
  const auto sc = load_scenario(with(kMinimal, R"([{"name": "safe", "traversable": true, "prior": 0.4},
                              {"name": "toxic", "traversable": false, "prior": 0.6}])",
                                     R"([{"name": "toxic", "traversable": false, "prior": 0.6},
                              {"name": "safe", "traversable": true, "prior": 0.4}])"));
  const auto b = make_beliefs(sc.scene, identify_gaps(sc.scene));
  const auto* g = b.find("smoke");
  ASSERT_NE(g, nullptr);
  EXPECT_EQ(g->options, (std::vector<std::string>{"toxic", "safe"}));
  EXPECT_EQ(g->safe_index, 1U);
  EXPECT_EQ(g->argmax(), 0U);
  EXPECT_FALSE(g->resolved);
}
