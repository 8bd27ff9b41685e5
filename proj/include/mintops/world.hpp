#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mintops/grid.hpp"

namespace mintops::world {

enum class Terrain { Free, Obstacle };

struct GridMap {
  int width = 0;
  int height = 0;
  std::vector<Terrain> cells;  // row-major, width * height

  bool in_bounds(Coord c) const {
    return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height;
  }
  Terrain at(Coord c) const {
    return cells[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) +
                 static_cast<std::size_t>(c.x)];
  }

  friend bool operator==(const GridMap&, const GridMap&) = default;
};

using Attributes = std::map<std::string, std::string>;

struct WorldObject {
  std::string id;
  std::string label;
  Attributes attributes;
  Coord cell;

  friend bool operator==(const WorldObject&, const WorldObject&) = default;
};

struct Hypothesis {
  std::string name;
  bool traversable = false;
  double prior = 0.5;

  friend bool operator==(const Hypothesis&, const Hypothesis&) = default;
};

/// Region whose traversability is unknown to the agent. The true hypothesis
/// is kept in GroundTruth, not here.
struct UncertainRegion {
  std::string id;
  std::string label;  // display noun, e.g. "smoke"
  std::vector<Coord> cells;
  std::array<Hypothesis, 2> hypotheses;

  std::size_t traversable_index() const { return hypotheses[0].traversable ? 0 : 1; }
  std::size_t blocked_index() const { return 1 - traversable_index(); }

  friend bool operator==(const UncertainRegion&, const UncertainRegion&) = default;
};

enum class Action { Visit, Pickup, Deliver };

std::string_view to_string(Action a);
std::optional<Action> parse_action(std::string_view text);

/// Attribute predicates. The key "label" matches WorldObject::label.
using Constraints = std::map<std::string, std::string>;

struct TaskStep {
  Action action = Action::Visit;
  Constraints constraints;

  friend bool operator==(const TaskStep&, const TaskStep&) = default;
};

struct Instruction {
  std::vector<TaskStep> steps;

  friend bool operator==(const Instruction&, const Instruction&) = default;
};

/// Optional per-step override of the uniform goal prior.
struct GoalWeights {
  std::size_t step = 0;
  std::map<std::string, double> weights;

  friend bool operator==(const GoalWeights&, const GoalWeights&) = default;
};

/// Everything the agent may observe. Planner and tree code only ever see this.
struct Scene {
  std::string id;
  GridMap grid;
  std::vector<WorldObject> objects;
  std::vector<UncertainRegion> regions;
  Instruction instruction;
  Coord start;
  int step_budget = 0;
  std::vector<GoalWeights> goal_weights;

  const WorldObject* find_object(std::string_view id) const;
  const UncertainRegion* find_region(std::string_view id) const;

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// Hidden state, visible only to the oracle operator and the evaluator.
struct GroundTruth {
  std::map<std::string, std::size_t> region_truth;  // region id -> hypothesis index
  std::vector<std::string> truth_goals;             // per instruction step

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct Scenario {
  Scene scene;
  GroundTruth truth;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

// ---------------------------------------------------------------------------
// Knowledge gaps and beliefs

struct ObstacleGap {
  std::string region_id;

  friend bool operator==(const ObstacleGap&, const ObstacleGap&) = default;
};

struct GoalGap {
  std::size_t step_index = 0;
  std::vector<std::string> candidates;  // sorted by id
  std::vector<double> weights;

  friend bool operator==(const GoalGap&, const GoalGap&) = default;
};

using KnowledgeGap = std::variant<ObstacleGap, GoalGap>;

/// Region gaps are keyed by region id, goal gaps by "goal:<step>".
std::string gap_id(const KnowledgeGap& gap);
std::string goal_gap_id(std::size_t step);

enum class GapKind { Obstacle, Goal };

/// Current distribution over one gap's values. For obstacle gaps the options
/// are the two hypotheses in document order; for goal gaps the candidate ids.
struct GapBelief {
  std::string id;
  GapKind kind = GapKind::Obstacle;
  std::string region_id;
  std::size_t step = 0;
  std::vector<std::string> options;
  std::vector<double> probs;
  std::size_t safe_index = 0;  // obstacle gaps: option whose hypothesis is traversable
  bool resolved = false;
  std::size_t value = 0;

  /// Index of the most probable option, lowest option id on ties.
  std::size_t argmax() const;
  std::size_t live_count() const;

  friend bool operator==(const GapBelief&, const GapBelief&) = default;
};

struct Beliefs {
  std::vector<GapBelief> gaps;
  std::set<std::string> unanswerable;  // query ids answered "Unknown"

  const GapBelief* find(std::string_view gap_id) const;
  GapBelief* find(std::string_view gap_id);

  friend bool operator==(const Beliefs&, const Beliefs&) = default;
};

Beliefs make_beliefs(const Scene& scene, const std::vector<KnowledgeGap>& gaps);

/// Per-gap hypothesis/candidate index chosen on a tree path.
using Assignment = std::map<std::string, std::size_t>;

enum class DefaultPolicy { Conservative, Optimistic };

// ---------------------------------------------------------------------------
// Operations

/// Parses and validates a scenario document. Throws ParseError or ValidationError.
Scenario load_scenario(std::string_view text);
Scenario load_scenario_file(const std::string& path);

/// Canonical document text; stable key order, two-space indent.
std::string serialize_scenario(const Scenario& scenario);

void validate(const Scenario& scenario);

bool satisfies(const WorldObject& object, const Constraints& constraints);
std::vector<std::string> step_candidates(const Scene& scene, std::size_t step);

/// Obstacle gaps (by region id) followed by goal gaps (by step).
/// Throws ValidationError when a step has no candidate.
std::vector<KnowledgeGap> identify_gaps(const Scene& scene);

/// Temporary semantic map for a hypothesis assignment. Goal-gap entries are
/// accepted and ignored; unknown gap ids throw ValidationError.
SemanticMap apply_hypothesis(const Scene& scene, const Assignment& assignment,
                             DefaultPolicy unassigned);

SemanticMap truth_map(const Scenario& scenario);
Assignment truth_assignment(const Scenario& scenario);

}  // namespace mintops::world
