#pragma once

#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mintops/grid.hpp"
#include "mintops/world.hpp"

namespace mintops::planner {

inline constexpr double kInfiniteCost = std::numeric_limits<double>::infinity();

/// 4-connected path; cost is the number of unit steps.
struct Trajectory {
  std::vector<Coord> cells;
  int cost = 0;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct TaskPlan {
  std::vector<Trajectory> segments;
  int total_cost = 0;
  std::vector<std::string> goal_choice;

  /// Segments joined end to start without repeating the shared cells.
  std::vector<Coord> cells() const;

  friend bool operator==(const TaskPlan&, const TaskPlan&) = default;
};

/// A* with Manhattan heuristic; ties on f expand the lower (y, x) first.
/// Returns nullopt when no path exists. Throws std::invalid_argument when an
/// endpoint is out of bounds.
std::optional<Trajectory> plan_path(const SemanticMap& map, Coord start, Coord goal);

/// Uniform-cost search reference. Cost only; nullopt when unreachable.
std::optional<int> dijkstra_reference(const SemanticMap& map, Coord start, Coord goal);

/// Chains start -> goal_1 -> goal_2 ... Throws ValidationError on unknown ids.
std::optional<TaskPlan> plan_task(const world::Scene& scene, const SemanticMap& map,
                                  const std::vector<std::string>& goal_choice);

/// Discrete Frechet distance under the Chebyshev ground metric.
/// Throws std::invalid_argument on empty input.
double divergence(std::span<const Coord> a, std::span<const Coord> b);
double divergence(const Trajectory& a, const Trajectory& b);

/// Plan-level cost and divergence with NoPath treated as +inf. Plans with
/// the same number of segments are compared segment by segment (max).
double plan_cost(const std::optional<TaskPlan>& plan);
double plan_divergence(const std::optional<TaskPlan>& a, const std::optional<TaskPlan>& b);

/// Cells per segment. Equal signatures mean the same route with the same
/// stops; every NoPath has the empty signature.
std::vector<std::vector<Coord>> plan_signature(const std::optional<TaskPlan>& plan);

/// True when the path is 4-connected, cost-consistent and avoids blocked cells.
bool is_valid_path(const SemanticMap& map, const Trajectory& t);

}  // namespace mintops::planner
