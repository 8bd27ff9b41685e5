#pragma once

#include <random>
#include <string>

#include "mintops/generator.hpp"
#include "mintops/world.hpp"

namespace fixtures {

inline std::string data_path(const std::string& rel) { return std::string(MINTOPS_DATA_DIR) + "/" + rel; }

inline mintops::world::Scenario bundled(const std::string& name) {
  return mintops::world::load_scenario_file(data_path("scenarios/" + name + ".json"));
}

/// Small random scenario: scattered obstacles, 1-3 regions, and an optional
/// ambiguous goal with 2-3 candidates. May be unsolvable on some maps.
inline mintops::world::Scenario random_small(std::mt19937& rng) {
  using namespace mintops;
  using namespace mintops::world;
  auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int w = pick(5, 8);
  const int h = pick(5, 8);
  Scenario sc;
  sc.scene.id = "random";
  sc.scene.grid.width = w;
  sc.scene.grid.height = h;
  sc.scene.grid.cells.assign(static_cast<std::size_t>(w * h), Terrain::Free);
  sc.scene.start = {0, pick(0, h - 1)};
  std::vector<Coord> used{sc.scene.start};
  auto free_cell = [&]() {
    while (true) {
      Coord c{pick(0, w - 1), pick(0, h - 1)};
      if (std::find(used.begin(), used.end(), c) == used.end()) {
        used.push_back(c);
        return c;
      }
    }
  };
  const int n_obstacles = pick(0, w * h / 5);
  for (int i = 0; i < n_obstacles; ++i) {
    const Coord c = free_cell();
    sc.scene.grid.cells[static_cast<std::size_t>(c.y * w + c.x)] = Terrain::Obstacle;
  }
  const int n_goals = pick(1, 3);
  for (int i = 0; i < n_goals; ++i) {
    sc.scene.objects.push_back({"t" + std::to_string(i), "target",
                                {{"shade", i % 2 == 0 ? "dark" : "light"}}, free_cell()});
  }
  const int n_regions = pick(1, 3);
  const double priors[] = {0.2, 0.35, 0.5, 0.65, 0.8};
  for (int i = 0; i < n_regions; ++i) {
    UncertainRegion r;
    r.id = "r" + std::to_string(i);
    r.label = "smoke";
    const Coord c = free_cell();
    r.cells = {c};
    if (pick(0, 1) == 1 && c.y + 1 < h &&
        std::find(used.begin(), used.end(), Coord{c.x, c.y + 1}) == used.end()) {
      r.cells.push_back({c.x, c.y + 1});
      used.push_back({c.x, c.y + 1});
    }
    const double p = priors[pick(0, 4)];
    r.hypotheses[0] = {"safe", true, p};
    r.hypotheses[1] = {"toxic", false, 1.0 - p};
    sc.truth.region_truth[r.id] = static_cast<std::size_t>(pick(0, 1));
    sc.scene.regions.push_back(std::move(r));
  }
  sc.scene.instruction.steps.push_back({Action::Visit, {{"label", "target"}}});
  sc.truth.truth_goals = {"t" + std::to_string(pick(0, n_goals - 1))};
  sc.scene.step_budget = 4 * w * h;
  return sc;
}

}  // namespace fixtures
