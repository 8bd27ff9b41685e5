#include "mintops/generator.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <sstream>

#include "mintops/errors.hpp"
#include "mintops/planner.hpp"

namespace mintops::world {

namespace {

constexpr double kCriticalGap = 2.0;  // matches the default cost/divergence thresholds
constexpr int kMaxAttempts = 400;

/// mt19937_64 output is fully specified; the bounded draws below avoid the
/// implementation-defined std distributions so suites are portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
    const std::uint64_t limit = max - max % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }
  int range(int lo, int hi) {  // inclusive
    return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
  }
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool chance(double p) { return unit() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::mt19937_64 engine_;
};

[[noreturn]] void infeasible(const std::string& what) {
  throw ValidationError("params: " + what);
}

constexpr std::array<double, 5> kPriors{0.3, 0.4, 0.5, 0.6, 0.7};

class Builder {
 public:
  Builder(std::string id, int width, int height) {
    sc_.scene.id = std::move(id);
    sc_.scene.grid.width = width;
    sc_.scene.grid.height = height;
    sc_.scene.grid.cells.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                                Terrain::Free);
  }

  Scene& scene() { return sc_.scene; }
  Scenario& scenario() { return sc_; }

  void block(Coord c) { cell(c) = Terrain::Obstacle; }
  bool is_obstacle(Coord c) const { return sc_.scene.grid.at(c) == Terrain::Obstacle; }

  bool occupied(Coord c) const {
    if (!sc_.scene.grid.in_bounds(c) || is_obstacle(c) || c == sc_.scene.start) return true;
    for (const auto& o : sc_.scene.objects) {
      if (o.cell == c) return true;
    }
    for (const auto& r : sc_.scene.regions) {
      if (std::find(r.cells.begin(), r.cells.end(), c) != r.cells.end()) return true;
    }
    return false;
  }

  /// Vertical wall at column x, open at `opening` and at the region rows.
  void wall(int x, int opening, const std::vector<int>& gap_rows) {
    for (int y = 0; y < sc_.scene.grid.height; ++y) {
      if (y == opening || std::find(gap_rows.begin(), gap_rows.end(), y) != gap_rows.end()) continue;
      block({x, y});
    }
  }

  void object(std::string id, std::string label, Attributes attrs, Coord c) {
    sc_.scene.objects.push_back({std::move(id), std::move(label), std::move(attrs), c});
  }

  void region(std::string id, std::string label, std::vector<Coord> cells, double p_safe,
              bool truly_safe) {
    UncertainRegion r;
    r.id = std::move(id);
    r.label = std::move(label);
    r.cells = std::move(cells);
    r.hypotheses[0] = {"safe", true, p_safe};
    r.hypotheses[1] = {"toxic", false, std::round((1.0 - p_safe) * 100.0) / 100.0};
    sc_.truth.region_truth[r.id] = truly_safe ? 0 : 1;
    sc_.scene.regions.push_back(std::move(r));
  }

  void remove_last_region() {
    sc_.truth.region_truth.erase(sc_.scene.regions.back().id);
    sc_.scene.regions.pop_back();
  }

 private:
  Terrain& cell(Coord c) {
    return sc_.scene.grid.cells[static_cast<std::size_t>(c.y) *
                                    static_cast<std::size_t>(sc_.scene.grid.width) +
                                static_cast<std::size_t>(c.x)];
  }

  Scenario sc_;
};

// ---------------------------------------------------------------------------
// Plan-based verification, exhaustive over region hypotheses and goal choices.

std::vector<Assignment> region_combinations(const Scene& scene) {
  std::vector<Assignment> out;
  const std::size_t n = scene.regions.size();
  for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
    Assignment a;
    for (std::size_t i = 0; i < n; ++i) a[scene.regions[i].id] = (mask >> i) & 1U;
    out.push_back(std::move(a));
  }
  return out;
}

std::vector<std::vector<std::string>> goal_combinations(const Scene& scene) {
  std::vector<std::vector<std::string>> out{{}};
  for (std::size_t step = 0; step < scene.instruction.steps.size(); ++step) {
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : out) {
      for (const auto& c : step_candidates(scene, step)) {
        auto v = prefix;
        v.push_back(c);
        next.push_back(std::move(v));
      }
    }
    out = std::move(next);
  }
  return out;
}

std::optional<planner::TaskPlan> plan_for(const Scene& scene, const Assignment& regions,
                                          const std::vector<std::string>& goals) {
  return planner::plan_task(scene, apply_hypothesis(scene, regions, DefaultPolicy::Conservative),
                            goals);
}

/// The region's hypotheses yield the identical plan in every context.
bool never_matters(const Scene& scene, const std::string& region_id) {
  const auto* r = scene.find_region(region_id);
  for (auto a : region_combinations(scene)) {
    if (a[region_id] != 0) continue;
    for (const auto& goals : goal_combinations(scene)) {
      a[region_id] = r->traversable_index();
      const auto open = plan_for(scene, a, goals);
      a[region_id] = r->blocked_index();
      const auto shut = plan_for(scene, a, goals);
      if (planner::plan_signature(open) != planner::plan_signature(shut)) return false;
    }
  }
  return true;
}

/// The region's hypotheses differ in cost by more than the default threshold
/// in every context that agrees with `fixed`.
bool always_matters(const Scene& scene, const std::string& region_id,
                    const Assignment& fixed = {}) {
  const auto* r = scene.find_region(region_id);
  for (auto a : region_combinations(scene)) {
    if (a[region_id] != 0) continue;
    bool agrees = true;
    for (const auto& [id, index] : fixed) agrees = agrees && a.at(id) == index;
    if (!agrees) continue;
    for (const auto& goals : goal_combinations(scene)) {
      a[region_id] = r->traversable_index();
      const double open = planner::plan_cost(plan_for(scene, a, goals));
      a[region_id] = r->blocked_index();
      const double shut = planner::plan_cost(plan_for(scene, a, goals));
      if (std::isinf(open)) return false;
      if (!(shut - open > kCriticalGap)) return false;
    }
  }
  return true;
}

/// Every pair of candidates for the step produces clearly different plans.
bool goals_separated(const Scene& scene, std::size_t step) {
  const auto candidates = step_candidates(scene, step);
  std::vector<std::string> base;
  for (std::size_t s = 0; s < scene.instruction.steps.size(); ++s) {
    base.push_back(step_candidates(scene, s).front());
  }
  for (const auto& a : region_combinations(scene)) {
    std::vector<std::optional<planner::TaskPlan>> plans;
    for (const auto& c : candidates) {
      auto goals = base;
      goals[step] = c;
      plans.push_back(plan_for(scene, a, goals));
    }
    for (std::size_t i = 0; i < plans.size(); ++i) {
      for (std::size_t j = i + 1; j < plans.size(); ++j) {
        if (!plans[i] || !plans[j]) continue;
        const double gap = std::abs(plans[i]->total_cost - plans[j]->total_cost);
        if (gap <= kCriticalGap && planner::plan_divergence(plans[i], plans[j]) <= kCriticalGap) {
          return false;
        }
      }
    }
  }
  return true;
}

bool always_solvable(const Scene& scene) {
  for (const auto& a : region_combinations(scene)) {
    for (const auto& goals : goal_combinations(scene)) {
      if (!plan_for(scene, a, goals)) return false;
    }
  }
  return true;
}

/// Sets the budget to four times the omniscient cost; false when unsolvable.
bool finalize_budget(Scenario& sc) {
  auto plan = planner::plan_task(sc.scene, truth_map(sc), sc.truth.truth_goals);
  if (!plan) return false;
  sc.scene.step_budget = 4 * std::max(plan->total_cost, 1);
  return true;
}

std::string scenario_id(const std::string& family, std::uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06llu", static_cast<unsigned long long>(seed));
  return family + "-" + buf;
}

void sprinkle_obstacles(Builder& b, Rng& rng, double density) {
  if (density <= 0.0) return;
  const auto& grid = b.scene().grid;
  for (int y = 0; y < grid.height; ++y) {
    for (int x = 1; x < grid.width - 1; ++x) {
      if (!b.occupied({x, y}) && rng.chance(density)) b.block({x, y});
    }
  }
}

/// Wall whose region-covered gap is the shortcut; returns the gap cells.
std::vector<Coord> shortcut_wall(Builder& b, Rng& rng, int x) {
  const int h = b.scene().grid.height;
  const int opening = rng.chance(0.5) ? 0 : h - 1;
  const int len = rng.range(1, 2);
  const int top = rng.range(2, h - 2 - len);
  std::vector<int> rows;
  std::vector<Coord> cells;
  for (int y = top; y < top + len; ++y) {
    rows.push_back(y);
    cells.push_back({x, y});
  }
  b.wall(x, opening, rows);
  return cells;
}

double draw_prior(Rng& rng) { return kPriors[rng.below(kPriors.size())]; }

/// Places off-path regions one at a time, keeping only placements that never
/// change any plan.
bool place_off_path(Builder& b, Rng& rng, int count, int first_index) {
  const auto& grid = b.scene().grid;
  for (int k = 0; k < count; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < 60 && !placed; ++attempt) {
      const int w = rng.range(1, 2);
      const int h = rng.range(1, 2);
      const Coord origin{rng.range(0, grid.width - w), rng.range(0, grid.height - h)};
      std::vector<Coord> cells;
      bool ok = true;
      for (int dy = 0; dy < h && ok; ++dy) {
        for (int dx = 0; dx < w && ok; ++dx) {
          const Coord c{origin.x + dx, origin.y + dy};
          if (b.occupied(c)) ok = false;
          cells.push_back(c);
        }
      }
      if (!ok) continue;
      const double prior = draw_prior(rng);
      const bool safe = rng.chance(prior);
      const std::string id = "smoke-" + std::to_string(first_index + k);
      b.region(id, "smoke", std::move(cells), prior, safe);
      if (never_matters(b.scene(), id)) {
        placed = true;
      } else {
        b.remove_last_region();
      }
    }
    if (!placed) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Families

std::optional<Scenario> try_shortcut(const GenParams& p, Rng& rng, const std::string& id) {
  const int w = p.width;
  const int h = p.height;
  const int n_off = static_cast<int>(std::lround(p.regions * p.off_path));
  const int n_on = p.regions - n_off;

  Builder b(id, w, h);
  b.scene().start = {0, rng.range(h / 3, (2 * h) / 3)};

  // Evenly spaced wall columns with a little jitter.
  std::vector<int> columns;
  for (int k = 0; k < n_on; ++k) {
    int x = 2 + ((k + 1) * (w - 4)) / (n_on + 1) + rng.range(-1, 1);
    x = std::clamp(x, 2, w - 3);
    if (!columns.empty() && x - columns.back() < 3) return std::nullopt;
    columns.push_back(x);
  }
  std::vector<std::vector<Coord>> gaps;
  for (int x : columns) gaps.push_back(shortcut_wall(b, rng, x));

  const int goal_x = w - 1;
  b.object("person-1", "person", {{"condition", "injured"}}, {goal_x, rng.range(h / 3, (2 * h) / 3)});
  const int min_x = columns.empty() ? 1 : columns.back() + 2;
  for (int k = 1; k < p.candidates; ++k) {
    Coord c{rng.range(std::min(min_x, w - 1), w - 1), rng.range(0, h - 1)};
    if (b.occupied(c)) return std::nullopt;
    b.object("person-" + std::to_string(k + 1), "person", {{"condition", "injured"}}, c);
  }
  sprinkle_obstacles(b, rng, p.obstacle_density);

  for (std::size_t k = 0; k < gaps.size(); ++k) {
    const double prior = draw_prior(rng);
    b.region("smoke-" + std::to_string(k + 1), "smoke", gaps[k], prior, rng.chance(prior));
  }
  if (!place_off_path(b, rng, n_off, n_on + 1)) return std::nullopt;

  b.scene().instruction.steps.push_back({Action::Visit, {{"label", "person"}}});
  const auto candidates = step_candidates(b.scene(), 0);
  b.scenario().truth.truth_goals = {candidates[rng.below(candidates.size())]};

  const Scene& scene = b.scene();
  if (!always_solvable(scene)) return std::nullopt;
  for (int k = 0; k < n_on; ++k) {
    if (!always_matters(scene, "smoke-" + std::to_string(k + 1))) return std::nullopt;
  }
  for (int k = 0; k < n_off; ++k) {
    if (!never_matters(scene, "smoke-" + std::to_string(n_on + 1 + k))) return std::nullopt;
  }
  if (p.candidates > 1 && !goals_separated(scene, 0)) return std::nullopt;
  if (!finalize_budget(b.scenario())) return std::nullopt;
  return b.scenario();
}

std::optional<Scenario> try_passive_mix(const GenParams& p, Rng& rng, const std::string& id,
                                        const std::string& kind) {
  const int w = p.width;
  const int h = p.height;
  Builder b(id, w, h);
  b.scene().start = {0, rng.range(h / 3, (2 * h) / 3)};

  const bool has_room = kind == "safe-chokepoint" || kind == "chokepoint-danger";
  const bool has_shortcut = kind != "safe-chokepoint";
  const bool ambiguous = kind == "goal-ambiguity";

  if (has_shortcut) {
    const int x = has_room ? rng.range(w / 3, w / 2) : rng.range(w / 3, (2 * w) / 3);
    auto cells = shortcut_wall(b, rng, x);
    const bool safe = kind != "danger-shortcut" && kind != "chokepoint-danger";
    b.region("smoke-1", "smoke", std::move(cells), draw_prior(rng), safe);
  }

  if (has_room) {
    // Closed room against the east edge; its doorway is the only way in.
    const int ry = rng.range(2, h - 3);
    const int wx = w - 4;
    for (int y = ry - 2; y <= ry + 2; ++y) {
      if (y != ry) b.block({wx, y});
    }
    for (int x = wx; x < w; ++x) {
      b.block({x, ry - 2});
      b.block({x, ry + 2});
    }
    b.region("doorway-1", "doorway", {{wx, ry}}, draw_prior(rng), true);
    b.object("person-a", "person", {{"location", "room"}}, {w - 2, ry});
  } else if (ambiguous) {
    b.object("person-a", "person", {{"location", "north"}}, {w - 1, rng.range(0, 1)});
    b.object("person-b", "person", {{"location", "south"}}, {w - 1, rng.range(h - 2, h - 1)});
  } else {
    b.object("person-a", "person", {{"condition", "injured"}}, {w - 1, rng.range(h / 3, (2 * h) / 3)});
  }

  b.scene().instruction.steps.push_back({Action::Visit, {{"label", "person"}}});
  // The passive baselines pick the lowest id on a tie, so the truth is the other one.
  b.scenario().truth.truth_goals = {ambiguous ? "person-b" : "person-a"};

  const Scene& scene = b.scene();
  Assignment door_open;
  if (has_room) door_open["doorway-1"] = scene.find_region("doorway-1")->traversable_index();
  if (has_shortcut && !ambiguous && !always_matters(scene, "smoke-1", door_open)) return std::nullopt;
  if (ambiguous && !goals_separated(scene, 0)) return std::nullopt;
  if (!finalize_budget(b.scenario())) return std::nullopt;
  return b.scenario();
}

std::optional<Scenario> try_decoy(const GenParams& p, Rng& rng, const std::string& id) {
  static const std::array<std::string, 4> kColors{"red", "blue", "green", "yellow"};
  static const std::array<std::string, 2> kSizes{"small", "large"};
  const int w = p.width;
  const int h = p.height;
  Builder b(id, w, h);
  b.scene().start = {0, rng.range(0, h - 1)};

  std::vector<Attributes> looks;
  for (int k = 0; k < p.candidates; ++k) {
    looks.push_back({{"color", kColors[static_cast<std::size_t>(k / 2) % kColors.size()]},
                     {"size", kSizes[static_cast<std::size_t>(k % 2)]}});
  }
  rng.shuffle(looks);

  std::vector<Coord> placed;
  for (int k = 0; k < p.candidates; ++k) {
    Coord c;
    bool ok = false;
    for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
      c = {rng.range(2, w - 1), rng.range(0, h - 1)};
      ok = !b.occupied(c);
      for (const auto& q : placed) ok = ok && chebyshev(c, q) >= 5;
    }
    if (!ok) return std::nullopt;
    placed.push_back(c);
    b.object("box-" + std::to_string(k + 1), "box", looks[static_cast<std::size_t>(k)], c);
  }
  Coord person;
  bool ok = false;
  for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
    person = {rng.range(1, w - 1), rng.range(0, h - 1)};
    ok = !b.occupied(person);
  }
  if (!ok) return std::nullopt;
  b.object("person-1", "person", {{"condition", "injured"}}, person);
  sprinkle_obstacles(b, rng, p.obstacle_density);

  b.scene().instruction.steps.push_back({Action::Pickup, {{"label", "box"}}});
  b.scene().instruction.steps.push_back({Action::Deliver, {{"label", "person"}}});
  b.scenario().truth.truth_goals = {
      "box-" + std::to_string(rng.range(1, p.candidates)), "person-1"};

  const Scene& scene = b.scene();
  if (!always_solvable(scene)) return std::nullopt;
  if (p.candidates > 1 && !goals_separated(scene, 0)) return std::nullopt;
  if (!finalize_budget(b.scenario())) return std::nullopt;
  return b.scenario();
}

void check_params(const GenParams& p) {
  if (p.width < 5 || p.height < 7) infeasible("grid must be at least 5x7");
  if (p.regions < 0) infeasible("regions must be >= 0");
  if (p.off_path < 0.0 || p.off_path > 1.0) infeasible("off_path must be in [0,1]");
  if (p.candidates < 1) infeasible("candidates must be >= 1");
  if (p.obstacle_density < 0.0 || p.obstacle_density > 0.5) {
    infeasible("obstacle_density must be in [0,0.5]");
  }
  if (p.count < 1) infeasible("count must be >= 1");
  const long long cells = static_cast<long long>(p.width) * p.height;
  if (p.candidates + 2 > cells) infeasible("more objects than free cells");
  if (p.family == "shortcut") {
    const int n_on = p.regions - static_cast<int>(std::lround(p.regions * p.off_path));
    if (n_on > 0 && 3 * n_on > p.width - 4) infeasible("too many on-path regions for the grid width");
  } else if (p.family == "passive-mix") {
    if (!p.kind.empty()) {
      const auto& pattern = passive_mix_pattern();
      if (std::find(pattern.begin(), pattern.end(), p.kind) == pattern.end()) {
        infeasible("unknown passive-mix kind '" + p.kind + "'");
      }
    }
    if (p.width < 12) infeasible("passive-mix needs width >= 12");
  } else if (p.family == "decoy") {
    if (p.candidates > 8) infeasible("decoy supports at most 8 candidates");
  } else {
    infeasible("unknown family '" + p.family + "'");
  }
}

}  // namespace

const std::vector<std::string>& passive_mix_pattern() {
  static const std::vector<std::string> pattern{
      "safe-shortcut",     "danger-shortcut", "safe-shortcut", "safe-chokepoint", "safe-shortcut",
      "chokepoint-danger", "safe-shortcut",   "safe-shortcut", "goal-ambiguity",  "safe-shortcut"};
  return pattern;
}

GenParams parse_gen_params(std::string_view spec) {
  GenParams p;
  std::string text(spec);
  std::stringstream ss(text);
  std::string item;
  auto to_int = [](const std::string& key, const std::string& v) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size()) infeasible(key + ": expected an integer");
    return out;
  };
  auto to_double = [](const std::string& key, const std::string& v) {
    try {
      std::size_t pos = 0;
      double out = std::stod(v, &pos);
      if (pos != v.size()) infeasible(key + ": expected a number");
      return out;
    } catch (const std::logic_error&) {
      infeasible(key + ": expected a number");
    }
  };
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) infeasible("expected key=value, got '" + item + "'");
    const std::string key = item.substr(0, eq);
    const std::string value = item.substr(eq + 1);
    if (key == "family") p.family = value;
    else if (key == "width") p.width = to_int(key, value);
    else if (key == "height") p.height = to_int(key, value);
    else if (key == "regions") p.regions = to_int(key, value);
    else if (key == "off_path") p.off_path = to_double(key, value);
    else if (key == "candidates") p.candidates = to_int(key, value);
    else if (key == "obstacle_density" || key == "density") p.obstacle_density = to_double(key, value);
    else if (key == "kind") p.kind = value;
    else if (key == "count") p.count = to_int(key, value);
    else infeasible("unknown key '" + key + "'");
  }
  return p;
}

std::string to_string(const GenParams& p) {
  std::ostringstream out;
  out << "family=" << p.family << ",width=" << p.width << ",height=" << p.height
      << ",regions=" << p.regions << ",off_path=" << p.off_path << ",candidates=" << p.candidates
      << ",obstacle_density=" << p.obstacle_density;
  if (!p.kind.empty()) out << ",kind=" << p.kind;
  out << ",count=" << p.count;
  return out.str();
}

Scenario generate_scenario(std::uint64_t seed, const GenParams& params) {
  check_params(params);
  Rng rng(seed);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    std::optional<Scenario> sc;
    if (params.family == "shortcut") {
      sc = try_shortcut(params, rng, scenario_id("shortcut", seed));
    } else if (params.family == "passive-mix") {
      const auto& pattern = passive_mix_pattern();
      const std::string kind = params.kind.empty() ? pattern[seed % pattern.size()] : params.kind;
      sc = try_passive_mix(params, rng, scenario_id(kind, seed), kind);
    } else {
      sc = try_decoy(params, rng, scenario_id("decoy", seed));
    }
    if (sc) {
      validate(*sc);
      return std::move(*sc);
    }
  }
  infeasible("could not realize '" + to_string(params) + "' for seed " + std::to_string(seed));
}

std::vector<Scenario> generate_suite(std::uint64_t seed, int count, const GenParams& params) {
  if (count < 1) infeasible("count must be >= 1");
  std::vector<Scenario> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out.push_back(generate_scenario(seed + static_cast<std::uint64_t>(i), params));
  }
  return out;
}

}  // namespace mintops::world
