#include "mintops/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mintops/errors.hpp"

namespace mintops::world {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr double kProbTolerance = 1e-9;
constexpr std::string_view kGoalGapPrefix = "goal:";

[[noreturn]] void parse_fail(const std::string& field, const std::string& what) {
  throw ParseError(field + ": " + what);
}

[[noreturn]] void invalid(const std::string& field, const std::string& what) {
  throw ValidationError(field + ": " + what);
}

const json& require(const json& obj, const char* key, const std::string& path) {
  if (!obj.is_object()) parse_fail(path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) parse_fail(path + "." + key, "missing");
  return *it;
}

int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) parse_fail(path, "expected an integer");
  return v.get<int>();
}

double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) parse_fail(path, "expected a number");
  return v.get<double>();
}

std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) parse_fail(path, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& path) {
  if (!v.is_boolean()) parse_fail(path, "expected a boolean");
  return v.get<bool>();
}

const json& as_array(const json& v, const std::string& path) {
  if (!v.is_array()) parse_fail(path, "expected an array");
  return v;
}

Coord as_coord(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) parse_fail(path, "expected [x, y]");
  return {as_int(v[0], path + "[0]"), as_int(v[1], path + "[1]")};
}

std::map<std::string, std::string> as_string_map(const json& v, const std::string& path) {
  if (!v.is_object()) parse_fail(path, "expected an object");
  std::map<std::string, std::string> out;
  for (const auto& [k, val] : v.items()) out[k] = as_string(val, path + "." + k);
  return out;
}

std::string indexed(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

ordered_json coord_json(Coord c) { return ordered_json::array({c.x, c.y}); }

}  // namespace

std::string_view to_string(Action a) {
  switch (a) {
    case Action::Visit: return "Visit";
    case Action::Pickup: return "Pickup";
    case Action::Deliver: return "Deliver";
  }
  return "Visit";
}

std::optional<Action> parse_action(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (lower == "visit") return Action::Visit;
  if (lower == "pickup") return Action::Pickup;
  if (lower == "deliver") return Action::Deliver;
  return std::nullopt;
}

const WorldObject* Scene::find_object(std::string_view id) const {
  for (const auto& o : objects) {
    if (o.id == id) return &o;
  }
  return nullptr;
}

const UncertainRegion* Scene::find_region(std::string_view id) const {
  for (const auto& r : regions) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

std::string goal_gap_id(std::size_t step) {
  return std::string(kGoalGapPrefix) + std::to_string(step);
}

std::string gap_id(const KnowledgeGap& gap) {
  if (const auto* o = std::get_if<ObstacleGap>(&gap)) return o->region_id;
  return goal_gap_id(std::get<GoalGap>(gap).step_index);
}

std::size_t GapBelief::argmax() const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i) {
    if (probs[i] > probs[best] || (probs[i] == probs[best] && options[i] < options[best])) {
      best = i;
    }
  }
  return best;
}

std::size_t GapBelief::live_count() const {
  return static_cast<std::size_t>(
      std::count_if(probs.begin(), probs.end(), [](double p) { return p > 0.0; }));
}

const GapBelief* Beliefs::find(std::string_view id) const {
  for (const auto& g : gaps) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

GapBelief* Beliefs::find(std::string_view id) {
  for (auto& g : gaps) {
    if (g.id == id) return &g;
  }
  return nullptr;
}

Beliefs make_beliefs(const Scene& scene, const std::vector<KnowledgeGap>& gaps) {
  Beliefs beliefs;
  for (const auto& gap : gaps) {
    GapBelief b;
    b.id = gap_id(gap);
    if (const auto* o = std::get_if<ObstacleGap>(&gap)) {
      const auto* region = scene.find_region(o->region_id);
      if (region == nullptr) invalid("gaps", "unknown region " + o->region_id);
      b.kind = GapKind::Obstacle;
      b.region_id = o->region_id;
      b.safe_index = region->traversable_index();
      for (const auto& h : region->hypotheses) {
        b.options.push_back(h.name);
        b.probs.push_back(h.prior);
      }
    } else {
      const auto& g = std::get<GoalGap>(gap);
      b.kind = GapKind::Goal;
      b.step = g.step_index;
      b.options = g.candidates;
      b.probs = g.weights;
    }
    beliefs.gaps.push_back(std::move(b));
  }
  return beliefs;
}

// ---------------------------------------------------------------------------
// Loading

Scenario load_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("document: ") + e.what());
  }
  if (!doc.is_object()) parse_fail("document", "expected a JSON object");

  Scenario sc;
  Scene& scene = sc.scene;
  if (auto it = doc.find("id"); it != doc.end()) scene.id = as_string(*it, "id");

  const json& grid = require(doc, "grid", "");
  scene.grid.width = as_int(require(grid, "width", "grid"), "grid.width");
  scene.grid.height = as_int(require(grid, "height", "grid"), "grid.height");
  if (scene.grid.width < 1 || scene.grid.height < 1) {
    invalid("grid", "width and height must be >= 1");
  }
  scene.grid.cells.assign(
      static_cast<std::size_t>(scene.grid.width) * static_cast<std::size_t>(scene.grid.height),
      Terrain::Free);
  if (auto it = grid.find("obstacles"); it != grid.end()) {
    const json& obs = as_array(*it, "grid.obstacles");
    for (std::size_t i = 0; i < obs.size(); ++i) {
      const std::string path = indexed("grid.obstacles", i);
      Coord c = as_coord(obs[i], path);
      if (!scene.grid.in_bounds(c)) invalid(path, "cell " + to_string(c) + " out of bounds");
      scene.grid.cells[static_cast<std::size_t>(c.y) * static_cast<std::size_t>(scene.grid.width) +
                       static_cast<std::size_t>(c.x)] = Terrain::Obstacle;
    }
  }

  const json& objects = as_array(require(doc, "objects", ""), "objects");
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string path = indexed("objects", i);
    WorldObject o;
    o.id = as_string(require(objects[i], "id", path), path + ".id");
    o.label = as_string(require(objects[i], "label", path), path + ".label");
    if (auto it = objects[i].find("attributes"); it != objects[i].end()) {
      o.attributes = as_string_map(*it, path + ".attributes");
    }
    o.cell = as_coord(require(objects[i], "cell", path), path + ".cell");
    scene.objects.push_back(std::move(o));
  }

  if (auto it = doc.find("regions"); it != doc.end()) {
    const json& regions = as_array(*it, "regions");
    for (std::size_t i = 0; i < regions.size(); ++i) {
      const std::string path = indexed("regions", i);
      const json& rj = regions[i];
      UncertainRegion r;
      r.id = as_string(require(rj, "id", path), path + ".id");
      r.label = r.id;
      if (auto lit = rj.find("label"); lit != rj.end()) r.label = as_string(*lit, path + ".label");
      const json& cells = as_array(require(rj, "cells", path), path + ".cells");
      for (std::size_t k = 0; k < cells.size(); ++k) {
        r.cells.push_back(as_coord(cells[k], indexed(path + ".cells", k)));
      }
      const json& hyps = as_array(require(rj, "hypotheses", path), path + ".hypotheses");
      if (hyps.size() != 2) {
        invalid("regions[" + r.id + "].hypotheses", "exactly 2 hypotheses required");
      }
      for (std::size_t k = 0; k < 2; ++k) {
        const std::string hp = indexed(path + ".hypotheses", k);
        r.hypotheses[k].name = as_string(require(hyps[k], "name", hp), hp + ".name");
        r.hypotheses[k].traversable =
            as_bool(require(hyps[k], "traversable", hp), hp + ".traversable");
        r.hypotheses[k].prior = as_number(require(hyps[k], "prior", hp), hp + ".prior");
      }
      const int truth = as_int(require(rj, "truth", path), path + ".truth");
      if (truth != 0 && truth != 1) invalid("regions[" + r.id + "].truth", "must be 0 or 1");
      sc.truth.region_truth[r.id] = static_cast<std::size_t>(truth);
      scene.regions.push_back(std::move(r));
    }
  }

  const json& instruction = require(doc, "instruction", "");
  const json& steps = as_array(require(instruction, "steps", "instruction"), "instruction.steps");
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const std::string path = indexed("instruction.steps", i);
    TaskStep step;
    const std::string action = as_string(require(steps[i], "action", path), path + ".action");
    auto parsed = parse_action(action);
    if (!parsed) invalid(path + ".action", "unknown action '" + action + "'");
    step.action = *parsed;
    if (auto it = steps[i].find("constraints"); it != steps[i].end()) {
      step.constraints = as_string_map(*it, path + ".constraints");
    }
    scene.instruction.steps.push_back(std::move(step));
  }

  scene.start = as_coord(require(doc, "start", ""), "start");

  const json& goals = as_array(require(doc, "truth_goals", ""), "truth_goals");
  for (std::size_t i = 0; i < goals.size(); ++i) {
    sc.truth.truth_goals.push_back(as_string(goals[i], indexed("truth_goals", i)));
  }
  scene.step_budget = as_int(require(doc, "step_budget", ""), "step_budget");

  if (auto it = doc.find("goal_weights"); it != doc.end()) {
    const json& gw = as_array(*it, "goal_weights");
    for (std::size_t i = 0; i < gw.size(); ++i) {
      const std::string path = indexed("goal_weights", i);
      GoalWeights w;
      const int step = as_int(require(gw[i], "step", path), path + ".step");
      if (step < 0) invalid(path + ".step", "must be >= 0");
      w.step = static_cast<std::size_t>(step);
      const json& weights = require(gw[i], "weights", path);
      if (!weights.is_object()) parse_fail(path + ".weights", "expected an object");
      for (const auto& [k, v] : weights.items()) {
        w.weights[k] = as_number(v, path + ".weights." + k);
      }
      scene.goal_weights.push_back(std::move(w));
    }
  }

  validate(sc);
  return sc;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read scenario file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  Scenario sc = load_scenario(buf.str());
  return sc;
}

void validate(const Scenario& sc) {
  const Scene& scene = sc.scene;
  const GridMap& grid = scene.grid;
  if (grid.width < 1 || grid.height < 1) invalid("grid", "width and height must be >= 1");
  if (grid.cells.size() !=
      static_cast<std::size_t>(grid.width) * static_cast<std::size_t>(grid.height)) {
    invalid("grid.cells", "expected width*height entries");
  }

  std::set<std::string> object_ids;
  std::set<std::string> attribute_keys{"label"};
  for (const auto& o : scene.objects) {
    if (o.id.empty()) invalid("objects", "empty object id");
    if (!object_ids.insert(o.id).second) invalid("objects[" + o.id + "]", "duplicate id");
    if (!grid.in_bounds(o.cell)) {
      invalid("objects[" + o.id + "].cell", "cell " + to_string(o.cell) + " out of bounds");
    }
    for (const auto& [k, v] : o.attributes) attribute_keys.insert(k);
  }

  std::set<std::string> region_ids;
  for (const auto& r : scene.regions) {
    const std::string path = "regions[" + r.id + "]";
    if (r.id.empty()) invalid("regions", "empty region id");
    if (r.id.starts_with(kGoalGapPrefix)) invalid(path + ".id", "reserved prefix 'goal:'");
    if (!region_ids.insert(r.id).second) invalid(path, "duplicate id");
    if (r.cells.empty()) invalid(path + ".cells", "region has no cells");
    for (const auto& c : r.cells) {
      if (!grid.in_bounds(c)) invalid(path + ".cells", "cell " + to_string(c) + " out of bounds");
    }
    if (r.hypotheses[0].traversable == r.hypotheses[1].traversable) {
      invalid(path + ".hypotheses", "traversable flags must differ");
    }
    for (const auto& h : r.hypotheses) {
      if (!(h.prior > 0.0 && h.prior < 1.0)) invalid(path + ".hypotheses", "prior outside (0,1)");
    }
    if (std::abs(r.hypotheses[0].prior + r.hypotheses[1].prior - 1.0) > kProbTolerance) {
      invalid(path + ".hypotheses", "priors must sum to 1");
    }
    auto t = sc.truth.region_truth.find(r.id);
    if (t == sc.truth.region_truth.end() || t->second > 1) invalid(path + ".truth", "missing or invalid");
  }
  if (sc.truth.region_truth.size() != scene.regions.size()) {
    invalid("regions", "truth recorded for an unknown region");
  }

  if (scene.instruction.steps.empty()) invalid("instruction.steps", "at least one step required");
  for (std::size_t i = 0; i < scene.instruction.steps.size(); ++i) {
    for (const auto& [k, v] : scene.instruction.steps[i].constraints) {
      if (!attribute_keys.contains(k)) {
        invalid(indexed("instruction.steps", i) + ".constraints." + k, "unknown attribute key");
      }
    }
  }

  if (!grid.in_bounds(scene.start)) invalid("start", "out of bounds");
  if (grid.at(scene.start) == Terrain::Obstacle) invalid("start", "start cell is an obstacle");

  if (sc.truth.truth_goals.size() != scene.instruction.steps.size()) {
    invalid("truth_goals", "expected one goal per instruction step");
  }
  for (std::size_t i = 0; i < sc.truth.truth_goals.size(); ++i) {
    const auto* o = scene.find_object(sc.truth.truth_goals[i]);
    const std::string path = indexed("truth_goals", i);
    if (o == nullptr) invalid(path, "unknown object id '" + sc.truth.truth_goals[i] + "'");
    if (!satisfies(*o, scene.instruction.steps[i].constraints)) {
      invalid(path, "object '" + o->id + "' does not satisfy the step constraints");
    }
  }
  if (scene.step_budget < 0) invalid("step_budget", "must be >= 0");

  std::set<std::size_t> weighted_steps;
  for (const auto& gw : scene.goal_weights) {
    const std::string path = "goal_weights[step " + std::to_string(gw.step) + "]";
    if (gw.step >= scene.instruction.steps.size()) invalid(path, "step out of range");
    if (!weighted_steps.insert(gw.step).second) invalid(path, "duplicate step");
    auto candidates = step_candidates(scene, gw.step);
    if (gw.weights.size() != candidates.size()) invalid(path, "weights must cover every candidate");
    double total = 0.0;
    for (const auto& c : candidates) {
      auto it = gw.weights.find(c);
      if (it == gw.weights.end()) invalid(path, "missing weight for candidate '" + c + "'");
      if (!(it->second > 0.0)) invalid(path, "weights must be positive");
      total += it->second;
    }
    if (std::abs(total - 1.0) > kProbTolerance) invalid(path, "weights must sum to 1");
  }
}

std::string serialize_scenario(const Scenario& sc) {
  const Scene& scene = sc.scene;
  ordered_json doc;
  if (!scene.id.empty()) doc["id"] = scene.id;

  ordered_json obstacles = ordered_json::array();
  for (int y = 0; y < scene.grid.height; ++y) {
    for (int x = 0; x < scene.grid.width; ++x) {
      if (scene.grid.at({x, y}) == Terrain::Obstacle) obstacles.push_back(coord_json({x, y}));
    }
  }
  doc["grid"] = {{"width", scene.grid.width}, {"height", scene.grid.height}, {"obstacles", obstacles}};

  ordered_json objects = ordered_json::array();
  for (const auto& o : scene.objects) {
    ordered_json attrs = ordered_json::object();
    for (const auto& [k, v] : o.attributes) attrs[k] = v;
    objects.push_back({{"id", o.id}, {"label", o.label}, {"attributes", attrs}, {"cell", coord_json(o.cell)}});
  }
  doc["objects"] = objects;

  ordered_json regions = ordered_json::array();
  for (const auto& r : scene.regions) {
    ordered_json cells = ordered_json::array();
    for (const auto& c : r.cells) cells.push_back(coord_json(c));
    ordered_json hyps = ordered_json::array();
    for (const auto& h : r.hypotheses) {
      hyps.push_back({{"name", h.name}, {"traversable", h.traversable}, {"prior", h.prior}});
    }
    regions.push_back({{"id", r.id},
                       {"label", r.label},
                       {"cells", cells},
                       {"hypotheses", hyps},
                       {"truth", sc.truth.region_truth.at(r.id)}});
  }
  doc["regions"] = regions;

  ordered_json steps = ordered_json::array();
  for (const auto& s : scene.instruction.steps) {
    ordered_json cons = ordered_json::object();
    for (const auto& [k, v] : s.constraints) cons[k] = v;
    steps.push_back({{"action", std::string(to_string(s.action))}, {"constraints", cons}});
  }
  doc["instruction"] = {{"steps", steps}};
  doc["start"] = coord_json(scene.start);
  doc["truth_goals"] = sc.truth.truth_goals;
  doc["step_budget"] = scene.step_budget;

  if (!scene.goal_weights.empty()) {
    ordered_json gws = ordered_json::array();
    for (const auto& gw : scene.goal_weights) {
      ordered_json w = ordered_json::object();
      for (const auto& [k, v] : gw.weights) w[k] = v;
      gws.push_back({{"step", gw.step}, {"weights", w}});
    }
    doc["goal_weights"] = gws;
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Gap identification and temporary maps

bool satisfies(const WorldObject& object, const Constraints& constraints) {
  for (const auto& [key, value] : constraints) {
    if (key == "label") {
      if (object.label != value) return false;
      continue;
    }
    auto it = object.attributes.find(key);
    if (it == object.attributes.end() || it->second != value) return false;
  }
  return true;
}

std::vector<std::string> step_candidates(const Scene& scene, std::size_t step) {
  std::vector<std::string> out;
  const auto& constraints = scene.instruction.steps.at(step).constraints;
  for (const auto& o : scene.objects) {
    if (satisfies(o, constraints)) out.push_back(o.id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<KnowledgeGap> identify_gaps(const Scene& scene) {
  std::vector<KnowledgeGap> gaps;
  std::vector<std::string> region_ids;
  for (const auto& r : scene.regions) region_ids.push_back(r.id);
  std::sort(region_ids.begin(), region_ids.end());
  for (auto& id : region_ids) gaps.emplace_back(ObstacleGap{std::move(id)});

  for (std::size_t step = 0; step < scene.instruction.steps.size(); ++step) {
    auto candidates = step_candidates(scene, step);
    if (candidates.empty()) {
      invalid(indexed("instruction.steps", step), "no object satisfies the constraints");
    }
    if (candidates.size() < 2) continue;
    GoalGap g;
    g.step_index = step;
    g.weights.assign(candidates.size(), 1.0 / static_cast<double>(candidates.size()));
    for (const auto& gw : scene.goal_weights) {
      if (gw.step != step) continue;
      for (std::size_t i = 0; i < candidates.size(); ++i) g.weights[i] = gw.weights.at(candidates[i]);
    }
    g.candidates = std::move(candidates);
    gaps.emplace_back(std::move(g));
  }
  return gaps;
}

SemanticMap apply_hypothesis(const Scene& scene, const Assignment& assignment,
                             DefaultPolicy unassigned) {
  for (const auto& [id, choice] : assignment) {
    if (const auto* r = scene.find_region(id)) {
      if (choice > 1) invalid("assignment." + id, "hypothesis index out of range");
      (void)r;
      continue;
    }
    bool is_goal = false;
    if (id.starts_with(kGoalGapPrefix)) {
      try {
        std::size_t pos = 0;
        const auto step = std::stoul(id.substr(kGoalGapPrefix.size()), &pos);
        is_goal = pos + kGoalGapPrefix.size() == id.size() && step < scene.instruction.steps.size();
      } catch (const std::exception&) {
        is_goal = false;
      }
    }
    if (!is_goal) invalid("assignment." + id, "unknown gap id");
  }

  SemanticMap map(scene.grid.width, scene.grid.height);
  for (int y = 0; y < scene.grid.height; ++y) {
    for (int x = 0; x < scene.grid.width; ++x) {
      if (scene.grid.at({x, y}) == Terrain::Obstacle) map.set_blocked({x, y}, true);
    }
  }
  for (const auto& r : scene.regions) {
    std::size_t choice = unassigned == DefaultPolicy::Conservative ? r.blocked_index()
                                                                  : r.traversable_index();
    if (auto it = assignment.find(r.id); it != assignment.end()) choice = it->second;
    if (!r.hypotheses[choice].traversable) {
      for (const auto& c : r.cells) map.set_blocked(c, true);
    }
  }
  return map;
}

Assignment truth_assignment(const Scenario& sc) {
  Assignment a;
  for (const auto& [id, idx] : sc.truth.region_truth) a[id] = idx;
  for (const auto& gap : identify_gaps(sc.scene)) {
    if (const auto* g = std::get_if<GoalGap>(&gap)) {
      const auto& truth = sc.truth.truth_goals.at(g->step_index);
      auto it = std::find(g->candidates.begin(), g->candidates.end(), truth);
      a[goal_gap_id(g->step_index)] = static_cast<std::size_t>(it - g->candidates.begin());
    }
  }
  return a;
}

SemanticMap truth_map(const Scenario& sc) {
  Assignment regions;
  for (const auto& [id, idx] : sc.truth.region_truth) regions[id] = idx;
  return apply_hypothesis(sc.scene, regions, DefaultPolicy::Conservative);
}

}  // namespace mintops::world
