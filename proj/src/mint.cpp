#include "mintops/mint.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "mintops/errors.hpp"

namespace mintops::mint {

namespace {

using planner::TaskPlan;
using world::Assignment;
using world::Beliefs;
using world::GapBelief;
using world::GapKind;
using world::Scene;

constexpr double kMassTolerance = 1e-9;
constexpr double kVacuous = 1e-12;

double abs_cost_gap(double a, double b) {
  if (std::isinf(a) && std::isinf(b)) return 0.0;
  return std::abs(a - b);
}

std::vector<std::vector<Coord>> plan_key(const std::optional<TaskPlan>& plan) {
  return planner::plan_signature(plan);
}

/// Plans hypothesis contexts for one (scene, beliefs) pair, memoized on the
/// resolved region choices and goal choice.
class ContextPlanner {
 public:
  ContextPlanner(const Scene& scene, const Beliefs& beliefs) : scene_(scene), beliefs_(beliefs) {
    for (std::size_t step = 0; step < scene.instruction.steps.size(); ++step) {
      auto c = world::step_candidates(scene, step);
      fixed_goals_.push_back(c.empty() ? std::string{} : c.front());
    }
  }

  const std::optional<TaskPlan>& plan(const Assignment& context) {
    Assignment regions;
    std::string key;
    for (const auto& r : scene_.regions) {
      std::size_t choice = r.blocked_index();
      const GapBelief* b = beliefs_.find(r.id);
      if (b != nullptr && b->resolved) {
        choice = b->value;
      } else if (auto it = context.find(r.id); it != context.end()) {
        choice = it->second;
      }
      regions[r.id] = choice;
      key.push_back(static_cast<char>('0' + choice));
    }
    std::vector<std::string> goals;
    for (std::size_t step = 0; step < fixed_goals_.size(); ++step) {
      const GapBelief* b = beliefs_.find(world::goal_gap_id(step));
      std::string goal = fixed_goals_[step];
      if (b != nullptr) {
        std::size_t idx = b->argmax();
        if (b->resolved) {
          idx = b->value;
        } else if (auto it = context.find(b->id); it != context.end()) {
          idx = it->second;
        }
        goal = b->options.at(idx);
      }
      key += '|';
      key += goal;
      goals.push_back(std::move(goal));
    }
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    auto map = world::apply_hypothesis(scene_, regions, world::DefaultPolicy::Conservative);
    return cache_.emplace(key, planner::plan_task(scene_, map, goals)).first->second;
  }

  CriticalityReport assess(const std::string& gap_id, const Assignment& context,
                           const Config& config) {
    const GapBelief* b = beliefs_.find(gap_id);
    if (b == nullptr) throw ValidationError("assess_criticality: unknown gap id '" + gap_id + "'");

    std::vector<std::optional<TaskPlan>> plans;
    for (std::size_t i = 0; i < b->options.size(); ++i) {
      if (b->probs[i] <= 0.0) continue;
      Assignment a = context;
      a[gap_id] = i;
      plans.push_back(plan(a));
    }

    CriticalityReport report;
    for (std::size_t i = 0; i < plans.size(); ++i) {
      for (std::size_t j = i + 1; j < plans.size(); ++j) {
        report.cost_gap = std::max(
            report.cost_gap, abs_cost_gap(planner::plan_cost(plans[i]), planner::plan_cost(plans[j])));
        report.divergence =
            std::max(report.divergence, planner::plan_divergence(plans[i], plans[j]));
      }
    }
    bool significant = report.cost_gap > config.delta_c || report.divergence > config.delta_d;
    if (b->kind == GapKind::Goal && goal_entropy(b->probs) < config.h_min) significant = false;
    report.verdict = significant ? Criticality::Critical : Criticality::Irrelevant;
    return report;
  }

 private:
  const Scene& scene_;
  const Beliefs& beliefs_;
  std::vector<std::string> fixed_goals_;
  std::map<std::string, std::optional<TaskPlan>> cache_;
};

MintNode expand(ContextPlanner& planner, const Beliefs& beliefs, const Config& config,
                Assignment assignment, double mass, int depth) {
  MintNode node;
  node.mass = mass;

  if (depth < config.max_branch_gaps) {
    const GapBelief* best = nullptr;
    CriticalityReport best_report;
    for (const auto& gap : beliefs.gaps) {
      if (gap.resolved || gap.live_count() < 2 || assignment.contains(gap.id)) continue;
      auto report = planner.assess(gap.id, assignment, config);
      if (report.verdict != Criticality::Critical) continue;
      const bool better =
          best == nullptr || report.cost_gap > best_report.cost_gap ||
          (report.cost_gap == best_report.cost_gap &&
           (report.divergence > best_report.divergence ||
            (report.divergence == best_report.divergence && gap.id < best->id)));
      if (better) {
        best = &gap;
        best_report = report;
      }
    }
    if (best != nullptr) {
      Internal internal;
      internal.gap_id = best->id;
      for (std::size_t i = 0; i < best->options.size(); ++i) {
        if (best->probs[i] <= 0.0) continue;
        Assignment child = assignment;
        child[best->id] = i;
        internal.children.push_back(
            expand(planner, beliefs, config, std::move(child), mass * best->probs[i], depth + 1));
      }
      node.assignment = std::move(assignment);
      node.branch = std::move(internal);
      return node;
    }
  }

  Leaf leaf;
  leaf.plan = planner.plan(assignment);
  leaf.cost = planner::plan_cost(leaf.plan);
  node.assignment = std::move(assignment);
  node.branch = std::move(leaf);
  return node;
}

void collect_leaves(const MintNode& node, std::vector<const MintNode*>& out) {
  if (node.is_leaf()) {
    out.push_back(&node);
    return;
  }
  for (const auto& c : node.internal().children) collect_leaves(c, out);
}

void collect_branched(const MintNode& node, std::set<std::string>& out) {
  if (node.is_leaf()) return;
  out.insert(node.internal().gap_id);
  for (const auto& c : node.internal().children) collect_branched(c, out);
}

bool consistent(const GapBelief& gap, const Query& query, std::size_t option, Answer answer) {
  bool yes;
  if (query.kind == QueryKind::RegionTraversable) {
    yes = option == gap.safe_index;
  } else {
    yes = std::binary_search(query.subset.begin(), query.subset.end(), gap.options.at(option));
  }
  return yes == (answer == Answer::Yes);
}

std::optional<MintNode> condition_node(const MintNode& node, const GapBelief& gap,
                                       const Query& query, Answer answer, double p_answer) {
  if (node.is_leaf()) {
    double likelihood = p_answer;
    if (auto it = node.assignment.find(gap.id); it != node.assignment.end()) {
      likelihood = consistent(gap, query, it->second, answer) ? 1.0 : 0.0;
    }
    if (likelihood <= 0.0) return std::nullopt;
    MintNode out = node;
    out.mass = node.mass * likelihood / p_answer;
    return out;
  }
  Internal internal;
  internal.gap_id = node.internal().gap_id;
  double mass = 0.0;
  for (const auto& child : node.internal().children) {
    if (auto c = condition_node(child, gap, query, answer, p_answer)) {
      mass += c->mass;
      internal.children.push_back(std::move(*c));
    }
  }
  if (internal.children.empty()) return std::nullopt;
  MintNode out;
  out.assignment = node.assignment;
  out.mass = mass;
  out.branch = std::move(internal);
  return out;
}

bool node_conserves_mass(const MintNode& node) {
  if (node.is_leaf()) return node.mass >= 0.0;
  double sum = 0.0;
  for (const auto& c : node.internal().children) {
    if (!node_conserves_mass(c)) return false;
    sum += c.mass;
  }
  return std::abs(sum - node.mass) <= kMassTolerance;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += '+';
    out += id;
  }
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

void Config::validate() const {
  auto check = [](double v, const char* name) {
    if (!(v >= 0.0)) throw ValidationError(std::string("config.") + name + ": must be >= 0");
  };
  check(delta_c, "delta_c");
  check(delta_d, "delta_d");
  check(h_min, "h_min");
  check(eps_ig, "eps_ig");
  if (max_queries < 0) throw ValidationError("config.max_queries: must be >= 0");
  if (max_branch_gaps < 1) throw ValidationError("config.max_branch_gaps: must be >= 1");
}

std::vector<const MintNode*> MintTree::leaves() const {
  std::vector<const MintNode*> out;
  collect_leaves(root, out);
  return out;
}

std::set<std::string> MintTree::branched_gaps() const {
  std::set<std::string> out;
  collect_branched(root, out);
  return out;
}

std::size_t MintTree::distinct_plans() const {
  std::set<std::vector<std::vector<Coord>>> keys;
  for (const auto* leaf : leaves()) keys.insert(plan_key(leaf->leaf().plan));
  return keys.size();
}

std::string Query::gap_id() const {
  return kind == QueryKind::RegionTraversable ? region_id : world::goal_gap_id(step);
}

Query region_query(const std::string& region_id) {
  Query q;
  q.kind = QueryKind::RegionTraversable;
  q.region_id = region_id;
  q.id = "region:" + region_id;
  return q;
}

Query goal_query(std::size_t step, std::vector<std::string> subset,
                 std::optional<std::pair<std::string, std::string>> attribute) {
  Query q;
  q.kind = QueryKind::GoalIs;
  q.step = step;
  std::sort(subset.begin(), subset.end());
  q.subset = std::move(subset);
  q.id = world::goal_gap_id(step) + ":";
  if (q.subset.size() == 1) {
    q.id += q.subset.front();
  } else if (attribute) {
    q.id += attribute->first + "=" + attribute->second;
    q.attribute = std::move(attribute);
  } else {
    q.id += "{" + join_ids(q.subset) + "}";
  }
  return q;
}

double goal_entropy(std::span<const double> weights) {
  double h = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("goal_entropy: negative weight");
    if (w > 0.0) h -= w * std::log2(w);
  }
  return h;
}

std::optional<TaskPlan> plan_in_context(const Scene& scene, const Beliefs& beliefs,
                                        const Assignment& assignment) {
  ContextPlanner planner(scene, beliefs);
  return planner.plan(assignment);
}

std::optional<TaskPlan> risk_averse_plan(const Scene& scene, const Beliefs& beliefs) {
  return plan_in_context(scene, beliefs, {});
}

CriticalityReport assess_criticality(const Scene& scene, const Beliefs& beliefs,
                                     const std::string& gap_id, const Assignment& context,
                                     const Config& config) {
  ContextPlanner planner(scene, beliefs);
  return planner.assess(gap_id, context, config);
}

MintTree build_tree(const Scene& scene, const Beliefs& beliefs, const Config& config) {
  ContextPlanner planner(scene, beliefs);
  return MintTree{expand(planner, beliefs, config, {}, 1.0, 0)};
}

double tree_entropy(const MintTree& tree) {
  std::map<std::vector<std::vector<Coord>>, double> merged;
  double total = 0.0;
  for (const auto* leaf : tree.leaves()) {
    merged[plan_key(leaf->leaf().plan)] += leaf->mass;
    total += leaf->mass;
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    throw std::domain_error("tree_entropy: leaf masses sum to " + std::to_string(total));
  }
  double h = 0.0;
  for (const auto& [key, p] : merged) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

std::vector<Query> enumerate_queries(const Scene& scene, const MintTree& tree,
                                     const Beliefs& beliefs) {
  const auto branched = tree.branched_gaps();
  std::vector<Query> out;
  for (const auto& gap : beliefs.gaps) {
    if (gap.resolved || gap.live_count() < 2) continue;
    if (gap.kind == GapKind::Obstacle) {
      if (branched.contains(gap.id)) out.push_back(region_query(gap.region_id));
      continue;
    }
    std::vector<std::string> live;
    for (std::size_t i = 0; i < gap.options.size(); ++i) {
      if (gap.probs[i] > 0.0) live.push_back(gap.options[i]);
    }
    std::set<std::vector<std::string>> seen;
    for (const auto& id : live) {
      seen.insert({id});
      out.push_back(goal_query(gap.step, {id}));
    }
    // key -> value -> members, both levels sorted
    std::map<std::string, std::map<std::string, std::vector<std::string>>> groups;
    for (const auto& id : live) {
      const auto* obj = scene.find_object(id);
      if (obj == nullptr) continue;
      for (const auto& [key, value] : obj->attributes) groups[key][value].push_back(id);
    }
    for (auto& [key, by_value] : groups) {
      for (auto& [value, members] : by_value) {
        if (members.size() < 2 || members.size() >= live.size()) continue;
        std::sort(members.begin(), members.end());
        if (!seen.insert(members).second) continue;
        out.push_back(goal_query(gap.step, members, std::make_pair(key, value)));
      }
    }
  }
  std::erase_if(out, [&](const Query& q) { return beliefs.unanswerable.contains(q.id); });
  std::sort(out.begin(), out.end(), [](const Query& a, const Query& b) { return a.id < b.id; });
  return out;
}

double yes_probability(const Beliefs& beliefs, const Query& query) {
  const GapBelief* gap = beliefs.find(query.gap_id());
  if (gap == nullptr) throw ValidationError("query " + query.id + ": unknown gap");
  if (query.kind == QueryKind::RegionTraversable) return gap->probs.at(gap->safe_index);
  double p = 0.0;
  for (std::size_t i = 0; i < gap->options.size(); ++i) {
    if (std::binary_search(query.subset.begin(), query.subset.end(), gap->options[i])) {
      p += gap->probs[i];
    }
  }
  return p;
}

std::optional<MintTree> condition_tree(const MintTree& tree, const Beliefs& beliefs,
                                       const Query& query, Answer answer) {
  if (answer == Answer::Unknown) return tree;
  const GapBelief* gap = beliefs.find(query.gap_id());
  if (gap == nullptr) throw ValidationError("query " + query.id + ": unknown gap");
  const double p_yes = yes_probability(beliefs, query);
  const double p_answer = answer == Answer::Yes ? p_yes : 1.0 - p_yes;
  if (p_answer <= kVacuous) return std::nullopt;
  auto root = condition_node(tree.root, *gap, query, answer, p_answer);
  if (!root) return std::nullopt;
  return MintTree{std::move(*root)};
}

double information_gain(const MintTree& tree, const Beliefs& beliefs, const Query& query) {
  if (!tree.branched_gaps().contains(query.gap_id())) return 0.0;
  const double p_yes = yes_probability(beliefs, query);
  if (p_yes <= kVacuous || p_yes >= 1.0 - kVacuous) return 0.0;
  const double prior = tree_entropy(tree);
  const auto yes = condition_tree(tree, beliefs, query, Answer::Yes);
  const auto no = condition_tree(tree, beliefs, query, Answer::No);
  const double h_yes = yes ? tree_entropy(*yes) : 0.0;
  const double h_no = no ? tree_entropy(*no) : 0.0;
  return prior - (p_yes * h_yes + (1.0 - p_yes) * h_no);
}

namespace {

/// Expected cost of the plan that would be flown after the answer, before
/// any replanning of the tree.
double expected_resolved_cost(const Scene& scene, const MintTree& tree, const Beliefs& beliefs,
                              const Query& query) {
  const double p_yes = yes_probability(beliefs, query);
  double expected = 0.0;
  for (Answer answer : {Answer::Yes, Answer::No}) {
    const double p = answer == Answer::Yes ? p_yes : 1.0 - p_yes;
    if (p <= kVacuous) continue;
    const auto conditioned = condition_tree(tree, beliefs, query, answer);
    double cost = planner::kInfiniteCost;
    if (conditioned && conditioned->distinct_plans() == 1) {
      cost = conditioned->leaves().front()->leaf().cost;
    } else {
      cost = planner::plan_cost(risk_averse_plan(scene, update_beliefs(beliefs, query, answer)));
    }
    expected += p * cost;
  }
  return expected;
}

}  // namespace

std::optional<ScoredQuery> select_query(const Scene& scene, const MintTree& tree,
                                        const Beliefs& beliefs, const Config& config,
                                        int asked_count) {
  if (tree_entropy(tree) <= kVacuous) return std::nullopt;
  if (asked_count >= config.max_queries) return std::nullopt;

  std::vector<ScoredQuery> scored;
  double best_ig = -1.0;
  for (auto& q : enumerate_queries(scene, tree, beliefs)) {
    const double ig = information_gain(tree, beliefs, q);
    best_ig = std::max(best_ig, ig);
    scored.push_back({std::move(q), ig});
  }
  if (scored.empty() || best_ig <= config.eps_ig) return std::nullopt;

  std::optional<ScoredQuery> chosen;
  double chosen_cost = 0.0;
  for (auto& s : scored) {
    if (best_ig - s.ig_bits > kMassTolerance) continue;
    const double cost = expected_resolved_cost(scene, tree, beliefs, s.query);
    // Candidates arrive in id order, so strict improvement keeps the lowest id.
    if (!chosen || cost < chosen_cost) {
      chosen = s;
      chosen_cost = cost;
    }
  }
  return chosen;
}

world::Beliefs update_beliefs(const Beliefs& beliefs, const Query& query, Answer answer) {
  Beliefs out = beliefs;
  if (answer == Answer::Unknown) {
    out.unanswerable.insert(query.id);
    return out;
  }
  GapBelief* gap = out.find(query.gap_id());
  if (gap == nullptr) throw ValidationError("query " + query.id + ": unknown gap");

  std::vector<double> probs = gap->probs;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (!consistent(*gap, query, i, answer)) probs[i] = 0.0;
  }
  double total = 0.0;
  for (double p : probs) total += p;
  if (total <= 0.0) {
    throw ContradictionError("answer to " + query.id + " contradicts what is already known");
  }
  for (double& p : probs) p /= total;
  gap->probs = std::move(probs);
  if (gap->live_count() == 1) {
    gap->resolved = true;
    for (std::size_t i = 0; i < gap->probs.size(); ++i) {
      if (gap->probs[i] > 0.0) {
        gap->value = i;
        gap->probs[i] = 1.0;
      }
    }
  }
  return out;
}

PruneResult prune(const Scene& scene, const MintTree& tree, const Beliefs& beliefs,
                  const Query& query, Answer answer, const Config& config) {
  Beliefs updated = update_beliefs(beliefs, query, answer);
  if (answer == Answer::Unknown) return {tree, std::move(updated)};
  MintTree rebuilt = build_tree(scene, updated, config);
  return {std::move(rebuilt), std::move(updated)};
}

planner::TaskPlan best_plan(const Scene& scene, const MintTree& tree, const Beliefs& beliefs) {
  std::optional<TaskPlan> plan;
  if (tree.distinct_plans() == 1) {
    plan = tree.leaves().front()->leaf().plan;
  } else {
    plan = risk_averse_plan(scene, beliefs);
  }
  if (!plan) throw MissionInfeasible("no path on the risk-averse map");
  return *plan;
}

bool check_normalization(const MintTree& tree, const Beliefs& beliefs) {
  if (std::abs(tree.root.mass - 1.0) > kMassTolerance) return false;
  if (!node_conserves_mass(tree.root)) return false;
  double leaf_total = 0.0;
  for (const auto* leaf : tree.leaves()) leaf_total += leaf->mass;
  if (std::abs(leaf_total - 1.0) > kMassTolerance) return false;
  for (const auto& gap : beliefs.gaps) {
    double total = 0.0;
    for (double p : gap.probs) {
      if (p < 0.0) return false;
      total += p;
    }
    if (std::abs(total - 1.0) > kMassTolerance) return false;
    if (gap.resolved && gap.probs.at(gap.value) != 1.0) return false;
  }
  return true;
}

}  // namespace mintops::mint
