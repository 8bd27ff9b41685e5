#pragma once

#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "mintops/planner.hpp"
#include "mintops/world.hpp"

namespace mintops::mint {

struct Config {
  double delta_c = 2.0;   // cost threshold, steps
  double delta_d = 2.0;   // divergence threshold, cells
  double h_min = 0.5;     // goal-entropy threshold, bits
  double eps_ig = 1e-6;   // minimum information gain worth a question, bits
  int max_queries = 5;
  int max_branch_gaps = 6;

  /// Throws ValidationError naming the offending field.
  void validate() const;

  friend bool operator==(const Config&, const Config&) = default;
};

// ---------------------------------------------------------------------------
// Tree

struct MintNode;

struct Internal {
  std::string gap_id;
  std::vector<MintNode> children;  // one per live option of the gap
};

struct Leaf {
  std::optional<planner::TaskPlan> plan;  // nullopt: no path
  double cost = planner::kInfiniteCost;
};

struct MintNode {
  world::Assignment assignment;
  double mass = 1.0;
  std::variant<Internal, Leaf> branch;

  bool is_leaf() const { return std::holds_alternative<Leaf>(branch); }
  const Leaf& leaf() const { return std::get<Leaf>(branch); }
  const Internal& internal() const { return std::get<Internal>(branch); }
};

struct MintTree {
  MintNode root;

  std::vector<const MintNode*> leaves() const;
  std::set<std::string> branched_gaps() const;
  /// Number of distinct leaf cell sequences (all no-path leaves count as one).
  std::size_t distinct_plans() const;
};

// ---------------------------------------------------------------------------
// Queries

enum class QueryKind { RegionTraversable, GoalIs };

struct Query {
  QueryKind kind = QueryKind::RegionTraversable;
  std::string region_id;
  std::size_t step = 0;
  std::vector<std::string> subset;  // GoalIs: sorted candidate ids
  std::optional<std::pair<std::string, std::string>> attribute;  // set when subset is an attribute group
  std::string id;

  std::string gap_id() const;

  friend bool operator==(const Query&, const Query&) = default;
};

Query region_query(const std::string& region_id);
Query goal_query(std::size_t step, std::vector<std::string> subset,
                 std::optional<std::pair<std::string, std::string>> attribute = std::nullopt);

enum class Answer { Yes, No, Unknown };

struct ScoredQuery {
  Query query;
  double ig_bits = 0.0;
};

// ---------------------------------------------------------------------------
// Criticality

enum class Criticality { Critical, Irrelevant };

struct CriticalityReport {
  Criticality verdict = Criticality::Irrelevant;
  double cost_gap = 0.0;    // |C(h1) - C(h2)|, max over candidate pairs for goal gaps
  double divergence = 0.0;  // d(h1, h2), max over candidate pairs for goal gaps
};

// ---------------------------------------------------------------------------
// Operations

/// Shannon entropy in bits; zero weights contribute nothing.
/// Throws std::invalid_argument on a negative weight.
double goal_entropy(std::span<const double> weights);

/// Optimal plan for the context: the assignment and resolved beliefs where
/// given, otherwise unresolved regions blocked and goals at their most
/// probable candidate.
std::optional<planner::TaskPlan> plan_in_context(const world::Scene& scene,
                                                 const world::Beliefs& beliefs,
                                                 const world::Assignment& assignment);

std::optional<planner::TaskPlan> risk_averse_plan(const world::Scene& scene,
                                                  const world::Beliefs& beliefs);

CriticalityReport assess_criticality(const world::Scene& scene, const world::Beliefs& beliefs,
                                     const std::string& gap_id,
                                     const world::Assignment& context, const Config& config);

MintTree build_tree(const world::Scene& scene, const world::Beliefs& beliefs,
                    const Config& config);

/// Entropy over distinct leaf plans. Throws std::domain_error when leaf
/// masses do not sum to 1.
double tree_entropy(const MintTree& tree);

std::vector<Query> enumerate_queries(const world::Scene& scene, const MintTree& tree,
                                     const world::Beliefs& beliefs);

/// Belief mass consistent with a Yes answer.
double yes_probability(const world::Beliefs& beliefs, const Query& query);

/// Conditions the current tree on an answer without replanning. Returns
/// nullopt when the answer has zero probability.
std::optional<MintTree> condition_tree(const MintTree& tree, const world::Beliefs& beliefs,
                                       const Query& query, Answer answer);

double information_gain(const MintTree& tree, const world::Beliefs& beliefs, const Query& query);

/// nullopt means Stop.
std::optional<ScoredQuery> select_query(const world::Scene& scene, const MintTree& tree,
                                        const world::Beliefs& beliefs, const Config& config,
                                        int asked_count);

/// Bayesian update for one answer. Unknown marks the query unanswerable.
/// Throws ContradictionError when the answer conflicts with a resolved gap.
world::Beliefs update_beliefs(const world::Beliefs& beliefs, const Query& query, Answer answer);

struct PruneResult {
  MintTree tree;
  world::Beliefs beliefs;
};

/// Applies the answer and rebuilds the tree (Unknown leaves the tree as is).
PruneResult prune(const world::Scene& scene, const MintTree& tree, const world::Beliefs& beliefs,
                  const Query& query, Answer answer, const Config& config);

/// Throws MissionInfeasible when the fallback map has no path.
planner::TaskPlan best_plan(const world::Scene& scene, const MintTree& tree,
                            const world::Beliefs& beliefs);

/// Mass conservation and belief normalization within 1e-9.
bool check_normalization(const MintTree& tree, const world::Beliefs& beliefs);

}  // namespace mintops::mint
