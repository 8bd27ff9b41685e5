#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mintops/elicitation.hpp"
#include "mintops/generator.hpp"
#include "mintops/mint.hpp"
#include "mintops/planner.hpp"
#include "mintops/world.hpp"

namespace mintops::runner {

enum class Policy { PassiveConservative, PassiveRisky, Exhaustive, Mint };

std::string_view to_string(Policy p);
/// Accepts the CLI spellings ("passive-conservative", ...).
std::optional<Policy> parse_policy(std::string_view text);
const std::vector<Policy>& all_policies();
bool is_active(Policy p);

enum class FailureReason { None, EnteredHazard, WrongGoal, NoPath, BudgetExceeded };

std::string_view to_string(FailureReason r);

struct EpisodeResult {
  bool success = false;
  int queries_asked = 0;
  double executed_cost = planner::kInfiniteCost;
  FailureReason failure_reason = FailureReason::NoPath;

  std::optional<planner::TaskPlan> plan;
  std::vector<std::string> asked_queries;  // query ids in order
  std::vector<std::string> asked_gaps;     // gap id per asked query
  int normalization_violations = 0;
  bool aborted = false;
};

/// Walks the plan on the true map. Hazards are checked before the budget;
/// goal correctness at the end of each segment.
EpisodeResult execute_plan(const world::Scenario& scenario, const planner::TaskPlan& plan);

/// The Mint loop as a resumable state machine so an interactive session can
/// drive it one answer at a time.
class MintLoop {
 public:
  MintLoop(const world::Scene& scene, const mint::Config& config);

  /// nullopt means Stop. Repeated calls without an answer return the same query.
  std::optional<mint::ScoredQuery> next_query();
  /// Throws ContradictionError when the answer is inconsistent with earlier ones.
  void answer(const mint::Query& query, mint::Answer answer);
  /// Throws MissionInfeasible.
  planner::TaskPlan finish() const;

  const world::Beliefs& beliefs() const { return beliefs_; }
  const mint::MintTree& tree() const { return tree_; }
  int queries_asked() const { return static_cast<int>(asked_.size()); }
  const std::vector<std::string>& asked_queries() const { return asked_; }
  const std::vector<std::string>& asked_gaps() const { return asked_gaps_; }
  int normalization_violations() const { return violations_; }

 private:
  const world::Scene& scene_;
  mint::Config config_;
  world::Beliefs beliefs_;
  mint::MintTree tree_;
  std::optional<mint::ScoredQuery> pending_;
  bool stopped_ = false;
  std::vector<std::string> asked_;
  std::vector<std::string> asked_gaps_;
  int violations_ = 0;
};

/// Throws std::invalid_argument when an active policy has no operator.
EpisodeResult run_episode(const world::Scenario& scenario, Policy policy,
                          elicitation::Operator* op, const mint::Config& config,
                          const elicitation::PhrasingHook* hook = nullptr);

// ---------------------------------------------------------------------------
// Benchmarks

struct EpisodeRow {
  Policy policy = Policy::Mint;
  std::string scenario_id;
  bool success = false;
  int queries = 0;
  double cost = planner::kInfiniteCost;

  friend bool operator==(const EpisodeRow&, const EpisodeRow&) = default;
};

struct PolicySummary {
  Policy policy = Policy::Mint;
  int episodes = 0;
  double success_rate = 0.0;
  double avg_queries = 0.0;
  std::optional<double> avg_cost;  // mean over successful episodes

  friend bool operator==(const PolicySummary&, const PolicySummary&) = default;
};

struct BenchmarkReport {
  std::uint64_t seed = 0;
  mint::Config config;
  std::vector<PolicySummary> summaries;
  std::vector<EpisodeRow> rows;  // policy order, then scenario id
  int normalization_violations = 0;
  double runtime_seconds = 0.0;
};

/// Aggregates in policy order; policies with no rows get zeroed summaries.
std::vector<PolicySummary> summarize(const std::vector<EpisodeRow>& rows,
                                     const std::vector<Policy>& policies);

/// Per-episode detail alongside the report, index-aligned with report.rows.
struct BenchmarkRun {
  BenchmarkReport report;
  std::vector<EpisodeResult> episodes;
};

/// Runs every (scenario, policy) pair with the scripted oracle, in parallel.
/// Throws std::invalid_argument on an empty suite.
BenchmarkRun run_benchmark(const std::vector<world::Scenario>& suite,
                           const std::vector<Policy>& policies, const mint::Config& config,
                           std::uint64_t seed, unsigned threads = 0);

/// A directory of scenario documents (sorted by file name) or
/// "gen:<params>" with the suite size in params' count. Throws IoError.
std::vector<world::Scenario> load_suite(const std::string& spec, std::uint64_t seed);

/// Writes one document per scenario as <id>.json. Throws IoError.
void write_suite(const std::vector<world::Scenario>& suite, const std::string& dir);

enum class ReportFormat { Csv, Json };

std::string format_csv(const BenchmarkReport& report);
std::string format_json(const BenchmarkReport& report);
/// Throws IoError.
void write_report(const BenchmarkReport& report, ReportFormat format, const std::string& path);

/// Rows back from CSV text. Throws ParseError.
std::vector<EpisodeRow> parse_csv_report(std::string_view text);
/// Throws ParseError.
BenchmarkReport parse_json_report(std::string_view text);

}  // namespace mintops::runner
