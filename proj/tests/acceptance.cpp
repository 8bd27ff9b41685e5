// Acceptance checks over the shipped suites and random instances. Prints one
// PASS/FAIL line per check and exits nonzero if any fails.

#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <string>

#include "fixtures.hpp"
#include "mintops/mint.hpp"
#include "mintops/runner.hpp"
#include "oracles.hpp"

using namespace mintops;
using runner::Policy;

namespace {

constexpr std::uint64_t kSeed = 1;
constexpr double kMaxQueryRatio = 0.75;
constexpr double kMaxRuntimeSeconds = 60.0;
constexpr double kPassiveLow = 0.60;
constexpr double kPassiveHigh = 0.90;
constexpr double kConservativeCeiling = 0.50;
constexpr double kDecoyQueryCeiling = 2.0;
constexpr double kIgTolerance = 1e-9;
constexpr int kIgInstances = 200;
constexpr int kIgMaxBranched = 3;
constexpr int kPlannerInstances = 500;
constexpr int kPlannerMaxSide = 20;

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  std::printf("%s  %-34s %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const runner::PolicySummary& summary(const runner::BenchmarkReport& r, Policy p) {
  for (const auto& s : r.summaries) {
    if (s.policy == p) return s;
  }
  throw std::logic_error("policy missing from report");
}

/// Fraction of scenarios solved by at least one passive policy.
double passive_best_of(const runner::BenchmarkRun& run, std::size_t n) {
  std::set<std::string> solved;
  for (const auto& row : run.report.rows) {
    if (!runner::is_active(row.policy) && row.success) solved.insert(row.scenario_id);
  }
  return static_cast<double>(solved.size()) / static_cast<double>(n);
}

std::vector<world::Scenario> suite(const char* name) {
  return runner::load_suite(fixtures::data_path(std::string("suites/") + name), kSeed);
}

world::Beliefs initial_beliefs(const world::Scene& scene) {
  return world::make_beliefs(scene, world::identify_gaps(scene));
}

}  // namespace

int main() {
  const auto policies = runner::all_policies();
  const std::vector<Policy> all(policies.begin(), policies.end());
  int violations = 0;

  // Suite A: shortcut scenarios, two regions each, half off the path.
  const auto a = suite("a");
  const auto run_a = runner::run_benchmark(a, all, {}, kSeed);
  violations += run_a.report.normalization_violations;
  {
    const auto& m = summary(run_a.report, Policy::Mint);
    const auto& e = summary(run_a.report, Policy::Exhaustive);
    report(m.success_rate == 1.0 && e.success_rate == 1.0, "suite-a success",
           fmt("mint=%.3f exhaustive=%.3f", m.success_rate, e.success_rate));
    report(m.avg_queries <= kMaxQueryRatio * e.avg_queries, "suite-a query economy",
           fmt("mint=%.3f exhaustive=%.3f ratio=%.3f", m.avg_queries, e.avg_queries,
               e.avg_queries > 0 ? m.avg_queries / e.avg_queries : NAN));
    report(run_a.report.runtime_seconds < kMaxRuntimeSeconds, "suite-a runtime",
           fmt("%.3f s for %.0f episodes", run_a.report.runtime_seconds,
               static_cast<double>(run_a.report.rows.size())));
  }

  // Suite B: mix built to defeat each passive default in turn.
  const auto b = suite("b");
  const auto run_b = runner::run_benchmark(b, all, {}, kSeed);
  violations += run_b.report.normalization_violations;
  {
    const double best = passive_best_of(run_b, b.size());
    const auto& m = summary(run_b.report, Policy::Mint);
    report(best >= kPassiveLow && best <= kPassiveHigh, "suite-b passive best-of",
           fmt("%.3f in [%.2f, %.2f]", best, kPassiveLow, kPassiveHigh));
    report(m.success_rate == 1.0, "suite-b mint success", fmt("%.3f", m.success_rate));
  }

  // Suite C: four look-alike boxes, one wanted.
  const auto c = suite("c");
  const auto run_c = runner::run_benchmark(c, all, {}, kSeed);
  violations += run_c.report.normalization_violations;
  {
    const auto& pc = summary(run_c.report, Policy::PassiveConservative);
    const auto& m = summary(run_c.report, Policy::Mint);
    report(pc.success_rate <= kConservativeCeiling, "suite-c conservative success",
           fmt("%.3f <= %.2f", pc.success_rate, kConservativeCeiling));
    report(m.success_rate == 1.0, "suite-c mint success", fmt("%.3f", m.success_rate));
    report(m.avg_queries <= kDecoyQueryCeiling, "suite-c mint queries",
           fmt("%.3f <= %.0f", m.avg_queries, kDecoyQueryCeiling));
  }

  // Information gain against joint-world enumeration.
  {
    std::mt19937 rng(7);
    int instances = 0, queries = 0;
    double worst = 0.0;
    for (int trial = 0; trial < 20000 && instances < kIgInstances; ++trial) {
      const auto sc = fixtures::random_small(rng);
      const auto beliefs = initial_beliefs(sc.scene);
      const auto tree = mint::build_tree(sc.scene, beliefs, {});
      const auto branched = tree.branched_gaps().size();
      if (branched == 0 || branched > kIgMaxBranched) continue;
      ++instances;
      for (const auto& q : mint::enumerate_queries(sc.scene, tree, beliefs)) {
        ++queries;
        worst = std::max(worst, std::abs(mint::information_gain(tree, beliefs, q) -
                                         oracle::information_gain(tree, beliefs, q)));
      }
    }
    report(instances == kIgInstances && worst <= kIgTolerance, "information gain oracle",
           fmt("%.0f instances, %.0f queries, max error %.3g", instances, queries, worst));
  }

  // Planner cost against the uniform-cost reference and an independent BFS.
  {
    std::mt19937 rng(11);
    int mismatches = 0;
    for (int i = 0; i < kPlannerInstances; ++i) {
      const int w = std::uniform_int_distribution<int>(1, kPlannerMaxSide)(rng);
      const int h = std::uniform_int_distribution<int>(1, kPlannerMaxSide)(rng);
      const double density = std::uniform_real_distribution<double>(0.0, 0.4)(rng);
      SemanticMap map(w, h);
      std::bernoulli_distribution wall(density);
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) map.set_blocked({x, y}, wall(rng));
      }
      const Coord s{std::uniform_int_distribution<int>(0, w - 1)(rng),
                    std::uniform_int_distribution<int>(0, h - 1)(rng)};
      const Coord g{std::uniform_int_distribution<int>(0, w - 1)(rng),
                    std::uniform_int_distribution<int>(0, h - 1)(rng)};
      map.set_blocked(s, false);
      map.set_blocked(g, false);
      const auto path = planner::plan_path(map, s, g);
      const auto ref = planner::dijkstra_reference(map, s, g);
      const auto bfs = oracle::bfs_cost(map, s, g);
      const std::optional<int> got = path ? std::optional<int>(path->cost) : std::nullopt;
      if (got != ref || got != bfs || (path && !planner::is_valid_path(map, *path))) ++mismatches;
    }
    report(mismatches == 0, "planner optimality",
           fmt("%.0f grids, %.0f mismatches", kPlannerInstances, mismatches));
  }

  // Strict mode: every difference counts and every positive gain is asked.
  {
    mint::Config strict;
    strict.delta_c = 0.0;
    strict.delta_d = 0.0;
    strict.h_min = 0.0;
    strict.eps_ig = 0.0;
    strict.max_queries = std::numeric_limits<int>::max();
    const auto run = runner::run_benchmark(a, {Policy::Mint}, strict, kSeed);
    violations += run.report.normalization_violations;
    int optimal = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto omniscient =
          planner::plan_task(a[i].scene, world::truth_map(a[i]), a[i].truth.truth_goals);
      const auto& r = run.episodes[i];
      if (omniscient && r.success && r.executed_cost == omniscient->total_cost) ++optimal;
    }
    report(optimal == static_cast<int>(a.size()), "strict-mode optimality",
           fmt("%.0f / %.0f episodes at omniscient cost", optimal, static_cast<double>(a.size())));
  }

  // No question about a gap that cannot change the plan from the outset.
  {
    int bad = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      const auto beliefs = initial_beliefs(a[i].scene);
      std::set<std::string> irrelevant;
      for (const auto& g : beliefs.gaps) {
        if (mint::assess_criticality(a[i].scene, beliefs, g.id, {}, run_a.report.config).verdict ==
            mint::Criticality::Irrelevant) {
          irrelevant.insert(g.id);
        }
      }
      for (std::size_t k = 0; k < all.size(); ++k) {
        if (all[k] != Policy::Mint) continue;
        for (const auto& gap : run_a.episodes[k * a.size() + i].asked_gaps) bad += irrelevant.count(gap);
      }
    }
    report(bad == 0, "irrelevant-gap filter", fmt("%.0f queries on irrelevant gaps", bad));
  }

  report(violations == 0, "normalization", fmt("%.0f violations across all runs", violations));

  return failures == 0 ? 0 : 1;
}
