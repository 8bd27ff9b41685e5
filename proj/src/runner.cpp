#include "mintops/runner.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "mintops/errors.hpp"

namespace mintops::runner {

namespace fs = std::filesystem;

using mint::Answer;
using mint::Query;

namespace {

constexpr std::array<std::string_view, 4> kPolicyNames{"passive-conservative", "passive-risky",
                                                       "exhaustive", "mint"};

/// Live candidates of a goal gap in option order.
std::vector<std::string> live_candidates(const world::GapBelief& gap) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < gap.options.size(); ++i) {
    if (gap.probs[i] > 0.0) out.push_back(gap.options[i]);
  }
  return out;
}

/// A query splitting the live candidates in half: an attribute group or
/// singleton of the right size if one exists, else the first half by id.
Query halving_query(const world::Scene& scene, const world::GapBelief& gap) {
  const auto live = live_candidates(gap);
  const std::size_t n = live.size();
  const std::size_t lo = n / 2;
  const std::size_t hi = (n + 1) / 2;

  std::map<std::pair<std::string, std::string>, std::vector<std::string>> groups;
  for (const auto& id : live) {
    for (const auto& [key, value] : scene.find_object(id)->attributes) {
      groups[{key, value}].push_back(id);
    }
  }
  for (const auto& [attr, members] : groups) {
    if (members.size() == lo || members.size() == hi) {
      if (members.size() == 1) return mint::goal_query(gap.step, members);
      return mint::goal_query(gap.step, members, attr);
    }
  }
  std::vector<std::string> half(live.begin(), live.begin() + static_cast<std::ptrdiff_t>(hi));
  return mint::goal_query(gap.step, std::move(half));
}

/// Goal choice from beliefs: resolved value or the most probable candidate;
/// steps without a gap use their only candidate.
std::vector<std::string> believed_goals(const world::Scene& scene, const world::Beliefs& beliefs) {
  std::vector<std::string> goals;
  for (std::size_t step = 0; step < scene.instruction.steps.size(); ++step) {
    const auto* gap = beliefs.find(world::goal_gap_id(step));
    if (gap != nullptr) {
      goals.push_back(gap->options[gap->resolved ? gap->value : gap->argmax()]);
    } else {
      goals.push_back(world::step_candidates(scene, step).front());
    }
  }
  return goals;
}

EpisodeResult plan_and_execute(const world::Scenario& scenario,
                               const std::optional<planner::TaskPlan>& plan) {
  if (!plan) return EpisodeResult{};
  return execute_plan(scenario, *plan);
}

class Recorder {
 public:
  Recorder(const world::Scene& scene, elicitation::Operator& op,
           const elicitation::PhrasingHook* hook)
      : scene_(scene), op_(op), hook_(hook) {}

  Answer ask(const Query& q) {
    const auto phrased = elicitation::phrase_query(q, scene_, hook_);
    asked.push_back(q.id);
    gaps.push_back(q.gap_id());
    return op_.ask(q, phrased);
  }

  std::vector<std::string> asked;
  std::vector<std::string> gaps;

 private:
  const world::Scene& scene_;
  elicitation::Operator& op_;
  const elicitation::PhrasingHook* hook_;
};

EpisodeResult run_exhaustive(const world::Scenario& scenario, elicitation::Operator& op,
                             const elicitation::PhrasingHook* hook) {
  const auto& scene = scenario.scene;
  auto beliefs = world::make_beliefs(scene, world::identify_gaps(scene));
  Recorder rec(scene, op, hook);
  int violations = 0;

  const auto gap_ids = [&] {
    std::vector<std::string> ids;
    for (const auto& g : beliefs.gaps) ids.push_back(g.id);
    return ids;
  }();
  for (const auto& id : gap_ids) {
    const auto* gap = beliefs.find(id);
    if (gap->kind == world::GapKind::Obstacle) {
      const Query q = mint::region_query(gap->region_id);
      beliefs = mint::update_beliefs(beliefs, q, rec.ask(q));
    } else {
      while (!beliefs.find(id)->resolved && beliefs.find(id)->live_count() > 1) {
        const Query q = halving_query(scene, *beliefs.find(id));
        const Answer a = rec.ask(q);
        beliefs = mint::update_beliefs(beliefs, q, a);
        if (a == Answer::Unknown) break;
      }
    }
    for (const auto& g : beliefs.gaps) {
      double total = 0.0;
      for (double p : g.probs) total += p;
      if (std::abs(total - 1.0) > 1e-9) ++violations;
    }
  }

  EpisodeResult r = plan_and_execute(scenario, mint::plan_in_context(scene, beliefs, {}));
  r.queries_asked = static_cast<int>(rec.asked.size());
  r.asked_queries = std::move(rec.asked);
  r.asked_gaps = std::move(rec.gaps);
  r.normalization_violations = violations;
  return r;
}

EpisodeResult run_mint(const world::Scenario& scenario, elicitation::Operator& op,
                       const mint::Config& config, const elicitation::PhrasingHook* hook) {
  MintLoop loop(scenario.scene, config);
  while (auto next = loop.next_query()) {
    const auto phrased = elicitation::phrase_query(next->query, scenario.scene, hook);
    loop.answer(next->query, op.ask(next->query, phrased));
  }
  EpisodeResult r;
  try {
    r = execute_plan(scenario, loop.finish());
  } catch (const MissionInfeasible&) {
    r = EpisodeResult{};
  }
  r.queries_asked = loop.queries_asked();
  r.asked_queries = loop.asked_queries();
  r.asked_gaps = loop.asked_gaps();
  r.normalization_violations = loop.normalization_violations();
  return r;
}

}  // namespace

std::string_view to_string(Policy p) { return kPolicyNames[static_cast<std::size_t>(p)]; }

std::optional<Policy> parse_policy(std::string_view text) {
  for (std::size_t i = 0; i < kPolicyNames.size(); ++i) {
    if (kPolicyNames[i] == text) return static_cast<Policy>(i);
  }
  return std::nullopt;
}

const std::vector<Policy>& all_policies() {
  static const std::vector<Policy> all{Policy::PassiveConservative, Policy::PassiveRisky,
                                       Policy::Exhaustive, Policy::Mint};
  return all;
}

bool is_active(Policy p) { return p == Policy::Exhaustive || p == Policy::Mint; }

std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::None: return "None";
    case FailureReason::EnteredHazard: return "EnteredHazard";
    case FailureReason::WrongGoal: return "WrongGoal";
    case FailureReason::NoPath: return "NoPath";
    case FailureReason::BudgetExceeded: return "BudgetExceeded";
  }
  return "None";
}

EpisodeResult execute_plan(const world::Scenario& scenario, const planner::TaskPlan& plan) {
  const auto truth = world::truth_map(scenario);
  const int budget = scenario.scene.step_budget;
  EpisodeResult r;
  r.plan = plan;
  int steps = 0;
  auto fail = [&](FailureReason why) {
    r.success = false;
    r.failure_reason = why;
    r.executed_cost = steps;
    return r;
  };
  for (std::size_t k = 0; k < plan.segments.size(); ++k) {
    const auto& cells = plan.segments[k].cells;
    for (std::size_t i = 1; i < cells.size(); ++i) {
      ++steps;
      if (truth.blocked(cells[i])) return fail(FailureReason::EnteredHazard);
      if (steps > budget) return fail(FailureReason::BudgetExceeded);
    }
    if (k >= scenario.truth.truth_goals.size() || k >= plan.goal_choice.size() ||
        plan.goal_choice[k] != scenario.truth.truth_goals[k]) {
      return fail(FailureReason::WrongGoal);
    }
  }
  r.success = true;
  r.failure_reason = FailureReason::None;
  r.executed_cost = steps;
  return r;
}

// ---------------------------------------------------------------------------

MintLoop::MintLoop(const world::Scene& scene, const mint::Config& config)
    : scene_(scene), config_(config) {
  config_.validate();
  beliefs_ = world::make_beliefs(scene_, world::identify_gaps(scene_));
  tree_ = mint::build_tree(scene_, beliefs_, config_);
}

std::optional<mint::ScoredQuery> MintLoop::next_query() {
  if (stopped_) return std::nullopt;
  if (!pending_) {
    pending_ = mint::select_query(scene_, tree_, beliefs_, config_, queries_asked());
    if (!pending_) stopped_ = true;
  }
  return pending_;
}

void MintLoop::answer(const Query& query, Answer answer) {
  auto result = mint::prune(scene_, tree_, beliefs_, query, answer, config_);
  tree_ = std::move(result.tree);
  beliefs_ = std::move(result.beliefs);
  asked_.push_back(query.id);
  asked_gaps_.push_back(query.gap_id());
  pending_.reset();
  if (!mint::check_normalization(tree_, beliefs_)) ++violations_;
}

planner::TaskPlan MintLoop::finish() const { return mint::best_plan(scene_, tree_, beliefs_); }

EpisodeResult run_episode(const world::Scenario& scenario, Policy policy,
                          elicitation::Operator* op, const mint::Config& config,
                          const elicitation::PhrasingHook* hook) {
  if (is_active(policy) && op == nullptr) {
    throw std::invalid_argument(std::string(to_string(policy)) + " policy requires an operator");
  }
  const auto& scene = scenario.scene;
  switch (policy) {
    case Policy::PassiveConservative:
    case Policy::PassiveRisky: {
      const auto beliefs = world::make_beliefs(scene, world::identify_gaps(scene));
      const auto mode = policy == Policy::PassiveConservative ? world::DefaultPolicy::Conservative
                                                              : world::DefaultPolicy::Optimistic;
      const auto map = world::apply_hypothesis(scene, {}, mode);
      return plan_and_execute(scenario, planner::plan_task(scene, map, believed_goals(scene, beliefs)));
    }
    case Policy::Exhaustive: return run_exhaustive(scenario, *op, hook);
    case Policy::Mint: return run_mint(scenario, *op, config, hook);
  }
  throw std::invalid_argument("unknown policy");
}

// ---------------------------------------------------------------------------

std::vector<PolicySummary> summarize(const std::vector<EpisodeRow>& rows,
                                     const std::vector<Policy>& policies) {
  std::vector<PolicySummary> out;
  for (Policy p : policies) {
    PolicySummary s;
    s.policy = p;
    int successes = 0;
    long long queries = 0;
    double cost = 0.0;
    for (const auto& row : rows) {
      if (row.policy != p) continue;
      ++s.episodes;
      queries += row.queries;
      if (row.success) {
        ++successes;
        cost += row.cost;
      }
    }
    if (s.episodes > 0) {
      s.success_rate = static_cast<double>(successes) / s.episodes;
      s.avg_queries = static_cast<double>(queries) / s.episodes;
    }
    if (successes > 0) s.avg_cost = cost / successes;
    out.push_back(s);
  }
  return out;
}

BenchmarkRun run_benchmark(const std::vector<world::Scenario>& suite,
                           const std::vector<Policy>& policies, const mint::Config& config,
                           std::uint64_t seed, unsigned threads) {
  if (suite.empty()) throw std::invalid_argument("benchmark suite is empty");
  if (policies.empty()) throw std::invalid_argument("no policies selected");
  config.validate();

  std::vector<const world::Scenario*> ordered;
  for (const auto& sc : suite) ordered.push_back(&sc);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->scene.id < b->scene.id; });

  const std::size_t total = ordered.size() * policies.size();
  std::vector<EpisodeResult> results(total);
  std::atomic<std::size_t> next{0};
  const auto start = std::chrono::steady_clock::now();
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      const Policy p = policies[i / ordered.size()];
      const auto& sc = *ordered[i % ordered.size()];
      elicitation::ScriptedOracle oracle(sc);
      results[i] = run_episode(sc, p, &oracle, config);
    }
  };
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, total));
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      try {
        worker();
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = total;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  BenchmarkRun run;
  run.report.seed = seed;
  run.report.config = config;
  for (std::size_t i = 0; i < total; ++i) {
    const auto& r = results[i];
    run.report.rows.push_back({policies[i / ordered.size()], ordered[i % ordered.size()]->scene.id,
                               r.success, r.queries_asked, r.executed_cost});
    run.report.normalization_violations += r.normalization_violations;
  }
  run.report.summaries = summarize(run.report.rows, policies);
  run.report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  run.episodes = std::move(results);
  return run;
}

std::vector<world::Scenario> load_suite(const std::string& spec, std::uint64_t seed) {
  if (spec.rfind("gen:", 0) == 0) {
    const auto params = world::parse_gen_params(spec.substr(4));
    return world::generate_suite(seed, params.count, params);
  }
  std::error_code ec;
  if (!fs::is_directory(spec, ec)) throw IoError("suite: '" + spec + "' is not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(spec, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  if (ec) throw IoError("suite: cannot list '" + spec + "': " + ec.message());
  std::sort(files.begin(), files.end());
  std::vector<world::Scenario> out;
  for (const auto& f : files) out.push_back(world::load_scenario_file(f.string()));
  return out;
}

void write_suite(const std::vector<world::Scenario>& suite, const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create '" + dir + "': " + ec.message());
  for (const auto& sc : suite) {
    const auto path = fs::path(dir) / (sc.scene.id + ".json");
    std::ofstream out(path, std::ios::binary);
    out << world::serialize_scenario(sc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
  }
}

}  // namespace mintops::runner
