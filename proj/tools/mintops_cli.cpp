// mintops: run single episodes, benchmark suites, generate suites, or serve
// an interactive session.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "mintops/errors.hpp"
#include "mintops/generator.hpp"
#include "mintops/runner.hpp"
#include "mintops/service.hpp"

namespace {

using namespace mintops;

constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

/// Registers a flag with its MINTOPS_ environment override.
template <typename T>
CLI::Option* flag(CLI::App* app, const std::string& name, T& value, const std::string& help) {
  std::string env = "MINTOPS_";
  for (char c : name) env += c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return app->add_option("--" + name, value, help)->envname(env)->capture_default_str();
}

void add_config_flags(CLI::App* app, mint::Config& config) {
  flag(app, "delta-c", config.delta_c, "cost-gap threshold (steps)");
  flag(app, "delta-d", config.delta_d, "divergence threshold (cells)");
  flag(app, "h-min", config.h_min, "goal-entropy threshold (bits)");
  flag(app, "eps-ig", config.eps_ig, "minimum information gain (bits)");
  flag(app, "max-queries", config.max_queries, "query budget per episode");
  flag(app, "max-branch-gaps", config.max_branch_gaps, "tree depth cap");
}

nlohmann::ordered_json result_json(const world::Scenario& sc, runner::Policy policy,
                                   const runner::EpisodeResult& r) {
  nlohmann::ordered_json j;
  j["scenario_id"] = sc.scene.id;
  j["policy"] = runner::to_string(policy);
  j["success"] = r.success;
  j["failure_reason"] = runner::to_string(r.failure_reason);
  j["queries_asked"] = r.queries_asked;
  j["executed_cost"] = std::isinf(r.executed_cost) ? nlohmann::ordered_json("inf")
                                                   : nlohmann::ordered_json(r.executed_cost);
  j["queries"] = r.asked_queries;
  if (r.plan) {
    nlohmann::ordered_json cells = nlohmann::ordered_json::array();
    for (const auto& c : r.plan->cells()) cells.push_back({c.x, c.y});
    j["plan"] = {{"goals", r.plan->goal_choice}, {"cost", r.plan->total_cost}, {"cells", cells}};
  }
  return j;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<runner::Policy> parse_policies(const std::string& list) {
  std::vector<runner::Policy> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    if (item == "all") {
      for (auto p : runner::all_policies()) out.push_back(p);
      continue;
    }
    auto p = runner::parse_policy(item);
    if (!p) throw ValidationError("policies: unknown policy '" + item + "'");
    out.push_back(*p);
  }
  if (out.empty()) throw ValidationError("policies: empty list");
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Active human-in-the-loop planning over uncertain semantic grids"};
  app.require_subcommand(1);

  mint::Config config;
  std::uint64_t seed = 1;

  auto* run = app.add_subcommand("run", "run one episode");
  std::string scenario_path, policy_name = "mint", operator_name = "oracle", out_path;
  flag(run, "scenario", scenario_path, "scenario document")->required();
  flag(run, "policy", policy_name, "passive-conservative|passive-risky|exhaustive|mint");
  flag(run, "operator", operator_name, "oracle|interactive");
  flag(run, "seed", seed, "recorded with the result");
  flag(run, "out", out_path, "write the result JSON here");
  add_config_flags(run, config);

  auto* bench = app.add_subcommand("bench", "benchmark policies over a suite");
  std::string suite_spec, policies_list = "all", csv_path, json_path;
  unsigned threads = 0;
  flag(bench, "suite", suite_spec, "scenario directory or gen:<params>")->required();
  flag(bench, "policies", policies_list, "comma-separated policies or 'all'");
  flag(bench, "seed", seed, "seed for generated suites");
  flag(bench, "csv", csv_path, "CSV report path");
  flag(bench, "json", json_path, "JSON report path");
  flag(bench, "threads", threads, "worker threads (0: one per core)");
  add_config_flags(bench, config);

  auto* gen = app.add_subcommand("gen", "generate a scenario suite");
  int count = 1;
  std::string params_spec, gen_out;
  flag(gen, "seed", seed, "first seed");
  flag(gen, "count", count, "number of scenarios");
  flag(gen, "params", params_spec, "key=value,... generator parameters");
  flag(gen, "out", gen_out, "output directory")->required();

  auto* serve = app.add_subcommand("serve", "serve an interactive session over TCP");
  std::string serve_scenario, bind = "127.0.0.1";
  int port = 7878, sessions = 1;
  flag(serve, "scenario", serve_scenario, "scenario document")->required();
  flag(serve, "port", port, "TCP port (0 picks one)");
  flag(serve, "bind", bind, "IPv4 listen address");
  flag(serve, "sessions", sessions, "connections to accept before exiting");
  add_config_flags(serve, config);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    config.validate();
    if (run->parsed()) {
      const auto policy = runner::parse_policy(policy_name);
      if (!policy) throw ValidationError("policy: unknown '" + policy_name + "'");
      const auto scenario = world::load_scenario_file(scenario_path);
      std::unique_ptr<elicitation::Operator> op;
      if (operator_name == "oracle") {
        op = std::make_unique<elicitation::ScriptedOracle>(scenario);
      } else if (operator_name == "interactive") {
        op = std::make_unique<elicitation::ConsoleOperator>(std::cin, std::cerr);
      } else {
        throw ValidationError("operator: unknown '" + operator_name + "'");
      }
      const auto result = runner::run_episode(scenario, *policy, op.get(), config);
      auto j = result_json(scenario, *policy, result);
      j["seed"] = seed;
      const std::string text = j.dump(2) + "\n";
      if (!out_path.empty()) write_text(out_path, text);
      std::cout << text;
    } else if (bench->parsed()) {
      const auto policies = parse_policies(policies_list);
      const auto suite = runner::load_suite(suite_spec, seed);
      const auto run_result = runner::run_benchmark(suite, policies, config, seed, threads);
      const auto& report = run_result.report;
      if (!csv_path.empty()) runner::write_report(report, runner::ReportFormat::Csv, csv_path);
      if (!json_path.empty()) runner::write_report(report, runner::ReportFormat::Json, json_path);
      std::printf("%-22s %8s %12s %10s\n", "policy", "success", "avg_queries", "avg_cost");
      for (const auto& s : report.summaries) {
        std::printf("%-22s %8.3f %12.3f %10s\n", std::string(runner::to_string(s.policy)).c_str(),
                    s.success_rate, s.avg_queries,
                    s.avg_cost ? std::to_string(*s.avg_cost).c_str() : "-");
      }
      std::printf("%zu scenarios, %.2f s, %d normalization violations\n", suite.size(),
                  report.runtime_seconds, report.normalization_violations);
    } else if (gen->parsed()) {
      auto params = world::parse_gen_params(params_spec);
      params.count = count;
      const auto suite = world::generate_suite(seed, count, params);
      runner::write_suite(suite, gen_out);
      std::printf("wrote %zu scenarios to %s\n", suite.size(), gen_out.c_str());
    } else if (serve->parsed()) {
      const auto scenario = world::load_scenario_file(serve_scenario);
      service::ServeOptions options;
      options.bind_address = bind;
      options.max_sessions = sessions;
      options.on_listening = [&](int p) {
        std::printf("listening on %s:%d\n", bind.c_str(), p);
        std::fflush(stdout);
      };
      const auto results = service::serve(scenario, config, port, options);
      for (std::size_t i = 0; i < results.size(); ++i) {
        std::printf("session %zu: %s, %d queries%s\n", i + 1,
                    std::string(runner::to_string(results[i].failure_reason)).c_str(),
                    results[i].queries_asked, results[i].aborted ? " (aborted)" : "");
      }
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return 0;
}
