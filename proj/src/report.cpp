#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mintops/errors.hpp"
#include "mintops/runner.hpp"

namespace mintops::runner {

using ordered_json = nlohmann::ordered_json;

namespace {

constexpr std::string_view kCsvHeader = "policy,scenario_id,success,queries,cost";

std::string format_number(double v) {
  if (std::isinf(v)) return "inf";
  if (v == std::floor(v) && std::abs(v) < 1e15) return std::to_string(static_cast<long long>(v));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_number(const std::string& text, const std::string& where) {
  if (text == "inf") return planner::kInfiniteCost;
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos == text.size()) return v;
  } catch (const std::logic_error&) {
  }
  throw ParseError(where + ": bad number '" + text + "'");
}

Policy require_policy(const std::string& text, const std::string& where) {
  auto p = parse_policy(text);
  if (!p) throw ParseError(where + ": unknown policy '" + text + "'");
  return *p;
}

ordered_json cost_json(double v) {
  if (std::isinf(v)) return "inf";
  return v;
}

double cost_from_json(const ordered_json& j, const std::string& where) {
  if (j.is_string()) return parse_number(j.get<std::string>(), where);
  if (j.is_number()) return j.get<double>();
  throw ParseError(where + ": expected a number or \"inf\"");
}

}  // namespace

std::string format_csv(const BenchmarkReport& report) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& row : report.rows) {
    out += std::string(to_string(row.policy)) + "," + row.scenario_id + "," +
           (row.success ? "1" : "0") + "," + std::to_string(row.queries) + "," +
           format_number(row.cost) + "\n";
  }
  return out;
}

std::string format_json(const BenchmarkReport& report) {
  ordered_json j;
  j["seed"] = report.seed;
  j["config"] = {{"delta_c", report.config.delta_c},
                 {"delta_d", report.config.delta_d},
                 {"h_min", report.config.h_min},
                 {"eps_ig", report.config.eps_ig},
                 {"max_queries", report.config.max_queries},
                 {"max_branch_gaps", report.config.max_branch_gaps}};
  ordered_json policies = ordered_json::array();
  for (const auto& s : report.summaries) {
    ordered_json p;
    p["policy"] = to_string(s.policy);
    p["episodes"] = s.episodes;
    p["success_rate"] = s.success_rate;
    p["avg_queries"] = s.avg_queries;
    p["avg_cost"] = s.avg_cost ? ordered_json(*s.avg_cost) : ordered_json(nullptr);
    policies.push_back(std::move(p));
  }
  j["policies"] = std::move(policies);
  j["normalization_violations"] = report.normalization_violations;
  ordered_json rows = ordered_json::array();
  for (const auto& row : report.rows) {
    rows.push_back({{"policy", to_string(row.policy)},
                    {"scenario_id", row.scenario_id},
                    {"success", row.success},
                    {"queries", row.queries},
                    {"cost", cost_json(row.cost)}});
  }
  j["rows"] = std::move(rows);
  return j.dump(2) + "\n";
}

void write_report(const BenchmarkReport& report, ReportFormat format, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << (format == ReportFormat::Csv ? format_csv(report) : format_json(report));
  if (!out) throw IoError("write to '" + path + "' failed");
}

std::vector<EpisodeRow> parse_csv_report(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw ParseError("csv: missing header");
  std::vector<EpisodeRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "csv line " + std::to_string(line_no);
    std::vector<std::string> fields;
    std::istringstream ls(line);
    std::string f;
    while (std::getline(ls, f, ',')) fields.push_back(f);
    if (fields.size() != 5) throw ParseError(where + ": expected 5 fields");
    EpisodeRow row;
    row.policy = require_policy(fields[0], where);
    row.scenario_id = fields[1];
    if (fields[2] != "0" && fields[2] != "1") throw ParseError(where + ": success must be 0 or 1");
    row.success = fields[2] == "1";
    const double q = parse_number(fields[3], where);
    if (q < 0 || q != std::floor(q) || std::isinf(q)) throw ParseError(where + ": bad query count");
    row.queries = static_cast<int>(q);
    row.cost = parse_number(fields[4], where);
    rows.push_back(std::move(row));
  }
  return rows;
}

BenchmarkReport parse_json_report(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  BenchmarkReport r;
  try {
    r.seed = j.at("seed").get<std::uint64_t>();
    const auto& c = j.at("config");
    r.config.delta_c = c.at("delta_c").get<double>();
    r.config.delta_d = c.at("delta_d").get<double>();
    r.config.h_min = c.at("h_min").get<double>();
    r.config.eps_ig = c.at("eps_ig").get<double>();
    r.config.max_queries = c.at("max_queries").get<int>();
    r.config.max_branch_gaps = c.at("max_branch_gaps").get<int>();
    for (const auto& p : j.at("policies")) {
      PolicySummary s;
      s.policy = require_policy(p.at("policy").get<std::string>(), "report.policies");
      s.episodes = p.at("episodes").get<int>();
      s.success_rate = p.at("success_rate").get<double>();
      s.avg_queries = p.at("avg_queries").get<double>();
      if (!p.at("avg_cost").is_null()) s.avg_cost = p.at("avg_cost").get<double>();
      r.summaries.push_back(s);
    }
    r.normalization_violations = j.at("normalization_violations").get<int>();
    for (const auto& row : j.at("rows")) {
      EpisodeRow e;
      e.policy = require_policy(row.at("policy").get<std::string>(), "report.rows");
      e.scenario_id = row.at("scenario_id").get<std::string>();
      e.success = row.at("success").get<bool>();
      e.queries = row.at("queries").get<int>();
      e.cost = cost_from_json(row.at("cost"), "report.rows.cost");
      r.rows.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("report: ") + e.what());
  }
  return r;
}

}  // namespace mintops::runner
