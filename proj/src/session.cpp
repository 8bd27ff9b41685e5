#include <cmath>

#include <json.hpp>

#include "mintops/errors.hpp"
#include "mintops/service.hpp"

namespace mintops::service {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json coord_json(Coord c) { return ordered_json::array({c.x, c.y}); }

ordered_json cells_json(const std::vector<Coord>& cells) {
  ordered_json out = ordered_json::array();
  for (const auto& c : cells) out.push_back(coord_json(c));
  return out;
}

ordered_json cost_json(double v) {
  if (std::isinf(v)) return nullptr;
  return v;
}

ordered_json scene_json(const world::Scene& scene) {
  ordered_json grid;
  grid["width"] = scene.grid.width;
  grid["height"] = scene.grid.height;
  ordered_json obstacles = ordered_json::array();
  for (int y = 0; y < scene.grid.height; ++y) {
    for (int x = 0; x < scene.grid.width; ++x) {
      if (scene.grid.at({x, y}) == world::Terrain::Obstacle) obstacles.push_back({x, y});
    }
  }
  grid["obstacles"] = std::move(obstacles);

  ordered_json objects = ordered_json::array();
  for (const auto& o : scene.objects) {
    objects.push_back({{"id", o.id},
                       {"label", o.label},
                       {"attributes", o.attributes},
                       {"cell", coord_json(o.cell)}});
  }
  ordered_json regions = ordered_json::array();
  for (const auto& r : scene.regions) {
    ordered_json hyps = ordered_json::array();
    for (const auto& h : r.hypotheses) {
      hyps.push_back({{"name", h.name}, {"traversable", h.traversable}, {"prior", h.prior}});
    }
    regions.push_back({{"id", r.id},
                       {"label", r.label},
                       {"cells", cells_json(r.cells)},
                       {"hypotheses", std::move(hyps)}});
  }
  ordered_json steps = ordered_json::array();
  for (const auto& s : scene.instruction.steps) {
    steps.push_back({{"action", world::to_string(s.action)}, {"constraints", s.constraints}});
  }
  ordered_json out;
  out["grid"] = std::move(grid);
  out["objects"] = std::move(objects);
  out["regions"] = std::move(regions);
  out["instruction"] = std::move(steps);
  out["start"] = coord_json(scene.start);
  out["step_budget"] = scene.step_budget;
  return out;
}

ordered_json beliefs_json(const world::Beliefs& beliefs) {
  ordered_json out = ordered_json::array();
  for (const auto& g : beliefs.gaps) {
    ordered_json b;
    b["gap_id"] = g.id;
    b["kind"] = g.kind == world::GapKind::Obstacle ? "obstacle" : "goal";
    b["options"] = g.options;
    b["probs"] = g.probs;
    b["resolved"] = g.resolved;
    if (g.resolved) b["value"] = g.options[g.value];
    out.push_back(std::move(b));
  }
  return out;
}

void flatten(const mint::MintNode& node, int parent, ordered_json& nodes) {
  const int index = static_cast<int>(nodes.size());
  ordered_json n;
  n["index"] = index;
  n["parent"] = parent < 0 ? ordered_json(nullptr) : ordered_json(parent);
  n["mass"] = node.mass;
  if (node.is_leaf()) {
    const auto& leaf = node.leaf();
    n["gap_id"] = nullptr;
    n["cost"] = cost_json(leaf.cost);
    n["cells"] = leaf.plan ? cells_json(leaf.plan->cells()) : ordered_json::array();
    nodes.push_back(std::move(n));
    return;
  }
  n["gap_id"] = node.internal().gap_id;
  nodes.push_back(std::move(n));
  for (const auto& child : node.internal().children) flatten(child, index, nodes);
}

}  // namespace

Session::Session(const world::Scenario& scenario, const mint::Config& config,
                 std::string session_id, const elicitation::PhrasingHook* hook)
    : scenario_(scenario), config_(config), id_(std::move(session_id)), hook_(hook),
      loop_(scenario.scene, config) {}

std::optional<std::string> Session::pending_query_id() const {
  if (!pending_) return std::nullopt;
  return pending_->query.id;
}

std::string Session::envelope(std::string_view type, std::string payload_json) {
  ordered_json j;
  j["type"] = type;
  j["session_id"] = id_;
  j["sequence"] = ++sequence_;
  j["payload"] = ordered_json::parse(payload_json);
  return j.dump();
}

std::string Session::error(std::string_view code, const std::string& detail) {
  return envelope("error", ordered_json{{"code", code}, {"detail", detail}}.dump());
}

std::string Session::state_message() {
  ordered_json payload = scene_json(scenario_.scene);
  payload["beliefs"] = beliefs_json(loop_.beliefs());
  ordered_json nodes = ordered_json::array();
  flatten(loop_.tree().root, -1, nodes);
  payload["tree"] = {{"nodes", std::move(nodes)}};
  payload["queries_asked"] = loop_.queries_asked();
  return envelope("state", payload.dump());
}

void Session::advance(std::vector<std::string>& out) {
  pending_ = loop_.next_query();
  if (pending_) {
    const auto phrased = elicitation::phrase_query(pending_->query, scenario_.scene, hook_);
    out.push_back(envelope("query", ordered_json{{"query_id", phrased.query_id},
                                                 {"text", phrased.text},
                                                 {"ig_bits", pending_->ig_bits}}
                                        .dump()));
    return;
  }

  runner::EpisodeResult r;
  try {
    r = runner::execute_plan(scenario_, loop_.finish());
    out.push_back(envelope("plan", ordered_json{{"cells", cells_json(r.plan->cells())},
                                                {"cost", r.plan->total_cost}}
                                       .dump()));
  } catch (const MissionInfeasible&) {
    out.push_back(envelope("plan", ordered_json{{"cells", ordered_json::array()}, {"cost", nullptr}}.dump()));
  }
  r.queries_asked = loop_.queries_asked();
  r.asked_queries = loop_.asked_queries();
  r.asked_gaps = loop_.asked_gaps();
  r.normalization_violations = loop_.normalization_violations();

  ordered_json result;
  result["success"] = r.success;
  result["failure_reason"] = runner::to_string(r.failure_reason);
  result["queries_asked"] = r.queries_asked;
  result["executed_cost"] = cost_json(r.executed_cost);
  result["aborted"] = false;
  out.push_back(envelope("done", ordered_json{{"result", std::move(result)}}.dump()));
  result_ = std::move(r);
  closed_ = true;
}

std::vector<std::string> Session::on_message(std::string_view text) {
  std::vector<std::string> out;
  if (closed_) {
    out.push_back(error("MALFORMED", "session is closed"));
    return out;
  }
  ordered_json msg;
  try {
    msg = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    out.push_back(error("MALFORMED", "message is not valid JSON"));
    return out;
  }
  if (!msg.is_object() || !msg.contains("type") || !msg["type"].is_string()) {
    out.push_back(error("MALFORMED", "message needs a string 'type'"));
    return out;
  }
  const std::string type = msg["type"].get<std::string>();

  if (!greeted_) {
    if (type != "hello") {
      out.push_back(error("MALFORMED", "expected hello first"));
      return out;
    }
    const auto v = msg.find("protocol_version");
    if (v == msg.end() || !v->is_number_integer() || v->get<int>() != kProtocolVersion) {
      out.push_back(error("VERSION", "server speaks protocol_version " +
                                         std::to_string(kProtocolVersion)));
      closed_ = true;
      runner::EpisodeResult r;
      r.aborted = true;
      result_ = std::move(r);
      return out;
    }
    greeted_ = true;
    out.push_back(state_message());
    advance(out);
    return out;
  }

  if (type != "answer") {
    out.push_back(error("MALFORMED", "unexpected message type '" + type + "'"));
    return out;
  }
  const auto payload = msg.find("payload");
  if (payload == msg.end() || !payload->is_object() || !payload->contains("query_id") ||
      !(*payload)["query_id"].is_string() || !payload->contains("value") ||
      !(*payload)["value"].is_string()) {
    out.push_back(error("MALFORMED", "answer needs payload.query_id and payload.value strings"));
    return out;
  }
  const std::string query_id = (*payload)["query_id"].get<std::string>();
  if (!pending_ || pending_->query.id != query_id) {
    out.push_back(error("STALE_ANSWER", "no outstanding query '" + query_id + "'"));
    return out;
  }
  const auto answer = elicitation::parse_answer((*payload)["value"].get<std::string>());
  if (!answer) {
    out.push_back(error("REPROMPT", "answer yes, no or unknown"));
    return out;
  }
  try {
    loop_.answer(pending_->query, *answer);
  } catch (const ContradictionError& e) {
    out.push_back(error("CONTRADICTION", e.what()));
    return out;
  }
  pending_.reset();
  out.push_back(envelope("answer", ordered_json{{"query_id", query_id},
                                                {"value", elicitation::canonical_text(*answer)}}
                                       .dump()));
  out.push_back(state_message());
  advance(out);
  return out;
}

void Session::on_disconnect() {
  if (closed_) return;
  closed_ = true;
  runner::EpisodeResult r;
  r.aborted = true;
  r.failure_reason = runner::FailureReason::NoPath;
  r.queries_asked = loop_.queries_asked();
  r.asked_queries = loop_.asked_queries();
  r.asked_gaps = loop_.asked_gaps();
  r.normalization_violations = loop_.normalization_violations();
  result_ = std::move(r);
}

}  // namespace mintops::service
