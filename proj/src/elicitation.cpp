#include "mintops/elicitation.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <future>
#include <istream>
#include <memory>
#include <ostream>
#include <thread>

#include "mintops/errors.hpp"

namespace mintops::elicitation {

namespace {

using mint::Answer;
using mint::Query;
using mint::QueryKind;

// Conventional English adjective order for the keys we know about.
constexpr std::array<std::string_view, 6> kAdjectiveKeys{"size", "age", "shape", "color",
                                                         "colour", "material"};

std::string lowercase(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string noun_phrase(const world::WorldObject& obj) {
  std::string phrase;
  for (auto key : kAdjectiveKeys) {
    auto it = obj.attributes.find(std::string(key));
    if (it == obj.attributes.end()) continue;
    phrase += it->second + " ";
  }
  phrase += obj.label;
  for (const auto& [key, value] : obj.attributes) {
    if (std::find(kAdjectiveKeys.begin(), kAdjectiveKeys.end(), key) != kAdjectiveKeys.end()) {
      continue;
    }
    if (key == "location") {
      phrase += " in the " + value;
    } else {
      phrase += " (" + key + " " + value + ")";
    }
  }
  return phrase;
}

const world::WorldObject& require_object(const world::Scene& scene, const std::string& id) {
  const auto* obj = scene.find_object(id);
  if (obj == nullptr) throw ValidationError("query: unknown object id '" + id + "'");
  return *obj;
}

std::string template_text(const Query& query, const world::Scene& scene) {
  if (query.kind == QueryKind::RegionTraversable) {
    const auto* region = scene.find_region(query.region_id);
    if (region == nullptr) throw ValidationError("query: unknown region id '" + query.region_id + "'");
    return "Is the " + region->label + " ahead safe to fly through?";
  }
  if (query.step >= scene.instruction.steps.size()) {
    throw ValidationError("query: step " + std::to_string(query.step) + " out of range");
  }
  if (query.subset.empty()) throw ValidationError("query " + query.id + ": empty subset");
  if (query.subset.size() == 1) {
    const auto& obj = require_object(scene, query.subset.front());
    switch (scene.instruction.steps[query.step].action) {
      case world::Action::Pickup: return "Should I take the " + noun_phrase(obj) + "?";
      case world::Action::Deliver: return "Should I deliver to the " + noun_phrase(obj) + "?";
      case world::Action::Visit: return "Should I go to the " + noun_phrase(obj) + "?";
    }
  }
  if (query.attribute) {
    for (const auto& id : query.subset) require_object(scene, id);
    return "Is the target " + query.attribute->second + "?";
  }
  std::string text = "Is the target one of: ";
  for (std::size_t i = 0; i < query.subset.size(); ++i) {
    if (i > 0) text += ", ";
    text += "the " + noun_phrase(require_object(scene, query.subset[i]));
  }
  return text + "?";
}

}  // namespace

QueryDescription describe(const Query& query, const world::Scene& scene) {
  QueryDescription d;
  d.query_id = query.id;
  d.template_text = template_text(query, scene);
  if (query.kind == QueryKind::RegionTraversable) {
    d.kind = "region-traversable";
    d.subjects = {query.region_id};
  } else {
    d.kind = "goal-is";
    d.subjects = query.subset;
  }
  return d;
}

PhrasedQuery phrase_query(const Query& query, const world::Scene& scene, const PhrasingHook* hook) {
  QueryDescription d = describe(query, scene);
  PhrasedQuery out{query.id, d.template_text};
  if (hook == nullptr || !hook->provider) return out;

  // Detached so a hung provider cannot hold up the episode past the timeout.
  auto promise = std::make_shared<std::promise<std::optional<std::string>>>();
  auto future = promise->get_future();
  std::thread([promise, provider = hook->provider, d]() mutable {
    try {
      promise->set_value(provider(d));
    } catch (...) {
      promise->set_value(std::nullopt);
    }
  }).detach();
  if (future.wait_for(hook->timeout) == std::future_status::ready) {
    if (auto text = future.get(); text && !text->empty()) out.text = *text;
  }
  return out;
}

std::optional<Answer> parse_answer(std::string_view text) {
  std::size_t begin = 0;
  std::size_t end = text.size();
  auto trim = [](unsigned char c) { return std::isspace(c) || std::ispunct(c); };
  while (begin < end && trim(static_cast<unsigned char>(text[begin]))) ++begin;
  while (end > begin && trim(static_cast<unsigned char>(text[end - 1]))) --end;
  const std::string token = lowercase(text.substr(begin, end - begin));

  static constexpr std::array<std::string_view, 5> kYes{"yes", "y", "affirmative", "safe", "correct"};
  static constexpr std::array<std::string_view, 5> kNo{"no", "n", "negative", "unsafe", "wrong"};
  static constexpr std::array<std::string_view, 3> kUnknown{"unknown", "unsure", "skip"};
  auto in = [&](const auto& set) { return std::find(set.begin(), set.end(), token) != set.end(); };
  if (in(kYes)) return Answer::Yes;
  if (in(kNo)) return Answer::No;
  if (in(kUnknown)) return Answer::Unknown;
  return std::nullopt;
}

std::string_view canonical_text(Answer answer) {
  switch (answer) {
    case Answer::Yes: return "yes";
    case Answer::No: return "no";
    case Answer::Unknown: return "unknown";
  }
  return "unknown";
}

Answer oracle_answer(const Query& query, const world::Scenario& scenario) {
  if (query.kind == QueryKind::RegionTraversable) {
    const auto* region = scenario.scene.find_region(query.region_id);
    if (region == nullptr) throw ValidationError("query: unknown region id '" + query.region_id + "'");
    const auto truth = scenario.truth.region_truth.at(region->id);
    return region->hypotheses[truth].traversable ? Answer::Yes : Answer::No;
  }
  const auto& goal = scenario.truth.truth_goals.at(query.step);
  return std::find(query.subset.begin(), query.subset.end(), goal) != query.subset.end()
             ? Answer::Yes
             : Answer::No;
}

Answer ConsoleOperator::ask(const Query&, const PhrasedQuery& phrased) {
  std::string line;
  while (true) {
    out_ << phrased.text << " [yes/no/unknown] " << std::flush;
    if (!std::getline(in_, line)) return Answer::Unknown;
    if (auto answer = parse_answer(line)) return *answer;
    out_ << "Please answer yes, no or unknown.\n";
  }
}

}  // namespace mintops::elicitation
