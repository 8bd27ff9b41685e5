#pragma once

#include <chrono>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mintops/mint.hpp"
#include "mintops/world.hpp"

namespace mintops::elicitation {

/// What an external phrasing provider sees.
struct QueryDescription {
  std::string query_id;
  std::string kind;           // "region-traversable" | "goal-is"
  std::string template_text;  // the fallback phrasing
  std::vector<std::string> subjects;  // region id or candidate ids
};

using PhrasingProvider = std::function<std::optional<std::string>(const QueryDescription&)>;

/// Optional rewrite hook. The provider runs off-thread; if it has not
/// answered within `timeout` the template text is used.
struct PhrasingHook {
  PhrasingProvider provider;
  std::chrono::milliseconds timeout{500};
};

/// The query id travels with the text so answers bind to the query.
struct PhrasedQuery {
  std::string query_id;
  std::string text;
};

QueryDescription describe(const mint::Query& query, const world::Scene& scene);

/// Throws ValidationError on unknown region/object ids.
PhrasedQuery phrase_query(const mint::Query& query, const world::Scene& scene,
                          const PhrasingHook* hook = nullptr);

/// nullopt asks the caller to re-prompt.
std::optional<mint::Answer> parse_answer(std::string_view text);
std::string_view canonical_text(mint::Answer answer);

/// Truthful answer from hidden ground truth.
mint::Answer oracle_answer(const mint::Query& query, const world::Scenario& scenario);

// ---------------------------------------------------------------------------
// Operator backends

enum class BackendKind { ScriptedOracle, Interactive };

class Operator {
 public:
  virtual ~Operator() = default;
  virtual BackendKind kind() const = 0;
  virtual mint::Answer ask(const mint::Query& query, const PhrasedQuery& phrased) = 0;
};

class ScriptedOracle final : public Operator {
 public:
  explicit ScriptedOracle(const world::Scenario& scenario) : scenario_(scenario) {}
  BackendKind kind() const override { return BackendKind::ScriptedOracle; }
  mint::Answer ask(const mint::Query& query, const PhrasedQuery&) override {
    return oracle_answer(query, scenario_);
  }

 private:
  const world::Scenario& scenario_;
};

/// Reads free-text answers from a stream, re-prompting on unparseable input.
/// End of input answers Unknown.
class ConsoleOperator final : public Operator {
 public:
  ConsoleOperator(std::istream& in, std::ostream& out) : in_(in), out_(out) {}
  BackendKind kind() const override { return BackendKind::Interactive; }
  mint::Answer ask(const mint::Query& query, const PhrasedQuery& phrased) override;

 private:
  std::istream& in_;
  std::ostream& out_;
};

/// Replays a fixed answer sequence; Unknown once exhausted.
class ReplayOperator final : public Operator {
 public:
  explicit ReplayOperator(std::vector<mint::Answer> answers) : answers_(std::move(answers)) {}
  BackendKind kind() const override { return BackendKind::Interactive; }
  mint::Answer ask(const mint::Query&, const PhrasedQuery&) override {
    return next_ < answers_.size() ? answers_[next_++] : mint::Answer::Unknown;
  }

 private:
  std::vector<mint::Answer> answers_;
  std::size_t next_ = 0;
};

}  // namespace mintops::elicitation
