#pragma once

// Declarative token rewrite rules.
//
// Rule file: one rule per line,
//   id | category | priority | pattern | replacement | guards | flags
// Fields are separated by " | " (space, bar, space) so that patterns can use
// '|' for alternation. '#' starts a comment line. '-' marks an empty
// guards/flags field. See docs/rule_grammar.md.

#include <memory>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "shekaste/pattern.hpp"
#include "shekaste/vocabulary.hpp"

namespace shekaste {

enum class RuleCategory { phonological, morphological, syntactic, mistake };

std::string_view to_string(RuleCategory c);
std::optional<RuleCategory> parse_rule_category(std::string_view name);

struct Guard {
  enum class Kind { left_pattern, right_pattern, left_tag, right_tag, left_known, right_known,
                    first, last };
  Kind kind = Kind::first;
  bool negated = false;
  std::optional<Pattern> pattern;
  std::vector<std::string> tags;
  std::string source;
};

struct Validation {
  bool enabled = false;
  // When set, this expansion (not the whole result) must be known.
  std::optional<Template> target;
  std::vector<std::string> tags;
};

struct Rule {
  std::string id;
  RuleCategory category = RuleCategory::phonological;
  int priority = 0;
  Pattern pattern;
  Template replacement;
  std::vector<Guard> guards;
  Validation validate;
  // Skip tokens that are already formal words.
  bool unknown_only = false;
  std::size_t line = 0;
};

struct NeighborContext {
  std::optional<std::string_view> left;
  std::optional<std::string_view> right;
  std::size_t index = 0;
  std::size_t count = 1;
};

struct RuleIssue {
  std::size_t line = 0;
  std::string message;
};

class RuleParseError : public std::runtime_error {
 public:
  explicit RuleParseError(std::vector<RuleIssue> issues);
  const std::vector<RuleIssue>& issues() const { return issues_; }

 private:
  std::vector<RuleIssue> issues_;
};

// Returns the rewritten surface (possibly several space separated tokens, or
// empty for deletion) when the pattern matches, all guards hold and
// validation passes.
std::optional<std::string> apply_rule(const Rule& rule, std::string_view token,
                                      const NeighborContext& context, const Vocabulary& vocabulary);

struct TraceEntry {
  std::size_t token_index = 0;
  std::string rule_id;
  std::string before;
  std::string after;

  bool operator==(const TraceEntry&) const = default;
};

struct StageResult {
  // One surface per input token, same positions as the input.
  std::vector<std::string> surfaces;
  std::vector<TraceEntry> trace;
};

class RuleSet {
 public:
  static constexpr RuleCategory kStageOrder[] = {RuleCategory::morphological,
                                                 RuleCategory::phonological,
                                                 RuleCategory::mistake};

  RuleSet();
  RuleSet(std::vector<Rule> rules, std::shared_ptr<const Vocabulary> vocabulary);

  // Rules of one stage in (priority, id) order.
  std::span<const Rule> stage(RuleCategory category) const;
  const Rule* find(std::string_view id) const;
  std::size_t size() const;
  bool empty() const { return size() == 0; }

  const Vocabulary& vocabulary() const { return *vocabulary_; }
  RuleSet with_vocabulary(std::shared_ptr<const Vocabulary> vocabulary) const;

  StageResult apply_stage(RuleCategory category, std::span<const std::string> tokens) const;

 private:
  std::vector<Rule> morphological_;
  std::vector<Rule> phonological_;
  std::vector<Rule> mistake_;
  std::shared_ptr<const Vocabulary> vocabulary_;
};

// Parses a whole rule file. Throws RuleParseError listing every bad line;
// no partial rule set is ever returned.
RuleSet parse_ruleset(std::string_view text, std::shared_ptr<const Vocabulary> vocabulary = nullptr);
RuleSet load_ruleset(const std::filesystem::path& path,
                     std::shared_ptr<const Vocabulary> vocabulary = nullptr);

// Re-applies a stage trace to its input.
std::vector<std::string> replay_trace(std::span<const std::string> input,
                                      std::span<const TraceEntry> trace);

}  // namespace shekaste
