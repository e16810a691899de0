#pragma once

// Informal -> formal conversion with token-range alignments.

#include <filesystem>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "shekaste/alignment.hpp"
#include "shekaste/lexicon.hpp"
#include "shekaste/rules.hpp"
#include "shekaste/text.hpp"
#include "shekaste/vocabulary.hpp"

namespace shekaste {

// Everything the converter reads. Immutable once built.
struct ConverterResources {
  std::shared_ptr<const Vocabulary> formal_vocabulary;
  Lexicon lexicon;
  VerbLexicon verbs;
  AmbiguityTable ambiguity;
  RuleSet rules;
  std::vector<std::vector<std::string>> idioms;
  std::set<std::string, std::less<>> destinations;

  // Reads vocabulary.tsv, lexicon.tsv, verbs.tsv, ambiguity.tsv, rules.txt,
  // idioms.txt and destinations.txt from `data_dir`.
  static ConverterResources load(const std::filesystem::path& data_dir);
};

struct ConverterConfig {
  bool syntactic_transforms = true;
  // Accepted alignments used to rank suffix expansions.
  std::shared_ptr<const Lexicon> history;
};

struct ConversionStep {
  std::string stage;   // phrase-lexicon, lexicon, morphological, ..., syntactic, orthography
  std::string source;  // rule id, "lexicon", or transform name
  std::size_t informal_index = 0;
  std::string before;
  std::string after;
};

struct Alternative {
  std::size_t informal_index = 0;
  std::vector<std::string> expansions;
};

struct ConversionResult {
  std::string formal_text;
  std::vector<std::string> informal_tokens;
  std::vector<std::string> formal_tokens;
  std::vector<AlignmentLink> links;
  std::vector<ConversionStep> trace;
  std::vector<Alternative> alternatives;
  std::vector<EmphasisFlag> emphasis_flags;
  bool syntactic_change = false;
};

struct DisambiguationContext {
  std::span<const std::string> sentence;
  std::size_t position = 0;
  const Vocabulary& vocabulary;
  const VerbLexicon& verbs;
};

struct Disambiguation {
  std::string expansion;
  std::string role;
  std::vector<std::string> alternatives;
};

// Picks an expansion for `token` = stem + `suffix`. Throws
// std::invalid_argument when `suffix` is not in the table.
Disambiguation disambiguate(const AmbiguityTable& table, std::string_view token, std::string_view suffix,
                            const DisambiguationContext& context, const Lexicon& history);

class Converter {
 public:
  static constexpr int kMaxRounds = 4;

  explicit Converter(ConverterResources resources);

  ConversionResult convert(std::string_view informal, const ConverterConfig& config = {}) const;

  const ConverterResources& resources() const { return resources_; }
  // Formal vocabulary extended with verb forms and lexicon keys.
  const Vocabulary& known_words() const { return *known_; }

  struct Work;
  struct State;

 private:
  void apply_lexicon(State& state) const;
  void apply_rule_stages(State& state) const;
  void apply_phrase_morphology(State& state) const;
  void apply_disambiguation(State& state, const ConverterConfig& config) const;
  void apply_syntactic(State& state) const;
  void join_imperfective(State& state) const;
  std::vector<Work> expand(const Work& base, const std::vector<std::string>& parts, State& state,
                           std::string_view stage) const;
  void finish(State& state) const;

  const VerbLexEntry* verb(std::string_view core) const;
  bool is_verb(std::string_view core) const;
  bool has_tag(std::string_view core, std::string_view tag) const;
  std::string pronoun_person(std::string_view core) const;

  ConverterResources resources_;
  std::shared_ptr<const Vocabulary> known_;
  RuleSet rules_;
  Lexicon empty_history_;
};

// Ezafe spelling of a head noun: vowel-final stems take a linking yeh.
std::string with_ezafe(std::string_view noun);

}  // namespace shekaste
