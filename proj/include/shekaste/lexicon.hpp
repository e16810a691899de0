#pragma once

// Informal -> formal phrase dictionary and the suffix ambiguity table.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace shekaste {

inline constexpr std::size_t kMaxInformalPhraseTokens = 4;
inline constexpr std::size_t kContextSampleBound = 50;

struct ContextSample {
  std::string previous;
  std::string next;

  bool operator==(const ContextSample&) const = default;
};

struct LexEntry {
  std::string informal;
  std::string formal;
  std::uint64_t frequency = 1;
  std::vector<ContextSample> contexts;
  std::string category;
};

// Equality over the persisted columns; context samples are not serialized.
bool same_persisted(const LexEntry& a, const LexEntry& b);

class Lexicon {
 public:
  // Adds `entry`, summing frequency into an existing (informal, formal) pair.
  // Throws std::invalid_argument for identity pairs, zero frequency or an
  // informal phrase longer than kMaxInformalPhraseTokens.
  void add(LexEntry entry);

  // Records one observation of the pair with its neighbours. Frequency is
  // incremented and the context kept by reservoir sampling.
  void observe(const std::string& informal, const std::string& formal, const ContextSample& context,
               const std::string& category = {});

  // Sorted by frequency descending, then formal phrase in code point order.
  std::vector<LexEntry> lookup(std::string_view informal) const;
  const LexEntry* find(std::string_view informal, std::string_view formal) const;
  bool contains_informal(std::string_view informal) const;

  std::size_t size() const;
  bool empty() const { return entries_.empty(); }
  std::size_t max_informal_tokens() const { return max_informal_tokens_; }

  // Entries sorted by informal then formal.
  std::vector<const LexEntry*> entries() const;

  bool operator==(const Lexicon& other) const;

 private:
  std::map<std::string, std::map<std::string, LexEntry, std::less<>>, std::less<>> entries_;
  std::size_t max_informal_tokens_ = 0;
};

Lexicon merge(const Lexicon& a, const Lexicon& b);

struct LexiconLoad {
  Lexicon lexicon;
  std::vector<std::string> warnings;
};

// TSV: informal, formal, frequency, category. Throws DataError naming the line.
LexiconLoad parse_lexicon(std::istream& in, const std::string& source = "<lexicon>");
LexiconLoad load_lexicon(const std::filesystem::path& path);
void write_lexicon(const Lexicon& lexicon, std::ostream& out);
void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path);

struct AmbiguityCandidate {
  std::string expansion;  // template over {stem}
  std::string role;
  std::string cue;        // '-' for none; conjunction with '&'
  std::string check;      // '-' or template[@TAG/TAG]
};

struct AmbiguityEntry {
  std::string suffix_surface;
  std::vector<AmbiguityCandidate> candidates;
};

class AmbiguityTable {
 public:
  void add(const std::string& suffix, AmbiguityCandidate candidate);
  const AmbiguityEntry* find(std::string_view suffix) const;
  // Suffixes ordered longest first.
  std::vector<std::string> suffixes() const;
  std::size_t size() const { return entries_.size(); }

  // TSV: suffix, expansion, role, cue, check.
  static AmbiguityTable parse(std::istream& in, const std::string& source = "<ambiguity>");
  static AmbiguityTable load(const std::filesystem::path& path);

 private:
  std::map<std::string, AmbiguityEntry, std::less<>> entries_;
};

}  // namespace shekaste
