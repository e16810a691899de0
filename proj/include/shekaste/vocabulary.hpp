#pragma once

// Tagged formal vocabulary, verb lexicon and plain word lists.

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace shekaste {

class DataError : public std::runtime_error {
 public:
  DataError(const std::string& source, std::size_t line, const std::string& message);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Formal words with part-of-speech style tags (N, ADJ, PRON, 1s, V, ...).
// Words tagged only with kLexiconTag are informal words with a known formal
// equivalent; they count as known for rule validation but not as formal.
class Vocabulary {
 public:
  static constexpr std::string_view kLexiconTag = "LEX";

  void add(const std::string& word, const std::vector<std::string>& tags);

  bool contains(std::string_view word) const;
  bool has_tag(std::string_view word, std::string_view tag) const;
  bool is_formal(std::string_view word) const;
  const std::set<std::string>* tags(std::string_view word) const;
  std::size_t size() const { return words_.size(); }

  static Vocabulary parse(std::istream& in, const std::string& source = "<vocabulary>");
  static Vocabulary load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::set<std::string>, std::less<>> words_;
};

struct VerbLexEntry {
  std::string informal;  // empty for formal-only entries
  std::string formal;
  bool is_verb = true;
  bool takes_destination = false;
  bool perfect_participle = false;
  bool subjunctive = false;
  bool imperative = false;
  bool present_indicative = false;
  bool intransitive = false;
  std::string person;  // "1s", "2s", ... or empty
  std::optional<std::string> causative_of;
};

class VerbLexicon {
 public:
  void add(VerbLexEntry entry);

  const VerbLexEntry* find_formal(std::string_view formal) const;
  const VerbLexEntry* find_informal(std::string_view informal) const;
  std::size_t size() const { return entries_.size(); }
  const std::vector<VerbLexEntry>& entries() const { return entries_; }

  // Columns: informal, formal, comma separated features.
  static VerbLexicon parse(std::istream& in, const std::string& source = "<verbs>");
  static VerbLexicon load(const std::filesystem::path& path);

 private:
  std::vector<VerbLexEntry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_formal_;
  std::map<std::string, std::size_t, std::less<>> by_informal_;
};

// One entry per line; '#' comments and blank lines skipped. Entries may be
// multi-word phrases.
std::vector<std::string> parse_word_list(std::istream& in);
std::vector<std::string> load_word_list(const std::filesystem::path& path);

// Splits on `sep`, keeping empty fields.
std::vector<std::string> split_fields(std::string_view line, char sep);
std::string trim(std::string_view s);

}  // namespace shekaste
