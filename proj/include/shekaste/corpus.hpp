#pragma once

// Parallel-corpus records: JSONL persistence, validation, candidate filtering,
// dictionary extraction and statistics.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "shekaste/alignment.hpp"
#include "shekaste/lexicon.hpp"
#include "shekaste/vocabulary.hpp"

namespace shekaste {

enum class Source { web, twitter, instagram, myself, movie, messenger, weblog, book };
enum class Status { draft, reviewed, confirmed };

inline constexpr Source kAllSources[] = {Source::web,    Source::twitter,   Source::instagram, Source::myself,
                                         Source::movie,  Source::messenger, Source::weblog,    Source::book};

std::string_view to_string(Source s);
std::string_view to_string(Status s);
std::optional<Source> parse_source(std::string_view name);
std::optional<Status> parse_status(std::string_view name);

// Only draft -> reviewed -> confirmed (and staying put) is allowed.
bool status_transition_allowed(Status from, Status to);

struct CorpusRecord {
  std::string id;
  std::string informal;
  std::string formal;
  std::vector<AlignmentLink> links;
  Source source = Source::web;
  std::string annotator;
  std::string created_at;  // ISO 8601 with UTC offset
  Status status = Status::draft;
  bool syntactic_change = false;

  bool operator==(const CorpusRecord&) const = default;
};

// True for "YYYY-MM-DDThh:mm:ss[.fff](Z|+hh:mm|-hh:mm)".
bool is_iso8601_with_offset(std::string_view text);
std::string current_timestamp();

class CorpusError : public DataError {
 public:
  CorpusError(const std::string& source, std::size_t line, const std::string& message, std::string record_id = {});
  const std::string& record_id() const { return record_id_; }

 private:
  std::string record_id_;
};

nlohmann::ordered_json record_to_json(const CorpusRecord& record);
// Throws std::invalid_argument describing the first bad field.
CorpusRecord record_from_json(const nlohmann::json& value);
std::string serialize_record(const CorpusRecord& record);

// Record-at-a-time JSONL reader. Blank lines are skipped.
class CorpusReader {
 public:
  explicit CorpusReader(std::istream& in, std::string source = "<corpus>");
  // Throws CorpusError naming the line and, when parseable, the record id.
  std::optional<CorpusRecord> next();
  std::size_t line() const { return line_; }

 private:
  std::istream& in_;
  std::string source_;
  std::string buffer_;
  std::size_t line_ = 0;
};

void for_each_record(const std::filesystem::path& path, const std::function<void(const CorpusRecord&)>& fn);
std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path);
std::vector<CorpusRecord> parse_corpus(std::istream& in, const std::string& source = "<corpus>");
void write_corpus(std::span<const CorpusRecord> records, std::ostream& out);
void save_corpus(std::span<const CorpusRecord> records, const std::filesystem::path& path);

struct RecordIssue {
  enum class Severity { error, warning };
  Severity severity = Severity::error;
  std::string code;
  std::string message;
  std::vector<std::size_t> links;  // offending link indices
  std::optional<std::size_t> token;

  bool is_error() const { return severity == Severity::error; }
};

nlohmann::ordered_json issue_to_json(const RecordIssue& issue);
bool has_errors(std::span<const RecordIssue> issues);

// `previous` is the stored version when validating an update; status
// transitions are checked against it.
std::vector<RecordIssue> validate_record(const CorpusRecord& record, const CorpusRecord* previous = nullptr);

// Candidate filtering: "26-40 space separated tokens with at least 4
// informal words".
inline constexpr std::size_t kMinCandidateTokens = 26;
inline constexpr std::size_t kMaxCandidateTokens = 40;
inline constexpr std::size_t kMinInformalHits = 4;

std::size_t count_lexicon_hits(std::span<const std::string> tokens, const Lexicon& informal_lexicon);
bool is_candidate(std::string_view sentence, const Lexicon& informal_lexicon);
std::vector<std::string> filter_candidates(std::span<const std::string> sentences, const Lexicon& informal_lexicon);

// (informal span text, formal span text) for every link with two non-empty
// spans, in link order.
std::vector<std::pair<std::string, std::string>> link_pairs(const CorpusRecord& record);

struct DictionaryExtraction {
  Lexicon dictionary;
  std::size_t unique_word_pairs = 0;  // identity pairs included
  std::size_t skipped_long_phrases = 0;
};

DictionaryExtraction extract_dictionary(std::span<const CorpusRecord> records);

struct CorpusStats {
  std::size_t record_count = 0;
  double avg_formal_length = 0;
  double avg_informal_length = 0;
  std::size_t alignment_count = 0;
  std::size_t unique_word_pairs = 0;
  double pct_syntactic_change = 0;
  std::size_t dictionary_size = 0;
  std::map<Source, std::size_t> source_distribution;
  // Raw sums behind the averages.
  std::size_t formal_tokens = 0;
  std::size_t informal_tokens = 0;
  std::size_t syntactic_change_records = 0;

  bool operator==(const CorpusStats&) const = default;
};

// Mergeable accumulator; merge order does not change the result.
class StatsAccumulator {
 public:
  void add(const CorpusRecord& record);
  void merge(const StatsAccumulator& other);
  CorpusStats result() const;

 private:
  std::size_t records_ = 0;
  std::size_t formal_tokens_ = 0;
  std::size_t informal_tokens_ = 0;
  std::size_t links_ = 0;
  std::size_t syntactic_ = 0;
  std::set<std::pair<std::string, std::string>> pairs_;
  std::map<Source, std::size_t> sources_;
};

CorpusStats compute_stats(std::span<const CorpusRecord> records);
nlohmann::ordered_json stats_to_json(const CorpusStats& stats);
nlohmann::ordered_json source_distribution_json(const CorpusStats& stats);

}  // namespace shekaste
