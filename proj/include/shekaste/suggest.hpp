#pragma once

// Alignment suggestions from previously accepted links.

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shekaste/alignment.hpp"
#include "shekaste/corpus.hpp"
#include "shekaste/lexicon.hpp"

namespace shekaste {

class InvalidRecordError : public std::runtime_error {
 public:
  explicit InvalidRecordError(std::vector<RecordIssue> issues);
  const std::vector<RecordIssue>& issues() const { return issues_; }

 private:
  std::vector<RecordIssue> issues_;
};

// Counts of accepted (informal phrase, formal phrase) pairs plus the
// neighbouring informal tokens each pair was seen with.
class AlignmentHistory {
 public:
  static constexpr std::string_view kSnapshotHeader = "shekaste-history v1";

  using Pair = std::pair<std::string, std::string>;
  using Context = std::pair<std::string, std::string>;  // left, right; "" at edges

  // Throws InvalidRecordError when validate_record reports errors.
  void ingest(const CorpusRecord& record);
  void add(const std::string& informal, const std::string& formal, const Context& context, std::uint64_t count = 1);

  std::uint64_t count(std::string_view informal, std::string_view formal) const;
  // Formal phrases seen for `informal`, with counts.
  std::vector<std::pair<std::string, std::uint64_t>> formal_for(std::string_view informal) const;
  // Sum over samples of (left matches) + (right matches), weighted by count.
  std::uint64_t context_overlap(std::string_view informal, std::string_view formal, std::string_view left,
                                std::string_view right) const;

  std::size_t size() const { return pairs_.size(); }
  bool empty() const { return pairs_.empty(); }
  bool operator==(const AlignmentHistory&) const = default;

  // Non-identity pairs with informal phrases of at most four tokens.
  Lexicon to_lexicon() const;

  void write(std::ostream& out) const;
  static AlignmentHistory read(std::istream& in, const std::string& source = "<history>");
  void save(const std::filesystem::path& path) const;
  static AlignmentHistory load(const std::filesystem::path& path);

 private:
  std::map<std::string, std::map<std::string, std::uint64_t, std::less<>>, std::less<>> pairs_;
  std::map<Pair, std::map<Context, std::uint64_t>> contexts_;
};

// Rebuilds from reviewed and confirmed records only.
AlignmentHistory rebuild_history(std::span<const CorpusRecord> records);

enum class Provenance { history, diagonal_fallback };
std::string_view to_string(Provenance p);

struct Suggestion {
  AlignmentLink link;
  std::uint64_t score = 0;
  std::uint64_t tie_break = 0;
  Provenance provenance = Provenance::diagonal_fallback;

  bool operator==(const Suggestion&) const = default;
};

// Greedy longest-match over informal n-grams (4 down to 1, leftmost first);
// candidates ranked by frequency, context overlap, earliest formal position,
// then formal phrase. Unclaimed tokens get a diagonal fallback. The result
// covers both sentences and is sorted by informal then formal start.
std::vector<Suggestion> suggest(std::span<const std::string> informal, std::span<const std::string> formal,
                                const AlignmentHistory& history);

}  // namespace shekaste
