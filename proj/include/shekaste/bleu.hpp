#pragma once

// BLEU with clipped n-gram counts, brevity penalty and corpus-level
// aggregation.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace shekaste {

struct LengthRange {
  std::size_t min = 0;
  std::size_t max = 0;

  bool contains(std::size_t n) const { return n >= min && n <= max; }
};

struct BleuConfig {
  int max_order = 4;
  // Empty means uniform 1/max_order.
  std::vector<double> weights;
  // Add-one on orders >= 2 whose match count is zero.
  bool smoothing = true;
  // Applied to reference token counts by evaluate_corpus.
  std::optional<LengthRange> length_filter;

  // Throws std::invalid_argument.
  void validate() const;
  double weight(int order) const;  // 1-based
};

// Sufficient statistics; summing them over sentences gives corpus BLEU.
struct BleuStats {
  std::size_t candidate_length = 0;
  std::size_t reference_length = 0;
  std::vector<std::uint64_t> matches;  // clipped, per order
  std::vector<std::uint64_t> totals;

  explicit BleuStats(int max_order = 4) : matches(max_order, 0), totals(max_order, 0) {}
  BleuStats& operator+=(const BleuStats& other);
  bool operator==(const BleuStats&) const = default;
};

// Reference length is the closest reference length, shorter on ties.
BleuStats sentence_stats(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references,
                         int max_order = 4);

struct BleuBreakdown {
  double score = 0;
  double brevity_penalty = 0;
  std::vector<double> precisions;
};

BleuBreakdown bleu_breakdown(const BleuStats& stats, const BleuConfig& config);
double bleu_from_stats(const BleuStats& stats, const BleuConfig& config);

// Empty candidate scores 0 and appends a warning when `warnings` is given.
// Throws std::invalid_argument without references.
double bleu(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references,
            const BleuConfig& config = {}, std::vector<std::string>* warnings = nullptr);

struct SentenceScore {
  std::size_t index = 0;
  std::size_t hypothesis_length = 0;
  std::size_t reference_length = 0;
  double bleu = 0;
};

struct EvaluationReport {
  double corpus_bleu = 0;
  double brevity_penalty = 0;
  std::vector<double> precisions;
  std::size_t total_pairs = 0;
  std::size_t scored_pairs = 0;
  std::size_t filtered_out = 0;
  std::size_t hypothesis_tokens = 0;
  std::size_t reference_tokens = 0;
  std::optional<LengthRange> length_filter;
  std::vector<SentenceScore> sentences;  // scored pairs only
  std::vector<std::string> warnings;
};

// Throws std::invalid_argument when the lists differ in length.
EvaluationReport evaluate_corpus(std::span<const std::vector<std::string>> outputs,
                                 std::span<const std::vector<std::string>> references, const BleuConfig& config = {});
// Tokenizes each line with the text normalizer first.
EvaluationReport evaluate_lines(std::span<const std::string> outputs, std::span<const std::string> references,
                                const BleuConfig& config = {});

// 0.8169 -> "81.6900%".
std::string format_percent(double fraction);
nlohmann::ordered_json report_to_json(const EvaluationReport& report);
std::string report_to_text(const EvaluationReport& report);

}  // namespace shekaste
