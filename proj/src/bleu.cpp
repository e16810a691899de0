#include "shekaste/bleu.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "shekaste/text.hpp"

namespace shekaste {

namespace {

using NgramCounts = std::map<std::vector<std::string>, std::uint64_t>;

NgramCounts count_ngrams(std::span<const std::string> tokens, int n) {
  NgramCounts out;
  const auto len = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + len <= tokens.size(); ++i) {
    ++out[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + len))];
  }
  return out;
}

}  // namespace

void BleuConfig::validate() const {
  if (max_order < 1) throw std::invalid_argument("max_order must be at least 1");
  if (weights.empty()) return;
  if (weights.size() != static_cast<std::size_t>(max_order)) {
    throw std::invalid_argument("expected one weight per order");
  }
  double sum = 0;
  for (double w : weights) {
    if (!(w >= 0)) throw std::invalid_argument("weights must be non-negative");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("weights must sum to 1");
  if (length_filter && length_filter->min > length_filter->max) {
    throw std::invalid_argument("length filter min exceeds max");
  }
}

double BleuConfig::weight(int order) const {
  return weights.empty() ? 1.0 / max_order : weights[static_cast<std::size_t>(order - 1)];
}

BleuStats& BleuStats::operator+=(const BleuStats& other) {
  if (other.matches.size() != matches.size()) throw std::invalid_argument("BLEU order mismatch");
  candidate_length += other.candidate_length;
  reference_length += other.reference_length;
  for (std::size_t i = 0; i < matches.size(); ++i) {
    matches[i] += other.matches[i];
    totals[i] += other.totals[i];
  }
  return *this;
}

BleuStats sentence_stats(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references,
                         int max_order) {
  if (references.empty()) throw std::invalid_argument("at least one reference is required");
  BleuStats s(max_order);
  s.candidate_length = candidate.size();
  std::size_t best = references.front().size();
  for (const auto& r : references) {
    const auto d = [&](std::size_t len) { return len > candidate.size() ? len - candidate.size() : candidate.size() - len; };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  s.reference_length = best;

  for (int n = 1; n <= max_order; ++n) {
    const auto cand = count_ngrams(candidate, n);
    NgramCounts max_ref;
    for (const auto& r : references) {
      for (const auto& [g, c] : count_ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    std::uint64_t matched = 0;
    std::uint64_t total = 0;
    for (const auto& [g, c] : cand) {
      total += c;
      const auto it = max_ref.find(g);
      if (it != max_ref.end()) matched += std::min(c, it->second);
    }
    s.matches[static_cast<std::size_t>(n - 1)] = matched;
    s.totals[static_cast<std::size_t>(n - 1)] = total;
  }
  return s;
}

BleuBreakdown bleu_breakdown(const BleuStats& stats, const BleuConfig& config) {
  config.validate();
  if (stats.matches.size() != static_cast<std::size_t>(config.max_order)) {
    throw std::invalid_argument("statistics order does not match the configuration");
  }
  BleuBreakdown b;
  if (stats.candidate_length == 0) return b;
  b.brevity_penalty = stats.candidate_length >= stats.reference_length
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(stats.reference_length) /
                                               static_cast<double>(stats.candidate_length));
  double log_sum = 0;
  bool zero = false;
  for (int n = 1; n <= config.max_order; ++n) {
    const auto m = stats.matches[static_cast<std::size_t>(n - 1)];
    const auto t = stats.totals[static_cast<std::size_t>(n - 1)];
    double p;
    if (t == 0) {
      // Candidate shorter than n: nothing to be wrong about.
      p = 1.0;
    } else if (m == 0 && n >= 2 && config.smoothing) {
      p = 1.0 / static_cast<double>(t + 1);
    } else {
      p = static_cast<double>(m) / static_cast<double>(t);
    }
    b.precisions.push_back(p);
    if (p == 0) zero = true;
    else log_sum += config.weight(n) * std::log(p);
  }
  b.score = zero ? 0.0 : std::clamp(b.brevity_penalty * std::exp(log_sum), 0.0, 1.0);
  return b;
}

double bleu_from_stats(const BleuStats& stats, const BleuConfig& config) { return bleu_breakdown(stats, config).score; }

double bleu(std::span<const std::string> candidate, std::span<const std::vector<std::string>> references,
            const BleuConfig& config, std::vector<std::string>* warnings) {
  if (references.empty()) throw std::invalid_argument("at least one reference is required");
  if (candidate.empty()) {
    if (warnings) warnings->push_back("empty candidate scored 0");
    return 0.0;
  }
  return bleu_from_stats(sentence_stats(candidate, references, config.max_order), config);
}

EvaluationReport evaluate_corpus(std::span<const std::vector<std::string>> outputs,
                                 std::span<const std::vector<std::string>> references, const BleuConfig& config) {
  config.validate();
  if (outputs.size() != references.size()) {
    throw std::invalid_argument("hypothesis count " + std::to_string(outputs.size()) +
                                " does not match reference count " + std::to_string(references.size()));
  }
  EvaluationReport report;
  report.total_pairs = outputs.size();
  report.length_filter = config.length_filter;
  BleuStats total(config.max_order);
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (config.length_filter && !config.length_filter->contains(references[i].size())) {
      ++report.filtered_out;
      continue;
    }
    const auto s = sentence_stats(outputs[i], std::span(&references[i], 1), config.max_order);
    total += s;
    if (outputs[i].empty()) report.warnings.push_back("pair " + std::to_string(i + 1) + ": empty hypothesis scored 0");
    report.sentences.push_back({i, outputs[i].size(), references[i].size(), bleu_from_stats(s, config)});
  }
  report.scored_pairs = report.sentences.size();
  report.hypothesis_tokens = total.candidate_length;
  report.reference_tokens = total.reference_length;
  if (report.scored_pairs == 0) report.warnings.push_back("no pairs left after the length filter");
  const auto b = bleu_breakdown(total, config);
  report.corpus_bleu = b.score;
  report.brevity_penalty = b.brevity_penalty;
  report.precisions = b.precisions;
  return report;
}

EvaluationReport evaluate_lines(std::span<const std::string> outputs, std::span<const std::string> references,
                                const BleuConfig& config) {
  std::vector<std::vector<std::string>> hyp;
  std::vector<std::vector<std::string>> ref;
  hyp.reserve(outputs.size());
  ref.reserve(references.size());
  for (const auto& l : outputs) hyp.push_back(normalized_tokens(l));
  for (const auto& l : references) ref.push_back(normalized_tokens(l));
  return evaluate_corpus(hyp, ref, config);
}

std::string format_percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4f%%", fraction * 100.0);
  return buf;
}

nlohmann::ordered_json report_to_json(const EvaluationReport& r) {
  nlohmann::ordered_json out;
  out["corpus_bleu"] = r.corpus_bleu;
  out["corpus_bleu_percent"] = format_percent(r.corpus_bleu);
  out["brevity_penalty"] = r.brevity_penalty;
  out["precisions"] = r.precisions;
  out["total_pairs"] = r.total_pairs;
  out["scored_pairs"] = r.scored_pairs;
  out["filtered_out"] = r.filtered_out;
  out["hypothesis_tokens"] = r.hypothesis_tokens;
  out["reference_tokens"] = r.reference_tokens;
  if (r.length_filter) {
    out["length_filter"] = {{"min", r.length_filter->min}, {"max", r.length_filter->max}};
  } else {
    out["length_filter"] = nullptr;
  }
  auto sentences = nlohmann::ordered_json::array();
  for (const auto& s : r.sentences) {
    nlohmann::ordered_json row;
    row["index"] = s.index;
    row["hypothesis_length"] = s.hypothesis_length;
    row["reference_length"] = s.reference_length;
    row["bleu"] = s.bleu;
    sentences.push_back(std::move(row));
  }
  out["sentences"] = std::move(sentences);
  out["warnings"] = r.warnings;
  return out;
}

std::string report_to_text(const EvaluationReport& r) {
  std::ostringstream out;
  out << "BLEU " << format_percent(r.corpus_bleu) << '\n';
  out << "pairs: " << r.total_pairs << " total, " << r.scored_pairs << " scored, " << r.filtered_out
      << " filtered out";
  if (r.length_filter) out << " (reference length outside " << r.length_filter->min << "-" << r.length_filter->max << ")";
  out << '\n';
  out << "brevity penalty: " << r.brevity_penalty << "  (hyp " << r.hypothesis_tokens << " / ref "
      << r.reference_tokens << " tokens)\n";
  for (std::size_t i = 0; i < r.precisions.size(); ++i) {
    out << "p" << i + 1 << ": " << format_percent(r.precisions[i]) << '\n';
  }
  for (const auto& w : r.warnings) out << "warning: " << w << '\n';
  for (const auto& s : r.sentences) out << "#" << s.index + 1 << '\t' << format_percent(s.bleu) << '\n';
  return out.str();
}

}  // namespace shekaste
