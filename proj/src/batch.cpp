#include "shekaste/batch.hpp"

#include <omp.h>

#include <stdexcept>

namespace shekaste {

namespace {

ConversionResult convert_one(const Converter& converter, const std::string& line, const ConverterConfig& config) {
  try {
    return converter.convert(line, config);
  } catch (const DecodeError& e) {
    ConversionResult r;
    r.trace.push_back({"error", "decode", 0, line, e.what()});
    return r;
  }
}

}  // namespace

int available_threads() { return omp_get_max_threads(); }

std::vector<ConversionResult> convert_batch(const Converter& converter, std::span<const std::string> lines,
                                            const ConverterConfig& config, Execution execution) {
  std::vector<ConversionResult> out(lines.size());
  const auto n = static_cast<std::ptrdiff_t>(lines.size());
  if (execution == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = convert_one(converter, lines[i], config);
    return out;
  }
#pragma omp parallel for schedule(dynamic, 16)
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = convert_one(converter, lines[i], config);
  return out;
}

BleuStats corpus_bleu_stats(std::span<const std::vector<std::string>> outputs,
                            std::span<const std::vector<std::string>> references, int max_order,
                            Execution execution) {
  if (outputs.size() != references.size()) throw std::invalid_argument("hypothesis and reference counts differ");
  const auto n = static_cast<std::ptrdiff_t>(outputs.size());
  BleuStats total(max_order);
  if (execution == Execution::serial) {
    for (std::ptrdiff_t i = 0; i < n; ++i) total += sentence_stats(outputs[i], std::span(&references[i], 1), max_order);
    return total;
  }
  // Integer sums, so the merge order cannot change the result.
#pragma omp parallel
  {
    BleuStats local(max_order);
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) local += sentence_stats(outputs[i], std::span(&references[i], 1), max_order);
#pragma omp critical
    total += local;
  }
  return total;
}

CorpusStats corpus_stats(std::span<const CorpusRecord> records, Execution execution) {
  if (execution == Execution::serial) return compute_stats(records);
  const auto n = static_cast<std::ptrdiff_t>(records.size());
  StatsAccumulator total;
#pragma omp parallel
  {
    StatsAccumulator local;
#pragma omp for schedule(static) nowait
    for (std::ptrdiff_t i = 0; i < n; ++i) local.add(records[i]);
#pragma omp critical
    total.merge(local);
  }
  return total.result();
}

}  // namespace shekaste
