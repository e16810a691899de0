#pragma once

// Batch kernels. Each has a serial reference and an OpenMP version that must
// produce identical results.

#include <span>
#include <string>
#include <vector>

#include "shekaste/bleu.hpp"
#include "shekaste/converter.hpp"
#include "shekaste/corpus.hpp"

namespace shekaste {

enum class Execution { serial, parallel };

// Result i belongs to input i. A line that fails to decode yields an empty
// result whose trace holds a single "error" step.
std::vector<ConversionResult> convert_batch(const Converter& converter, std::span<const std::string> lines,
                                            const ConverterConfig& config = {},
                                            Execution execution = Execution::parallel);

// Summed sentence statistics over aligned pairs.
BleuStats corpus_bleu_stats(std::span<const std::vector<std::string>> outputs,
                            std::span<const std::vector<std::string>> references, int max_order = 4,
                            Execution execution = Execution::parallel);

CorpusStats corpus_stats(std::span<const CorpusRecord> records, Execution execution = Execution::parallel);

int available_threads();

}  // namespace shekaste
