// Serial vs OpenMP timings for the batch kernels. Each pair of results is
// compared before timings are printed.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <random>
#include <string>

#include "shekaste/batch.hpp"

using namespace shekaste;

namespace {

template <typename F>
double time_ms(F&& f, int repeats) {
  double best = 1e300;
  for (int i = 0; i < repeats; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    f();
    const auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const char* name, double serial, double parallel, bool same) {
  std::cout << name << "\tserial " << serial << " ms\tparallel " << parallel << " ms\tspeedup "
            << (parallel > 0 ? serial / parallel : 0) << "\t" << (same ? "identical" : "MISMATCH") << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  const std::size_t n = argc > 1 ? std::strtoul(argv[1], nullptr, 10) : 4000;
  const Converter converter(ConverterResources::load(SHEKASTE_DATA_DIR));

  std::vector<std::string> informal;
  std::vector<std::string> formal;
  std::ifstream fx(std::string(SHEKASTE_DATA_DIR) + "/fixtures/examples.tsv");
  std::string line;
  while (std::getline(fx, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto a = line.find('\t');
    const auto b = line.find('\t', a + 1);
    informal.push_back(line.substr(a + 1, b - a - 1));
    formal.push_back(line.substr(b + 1));
  }

  std::mt19937 rng(7);
  std::vector<std::string> lines(n);
  std::vector<std::string> refs(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto a = rng() % informal.size();
    const auto b = rng() % informal.size();
    lines[i] = informal[a] + " " + informal[b];
    refs[i] = formal[a] + " " + formal[b];
  }
  std::cout << "threads " << available_threads() << ", " << n << " sentences\n";
  bool all_same = true;

  std::vector<ConversionResult> rs;
  std::vector<ConversionResult> rp;
  const double cs = time_ms([&] { rs = convert_batch(converter, lines, {}, Execution::serial); }, 1);
  const double cp = time_ms([&] { rp = convert_batch(converter, lines, {}, Execution::parallel); }, 1);
  bool same = rs.size() == rp.size();
  for (std::size_t i = 0; same && i < rs.size(); ++i) same = rs[i].formal_text == rp[i].formal_text && rs[i].links == rp[i].links;
  report("convert_batch", cs, cp, same);
  all_same &= same;

  std::vector<std::vector<std::string>> hyp;
  std::vector<std::vector<std::string>> ref;
  std::vector<CorpusRecord> records;
  for (std::size_t i = 0; i < n; ++i) {
    hyp.push_back(rs[i].formal_tokens);
    ref.push_back(normalized_tokens(refs[i]));
    CorpusRecord r;
    r.id = "b" + std::to_string(i);
    r.informal = lines[i];
    r.formal = rs[i].formal_text;
    r.links = rs[i].links;
    r.source = kAllSources[i % std::size(kAllSources)];
    r.syntactic_change = rs[i].syntactic_change;
    records.push_back(std::move(r));
  }
  BleuStats bs;
  BleuStats bp;
  const double bts = time_ms([&] { bs = corpus_bleu_stats(hyp, ref, 4, Execution::serial); }, 5);
  const double btp = time_ms([&] { bp = corpus_bleu_stats(hyp, ref, 4, Execution::parallel); }, 5);
  report("bleu_stats", bts, btp, bs == bp);
  all_same &= bs == bp;

  CorpusStats ss;
  CorpusStats sp;
  const double sts = time_ms([&] { ss = corpus_stats(records, Execution::serial); }, 3);
  const double stp = time_ms([&] { sp = corpus_stats(records, Execution::parallel); }, 3);
  report("corpus_stats", sts, stp, ss == sp);
  all_same &= ss == sp;

  std::cout << "corpus BLEU " << format_percent(bleu_from_stats(bs, {})) << '\n';
  return all_same ? 0 : 1;
}
