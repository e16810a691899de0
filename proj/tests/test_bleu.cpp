#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "shekaste/bleu.hpp"
#include "shekaste/text.hpp"

using namespace shekaste;

namespace {

std::vector<std::string> T(std::string_view s) { return split_tokens(s); }

double bleu1(std::string_view c, std::string_view r, const BleuConfig& cfg = {}) {
  const std::vector<std::vector<std::string>> refs{T(r)};
  return bleu(T(c), refs, cfg);
}

// Independent recomputation straight from the definition.
double oracle(const std::vector<std::pair<std::string, std::string>>& pairs) {
  double c = 0;
  double r = 0;
  double m[4] = {0, 0, 0, 0};
  double t[4] = {0, 0, 0, 0};
  for (const auto& [hyp, ref] : pairs) {
    const auto h = T(hyp);
    const auto g = T(ref);
    c += static_cast<double>(h.size());
    r += static_cast<double>(g.size());
    for (int n = 1; n <= 4; ++n) {
      std::map<std::string, int> hc;
      std::map<std::string, int> gc;
      for (std::size_t i = 0; i + n <= h.size(); ++i) {
        std::string k;
        for (int j = 0; j < n; ++j) k += h[i + j] + "\x1f";
        ++hc[k];
      }
      for (std::size_t i = 0; i + n <= g.size(); ++i) {
        std::string k;
        for (int j = 0; j < n; ++j) k += g[i + j] + "\x1f";
        ++gc[k];
      }
      for (const auto& [k, v] : hc) {
        t[n - 1] += v;
        m[n - 1] += std::min(v, gc.count(k) ? gc[k] : 0);
      }
    }
  }
  double logp = 0;
  for (int n = 0; n < 4; ++n) {
    double p = t[n] == 0 ? 1.0 : (m[n] == 0 && n > 0 ? 1.0 / (t[n] + 1) : m[n] / t[n]);
    if (p == 0) return 0;
    logp += 0.25 * std::log(p);
  }
  const double bp = c >= r ? 1.0 : std::exp(1 - r / c);
  return bp * std::exp(logp);
}

}  // namespace

TEST_CASE("identity scores one") {
  CHECK(std::abs(bleu1("a b c d e", "a b c d e") - 1.0) < 1e-12);
  CHECK(std::abs(bleu1("a b c d", "a b c d") - 1.0) < 1e-12);
}

TEST_CASE("brevity penalty only") {
  CHECK(std::abs(bleu1("a b c d", "a b c d e") - std::exp(-0.25)) < 1e-6);
}

TEST_CASE("no shared unigram scores zero") {
  CHECK(bleu1("a b c d", "e f g h") == 0.0);
}

TEST_CASE("smoothing applies to higher orders with zero matches") {
  // unigrams all match, no bigram matches: p2..p4 smoothed
  const double got = bleu1("a b c d", "d c b a");
  const double want = std::exp(0.25 * (std::log(1.0) + std::log(1.0 / 4) + std::log(1.0 / 3) + std::log(1.0 / 2)));
  CHECK(got == doctest::Approx(want).epsilon(1e-12));
  BleuConfig raw;
  raw.smoothing = false;
  CHECK(bleu1("a b c d", "d c b a", raw) == 0.0);
}

TEST_CASE("clipping limits repeated candidate n-grams") {
  BleuConfig uni;
  uni.max_order = 1;
  CHECK(bleu1("the the the the", "the cat", uni) == doctest::Approx(0.25));
}

TEST_CASE("closest reference length is used") {
  const std::vector<std::vector<std::string>> refs{T("a b c d e f g h"), T("a b c d x")};
  const auto s = sentence_stats(T("a b c d"), refs);
  CHECK(s.reference_length == 5);
}

TEST_CASE("empty candidate scores zero with a warning") {
  const std::vector<std::vector<std::string>> refs{T("a b")};
  std::vector<std::string> warnings;
  CHECK(bleu({}, refs, {}, &warnings) == 0.0);
  CHECK(warnings.size() == 1);
  CHECK_THROWS_AS(bleu(T("a"), std::vector<std::vector<std::string>>{}), std::invalid_argument);
}

TEST_CASE("config validation") {
  BleuConfig c;
  c.max_order = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.weights = {0.5, 0.5};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.weights = {0.4, 0.4, 0.1, 0.05};
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c.weights = {0.25, 0.25, 0.25, 0.25};
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("scores stay in the unit interval") {
  std::mt19937 rng(3);
  const char* words[] = {"a", "b", "c", "d", "e"};
  for (int n = 0; n < 500; ++n) {
    std::vector<std::string> c;
    std::vector<std::string> r;
    for (int k = 0, len = 1 + static_cast<int>(rng() % 8); k < len; ++k) c.push_back(words[rng() % 5]);
    for (int k = 0, len = 1 + static_cast<int>(rng() % 8); k < len; ++k) r.push_back(words[rng() % 5]);
    const std::vector<std::vector<std::string>> refs{r};
    const double b = bleu(c, refs);
    CHECK(b >= 0.0);
    CHECK(b <= 1.0);
  }
}

TEST_CASE("corpus of equal pairs scores one") {
  const std::vector<std::vector<std::string>> out{T("a b c d"), T("e f g h i")};
  CHECK(evaluate_corpus(out, out).corpus_bleu == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("three-pair corpus equals the hand aggregation") {
  const std::vector<std::pair<std::string, std::string>> pairs{
      {"the cat sat on the mat", "the cat sat on a mat"},
      {"a quick brown fox", "the quick brown fox jumps"},
      {"hello there world", "hello world"},
  };
  std::vector<std::vector<std::string>> h;
  std::vector<std::vector<std::string>> r;
  for (const auto& [a, b] : pairs) {
    h.push_back(T(a));
    r.push_back(T(b));
  }
  CHECK(evaluate_corpus(h, r).corpus_bleu == doctest::Approx(oracle(pairs)).epsilon(1e-12));
}

TEST_CASE("corpus bleu is permutation invariant bit for bit") {
  std::vector<std::vector<std::string>> h{T("a b c d"), T("x y z w v"), T("a c b d e f"), T("q r s")};
  std::vector<std::vector<std::string>> r{T("a b c e"), T("x y z w"), T("a b c d e f"), T("q r s t")};
  const double base = evaluate_corpus(h, r).corpus_bleu;
  std::vector<std::size_t> idx{0, 1, 2, 3};
  while (std::next_permutation(idx.begin(), idx.end())) {
    std::vector<std::vector<std::string>> hp;
    std::vector<std::vector<std::string>> rp;
    for (auto i : idx) {
      hp.push_back(h[i]);
      rp.push_back(r[i]);
    }
    CHECK(evaluate_corpus(hp, rp).corpus_bleu == base);
  }
}

TEST_CASE("length filter drops out-of-range references") {
  std::vector<std::vector<std::string>> h;
  std::vector<std::vector<std::string>> r;
  for (std::size_t len : {10u, 14u, 15u, 20u, 25u, 26u}) {
    std::vector<std::string> s;
    for (std::size_t i = 0; i < len; ++i) s.push_back("w" + std::to_string(i));
    h.push_back(s);
    r.push_back(s);
  }
  h[0][0] = "wrong";
  BleuConfig cfg;
  cfg.length_filter = LengthRange{15, 25};
  const auto rep = evaluate_corpus(h, r, cfg);
  CHECK(rep.total_pairs == 6);
  CHECK(rep.filtered_out == 3);
  CHECK(rep.scored_pairs == 3);
  CHECK(rep.corpus_bleu == doctest::Approx(1.0).epsilon(1e-12));
  for (const auto& s : rep.sentences) CHECK((s.reference_length >= 15 && s.reference_length <= 25));
}

TEST_CASE("mismatched list lengths are an error") {
  const std::vector<std::vector<std::string>> h{T("a")};
  const std::vector<std::vector<std::string>> r{T("a"), T("b")};
  CHECK_THROWS_AS(evaluate_corpus(h, r), std::invalid_argument);
}

TEST_CASE("stats add up") {
  BleuStats a(4);
  const std::vector<std::vector<std::string>> refs{T("a b c")};
  a += sentence_stats(T("a b c"), refs);
  a += sentence_stats(T("a b c"), refs);
  CHECK(a.candidate_length == 6);
  CHECK(a.matches[0] == 6);
  CHECK(a.totals[2] == 2);
  BleuStats other(2);
  CHECK_THROWS_AS(a += other, std::invalid_argument);
}

TEST_CASE("percent formatting and reports") {
  CHECK(format_percent(0.8169) == "81.6900%");
  CHECK(format_percent(1.0) == "100.0000%");
  const std::vector<std::string> hyp{"یک هندوانه بردار"};
  const std::vector<std::string> ref{"یک هندوانه بردار"};
  const auto rep = evaluate_lines(hyp, ref);
  const auto j = report_to_json(rep);
  CHECK(j["corpus_bleu_percent"] == "100.0000%");
  CHECK(j["sentences"].size() == 1);
  CHECK(report_to_text(rep).rfind("BLEU 100.0000%", 0) == 0);
}
