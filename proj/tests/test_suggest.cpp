#include "doctest.h"

#include <algorithm>
#include <random>
#include <sstream>

#include "shekaste/suggest.hpp"
#include "test_support.hpp"

using namespace shekaste;
using testing::make_record;
using testing::unique_vocabulary_corpus;

namespace {

std::vector<AlignmentLink> links_of(const std::vector<Suggestion>& s) {
  std::vector<AlignmentLink> out;
  for (const auto& x : s) out.push_back(x.link);
  std::sort(out.begin(), out.end());
  return out;
}

void check_total(const std::vector<Suggestion>& s, std::size_t ni, std::size_t nf) {
  const auto links = links_of(s);
  CHECK(check_links(links, ni, nf).empty());
  for (auto n : informal_cover(links, ni)) CHECK(n == 1);
  for (auto n : formal_cover(links, nf)) CHECK(n == 1);
}

std::vector<std::string> toks(std::string_view s) { return split_tokens(s); }

AlignmentLink history_link(const std::vector<Suggestion>& s) {
  const auto it = std::find_if(s.begin(), s.end(), [](const auto& x) { return x.provenance == Provenance::history; });
  REQUIRE(it != s.end());
  return it->link;
}

}  // namespace

TEST_CASE("ingest counts pairs additively") {
  const auto r = make_record("r", "یه هندونه", "یک هندوانه", testing::diagonal(2));
  AlignmentHistory h;
  h.ingest(r);
  h.ingest(r);
  CHECK(h.count("هندونه", "هندوانه") == 2);
  CHECK(h.count("یه", "یک") == 2);
}

TEST_CASE("ingest of a record without links leaves counts alone") {
  AlignmentHistory h;
  h.ingest(make_record("r", "من", "من", {}));
  CHECK(h.empty());
}

TEST_CASE("shared pair from two records keeps two contexts") {
  AlignmentHistory h;
  h.ingest(make_record("a", "من هندونه", "من هندوانه", testing::diagonal(2)));
  h.ingest(make_record("b", "هندونه خوبه", "هندوانه خوبه", testing::diagonal(2)));
  CHECK(h.count("هندونه", "هندوانه") == 2);
  CHECK(h.context_overlap("هندونه", "هندوانه", "من", "") == 2);  // left once, right (edge) once
  CHECK(h.context_overlap("هندونه", "هندوانه", "x", "خوبه") == 1);
}

TEST_CASE("invalid record is rejected with its issues") {
  AlignmentHistory h;
  try {
    h.ingest(make_record("r", "من", "من", {{{0, 1}, {0, 4}}}));
    FAIL("expected InvalidRecordError");
  } catch (const InvalidRecordError& e) {
    CHECK(has_errors(e.issues()));
  }
  CHECK(h.empty());
}

TEST_CASE("frequency-based suggestion") {
  AlignmentHistory h;
  h.add("میخوام", "می‌خواهم", {"", ""}, 5);
  const auto inf = toks("من میخوام");
  const auto form = toks("من می‌خواهم");
  const auto s = suggest(inf, form, h);
  check_total(s, 2, 2);
  const auto it = std::find_if(s.begin(), s.end(), [](const auto& x) { return x.provenance == Provenance::history; });
  REQUIRE(it != s.end());
  CHECK(it->link == AlignmentLink{{1, 2}, {1, 2}});
  CHECK(it->score == 5);
}

TEST_CASE("empty history gives a pure diagonal") {
  const AlignmentHistory h;
  const auto s = suggest(toks("a b c"), toks("x y z"), h);
  CHECK(links_of(s) == testing::diagonal(3));
  for (const auto& x : s) {
    CHECK(x.provenance == Provenance::diagonal_fallback);
    CHECK(x.score == 0);
  }
}

TEST_CASE("diagonal fallback is total for unequal lengths") {
  const AlignmentHistory h;
  for (std::size_t a = 1; a <= 6; ++a) {
    for (std::size_t b = 1; b <= 6; ++b) {
      std::vector<std::string> i(a, "w");
      std::vector<std::string> f(b, "v");
      const auto s = suggest(i, f, h);
      check_total(s, a, b);
      std::vector<AlignmentLink> pairs;
      for (const auto& x : s) {
        if (!x.link.informal.empty() && !x.link.formal.empty()) pairs.push_back(x.link);
      }
      CHECK(pairs.size() == std::min(a, b));
      CHECK(links_monotonic(pairs));
    }
  }
}

TEST_CASE("context overlap breaks a frequency tie") {
  AlignmentHistory h;
  h.add("x", "A", {"p", "end"}, 3);
  h.add("x", "B", {"q", "end"}, 3);
  const auto s = suggest(toks("p x"), toks("B A"), h);
  const auto it = std::find_if(s.begin(), s.end(), [](const auto& x) { return x.provenance == Provenance::history; });
  REQUIRE(it != s.end());
  CHECK(it->link == AlignmentLink{{1, 2}, {1, 2}});
  CHECK(it->tie_break == 3);  // left match weighted by its count

  const auto t = suggest(toks("q x"), toks("B A"), h);
  const auto jt = std::find_if(t.begin(), t.end(), [](const auto& x) { return x.provenance == Provenance::history; });
  REQUIRE(jt != t.end());
  CHECK(jt->link == AlignmentLink{{1, 2}, {0, 1}});
}

TEST_CASE("full tie goes to the earliest formal position, then formal phrase") {
  AlignmentHistory h;
  h.add("x", "A", {"", ""}, 2);
  const auto s = suggest(toks("x"), toks("A A"), h);
  CHECK(history_link(s) == AlignmentLink{{0, 1}, {0, 1}});

  AlignmentHistory g;
  g.add("x", "B", {"", ""}, 2);
  g.add("x", "A", {"", ""}, 2);
  const auto t = suggest(toks("x"), toks("A B"), g);
  CHECK(history_link(t) == AlignmentLink{{0, 1}, {0, 1}});
  AlignmentHistory k;
  k.add("x", "A B", {"", ""}, 2);
  k.add("x", "A", {"", ""}, 2);
  CHECK(history_link(suggest(toks("x"), toks("A B"), k)) == AlignmentLink{{0, 1}, {0, 1}});
  // same answer on repeat
  CHECK(suggest(toks("x"), toks("A B"), g) == t);
}

TEST_CASE("longer informal phrases are matched first") {
  AlignmentHistory h;
  h.add("یه کم", "کمی", {"", ""}, 1);
  h.add("یه", "یک", {"", ""}, 10);
  const auto s = suggest(toks("یه کم آب"), toks("کمی آب"), h);
  CHECK(s.front().link == AlignmentLink{{0, 2}, {0, 1}});
  CHECK(s.front().provenance == Provenance::history);
}

TEST_CASE("self-consistency on a unique-vocabulary corpus") {
  const auto corpus = unique_vocabulary_corpus(50, 3);
  AlignmentHistory h;
  for (const auto& r : corpus) h.ingest(r);
  std::size_t reproduced = 0;
  std::size_t total = 0;
  for (const auto& r : corpus) {
    const auto inf = normalized_tokens(r.informal);
    const auto form = normalized_tokens(r.formal);
    const auto got = links_of(suggest(inf, form, h));
    auto want = r.links;
    std::sort(want.begin(), want.end());
    total += want.size();
    for (const auto& l : want) reproduced += std::count(got.begin(), got.end(), l);
    CHECK(got == want);
  }
  CHECK(reproduced == total);
}

TEST_CASE("suggestions are always total") {
  const auto corpus = unique_vocabulary_corpus(20, 9);
  AlignmentHistory h;
  for (const auto& r : corpus) h.ingest(r);
  std::mt19937_64 rng(5);
  for (int n = 0; n < 200; ++n) {
    const auto& a = corpus[rng() % corpus.size()];
    const auto& b = corpus[rng() % corpus.size()];
    auto inf = normalized_tokens(a.informal);
    auto form = normalized_tokens(b.formal);
    form.resize(1 + rng() % form.size());
    check_total(suggest(inf, form, h), inf.size(), form.size());
  }
}

TEST_CASE("snapshot round trip and versioned header") {
  const auto corpus = unique_vocabulary_corpus(10, 1);
  AlignmentHistory h;
  for (const auto& r : corpus) h.ingest(r);
  std::stringstream buf;
  h.write(buf);
  CHECK(buf.str().rfind(std::string(AlignmentHistory::kSnapshotHeader), 0) == 0);
  CHECK(AlignmentHistory::read(buf) == h);

  std::istringstream no_header("P\ta\tb\t1\n");
  CHECK_THROWS_AS(AlignmentHistory::read(no_header), DataError);
  std::istringstream bad_count(std::string(AlignmentHistory::kSnapshotHeader) + "\nP\ta\tb\tzero\n");
  try {
    AlignmentHistory::read(bad_count);
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
  std::istringstream orphan(std::string(AlignmentHistory::kSnapshotHeader) + "\nC\ta\tb\tl\tr\t1\n");
  CHECK_THROWS_AS(AlignmentHistory::read(orphan), DataError);

  const auto path = std::filesystem::temp_directory_path() / "shekaste-history.snap";
  h.save(path);
  CHECK(AlignmentHistory::load(path) == h);
  std::filesystem::remove(path);
}

TEST_CASE("rebuild uses reviewed and confirmed records only") {
  auto corpus = unique_vocabulary_corpus(6, 4);
  corpus[0].status = Status::draft;
  corpus[1].status = Status::reviewed;
  AlignmentHistory expected;
  for (const auto& r : corpus) {
    if (r.status != Status::draft) expected.ingest(r);
  }
  CHECK(rebuild_history(corpus) == expected);
  const auto first = normalized_tokens(corpus[0].informal);
  CHECK(expected.formal_for(first[0]).empty());
}

TEST_CASE("history converts to a lexicon of non-identity pairs") {
  AlignmentHistory h;
  h.add("من", "من", {"", ""});
  h.add("هندونه", "هندوانه", {"", ""}, 2);
  const auto lex = h.to_lexicon();
  CHECK(lex.size() == 1);
  CHECK(lex.find("هندونه", "هندوانه")->frequency == 2);
}

TEST_CASE("provenance names") {
  CHECK(to_string(Provenance::history) == "history");
  CHECK(to_string(Provenance::diagonal_fallback) == "diagonal-fallback");
}
