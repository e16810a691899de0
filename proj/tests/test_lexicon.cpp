#include "doctest.h"

#include <sstream>

#include "shekaste/lexicon.hpp"
#include "shekaste/vocabulary.hpp"
#include "test_support.hpp"

using namespace shekaste;

namespace {

LexEntry entry(std::string inf, std::string form, std::uint64_t freq = 1) {
  LexEntry e;
  e.informal = std::move(inf);
  e.formal = std::move(form);
  e.frequency = freq;
  return e;
}

}  // namespace

TEST_CASE("shipped lexicon resolves common words") {
  const auto lex = load_lexicon(testing::data_dir() / "lexicon.tsv").lexicon;
  const auto hits = lex.lookup("هندونه");
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].formal == "هندوانه");
  CHECK(lex.lookup("زگهبار").empty());
}

TEST_CASE("lookup orders by frequency then formal phrase") {
  Lexicon lex;
  lex.add(entry("x", "b", 2));
  lex.add(entry("x", "a", 5));
  lex.add(entry("x", "c", 2));
  const auto hits = lex.lookup("x");
  REQUIRE(hits.size() == 3);
  CHECK(hits[0].formal == "a");
  CHECK(hits[1].formal == "b");
  CHECK(hits[2].formal == "c");
}

TEST_CASE("add rejects identity, zero frequency and long phrases") {
  Lexicon lex;
  CHECK_THROWS_AS(lex.add(entry("من", "من")), std::invalid_argument);
  CHECK_THROWS_AS(lex.add(entry("a", "b", 0)), std::invalid_argument);
  CHECK_THROWS_AS(lex.add(entry("a b c d e", "x")), std::invalid_argument);
  lex.add(entry("a b c d", "x"));
  CHECK(lex.max_informal_tokens() == 4);
}

TEST_CASE("merge sums shared pairs") {
  Lexicon a;
  Lexicon b;
  a.add(entry("x", "y", 2));
  b.add(entry("x", "y", 3));
  const auto m = merge(a, b);
  REQUIRE(m.find("x", "y") != nullptr);
  CHECK(m.find("x", "y")->frequency == 5);
}

TEST_CASE("merge with empty is identity and disjoint sizes add") {
  Lexicon a;
  for (int i = 0; i < 3; ++i) a.add(entry("a" + std::to_string(i), "x"));
  Lexicon b;
  for (int i = 0; i < 4; ++i) b.add(entry("b" + std::to_string(i), "y"));
  CHECK(merge(a, Lexicon{}) == a);
  CHECK(merge(a, b).size() == 7);
  CHECK(merge(a, b) == merge(b, a));
  Lexicon c;
  c.add(entry("a0", "x", 4));
  CHECK(merge(merge(a, b), c) == merge(a, merge(b, c)));
}

TEST_CASE("context samples are bounded") {
  Lexicon lex;
  for (std::size_t i = 0; i < 3 * kContextSampleBound; ++i) {
    lex.observe("x", "y", {"p" + std::to_string(i), "n"});
  }
  const auto* e = lex.find("x", "y");
  REQUIRE(e != nullptr);
  CHECK(e->frequency == 3 * kContextSampleBound);
  CHECK(e->contexts.size() == kContextSampleBound);
}

TEST_CASE("save then load round trips byte for byte") {
  std::istringstream in("آره\tبله\t3\tLEX\nخونه\tخانه\t7\t\nیه کم\tکمی\t1\t\n");
  const auto lex = parse_lexicon(in).lexicon;
  std::ostringstream out;
  write_lexicon(lex, out);
  std::istringstream again(out.str());
  const auto reloaded = parse_lexicon(again).lexicon;
  CHECK(reloaded == lex);
  std::ostringstream out2;
  write_lexicon(reloaded, out2);
  CHECK(out2.str() == out.str());
}

TEST_CASE("shipped lexicon file is canonical") {
  std::ifstream in(testing::data_dir() / "lexicon.tsv", std::ios::binary);
  std::stringstream raw;
  raw << in.rdbuf();
  std::istringstream parse_in(raw.str());
  std::ostringstream out;
  write_lexicon(parse_lexicon(parse_in).lexicon, out);
  std::istringstream back(out.str());
  CHECK(parse_lexicon(back).lexicon == load_lexicon(testing::data_dir() / "lexicon.tsv").lexicon);
}

TEST_CASE("duplicate rows sum with a warning") {
  std::istringstream in("خونه\tخانه\t2\t\nخونه\tخانه\t3\t\n");
  const auto load = parse_lexicon(in);
  CHECK(load.lexicon.size() == 1);
  CHECK(load.lexicon.find("خونه", "خانه")->frequency == 5);
  CHECK(load.warnings.size() == 1);
}

TEST_CASE("malformed lexicon line names the line") {
  std::istringstream in("خونه\tخانه\t2\t\nbroken line\n");
  try {
    parse_lexicon(in, "lex.tsv");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("empty lexicon file") {
  std::istringstream in("");
  CHECK(parse_lexicon(in).lexicon.empty());
}

TEST_CASE("equal lexicons answer lookups identically") {
  const auto a = load_lexicon(testing::data_dir() / "lexicon.tsv").lexicon;
  const auto b = load_lexicon(testing::data_dir() / "lexicon.tsv").lexicon;
  for (const auto* e : a.entries()) {
    const auto x = a.lookup(e->informal);
    const auto y = b.lookup(e->informal);
    REQUIRE(x.size() == y.size());
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(same_persisted(x[i], y[i]));
  }
}

TEST_CASE("ambiguity table loads with ordered candidates") {
  const auto table = AmbiguityTable::load(testing::data_dir() / "ambiguity.tsv");
  const auto* o = table.find("و");
  REQUIRE(o != nullptr);
  CHECK(o->candidates.size() >= 2);
  const auto sfx = table.suffixes();
  for (std::size_t i = 1; i < sfx.size(); ++i) {
    CHECK(codepoint_length(sfx[i - 1]) >= codepoint_length(sfx[i]));
  }
}

TEST_CASE("vocabulary and verb lexicon load") {
  const auto vocab = Vocabulary::load(testing::data_dir() / "vocabulary.tsv");
  CHECK(vocab.is_formal("هندوانه"));
  const auto verbs = VerbLexicon::load(testing::data_dir() / "verbs.tsv");
  const auto* v = verbs.find_informal("شکوند");
  REQUIRE(v != nullptr);
  CHECK(v->causative_of == std::optional<std::string>("شکست"));
}

TEST_CASE("word lists skip comments and blanks") {
  std::istringstream in("# comment\n\nبرو بابا\nبی خیال\n");
  const auto words = parse_word_list(in);
  REQUIRE(words.size() == 2);
  CHECK(words[0] == "برو بابا");
}
