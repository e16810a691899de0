#pragma once

// Shared helpers for the unit suites and the acceptance binary.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "shekaste/alignment.hpp"
#include "shekaste/converter.hpp"
#include "shekaste/corpus.hpp"
#include "shekaste/text.hpp"
#include "shekaste/vocabulary.hpp"

namespace shekaste::testing {

inline std::filesystem::path data_dir() { return SHEKASTE_DATA_DIR; }

struct Fixture {
  std::string id;
  std::string informal;
  std::string formal;
};

inline std::vector<Fixture> load_fixtures() {
  std::ifstream in(data_dir() / "fixtures" / "examples.tsv", std::ios::binary);
  if (!in) throw std::runtime_error("fixtures missing");
  std::vector<Fixture> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto f = split_fields(line, '\t');
    if (f.size() != 3) throw std::runtime_error("bad fixture row: " + line);
    out.push_back({f[0], f[1], f[2]});
  }
  return out;
}

inline const Converter& default_converter() {
  static const Converter converter(ConverterResources::load(data_dir()));
  return converter;
}

// Sentences of 1..8 tokens drawn from every token in the fixtures.
inline std::vector<std::string> random_sentences(std::uint64_t seed, std::size_t count) {
  std::set<std::string> pool;
  for (const auto& f : load_fixtures()) {
    for (auto& t : normalized_tokens(f.informal)) pool.insert(t);
    for (auto& t : normalized_tokens(f.formal)) pool.insert(t);
  }
  const std::vector<std::string> words(pool.begin(), pool.end());
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  for (std::size_t n = 0; n < count; ++n) {
    std::vector<std::string> toks;
    const auto len = 1 + rng() % 8;
    for (std::size_t k = 0; k < len; ++k) toks.push_back(words[rng() % words.size()]);
    out.push_back(detokenize(toks));
  }
  return out;
}

// Empty when every converter property holds for `sentence`, otherwise a
// description of the first failure.
inline std::string conversion_property_failure(const Converter& c, const std::string& sentence) {
  const auto r = c.convert(sentence);
  if (c.convert(r.formal_text).formal_text != r.formal_text) return "not a fixed point: " + sentence;
  const auto again = c.convert(sentence);
  if (again.formal_text != r.formal_text || again.links != r.links) return "nondeterministic: " + sentence;
  if (!check_links(r.links, r.informal_tokens.size(), r.formal_tokens.size()).empty()) {
    return "invalid links: " + sentence;
  }
  for (auto n : informal_cover(r.links, r.informal_tokens.size())) {
    if (n != 1) return "informal token not covered exactly once: " + sentence;
  }
  for (auto n : formal_cover(r.links, r.formal_tokens.size())) {
    if (n != 1) return "formal token not covered exactly once: " + sentence;
  }
  // Brute force: any empty span, or any pair of links out of order.
  bool expected = false;
  for (std::size_t i = 0; i < r.links.size(); ++i) {
    const auto& a = r.links[i];
    if (a.informal.empty() || a.formal.empty()) expected = true;
    for (std::size_t j = 0; j < r.links.size(); ++j) {
      const auto& b = r.links[j];
      if (a.informal.empty() || a.formal.empty() || b.informal.empty() || b.formal.empty()) continue;
      if (a.informal.begin < b.informal.begin && a.formal.begin > b.formal.begin) expected = true;
    }
  }
  if (expected != r.syntactic_change) return "syntactic_change flag mismatch: " + sentence;
  return {};
}

inline CorpusRecord make_record(std::string id, std::string informal, std::string formal,
                                std::vector<AlignmentLink> links, Source source = Source::web,
                                Status status = Status::draft) {
  CorpusRecord r;
  r.id = std::move(id);
  r.informal = std::move(informal);
  r.formal = std::move(formal);
  r.links = std::move(links);
  r.source = source;
  r.annotator = "tester";
  r.created_at = "2024-01-02T03:04:05+03:30";
  r.status = status;
  r.syntactic_change = syntactic_change_of(r.links);
  return r;
}

// One-to-one links over two sentences of equal length.
inline std::vector<AlignmentLink> diagonal(std::size_t n) {
  std::vector<AlignmentLink> out;
  for (std::size_t i = 0; i < n; ++i) out.push_back({{i, i + 1}, {i, i + 1}});
  return out;
}

// Records whose informal phrases each map to one formal phrase, with phrase
// links and shuffled formal order.
inline std::vector<CorpusRecord> unique_vocabulary_corpus(std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<CorpusRecord> out;
  for (std::size_t r = 0; r < count; ++r) {
    const std::size_t segments = 3 + rng() % 4;
    std::vector<std::vector<std::string>> inf(segments);
    std::vector<std::vector<std::string>> form(segments);
    for (std::size_t s = 0; s < segments; ++s) {
      const std::size_t a = 1 + rng() % 2;
      const std::size_t b = 1 + rng() % 3;
      for (std::size_t k = 0; k < a; ++k) inf[s].push_back("i" + std::to_string(r) + "_" + std::to_string(s) + "_" + std::to_string(k));
      for (std::size_t k = 0; k < b; ++k) form[s].push_back("f" + std::to_string(r) + "_" + std::to_string(s) + "_" + std::to_string(k));
    }
    std::vector<std::size_t> order(segments);
    for (std::size_t s = 0; s < segments; ++s) order[s] = s;
    if (rng() % 2) std::shuffle(order.begin(), order.end(), rng);

    std::vector<std::string> itoks;
    std::vector<std::string> ftoks;
    std::vector<Span> ispan(segments);
    std::vector<Span> fspan(segments);
    for (std::size_t s = 0; s < segments; ++s) {
      ispan[s] = {itoks.size(), itoks.size() + inf[s].size()};
      itoks.insert(itoks.end(), inf[s].begin(), inf[s].end());
    }
    for (std::size_t s : order) {
      fspan[s] = {ftoks.size(), ftoks.size() + form[s].size()};
      ftoks.insert(ftoks.end(), form[s].begin(), form[s].end());
    }
    std::vector<AlignmentLink> links;
    for (std::size_t s = 0; s < segments; ++s) links.push_back({ispan[s], fspan[s]});
    std::sort(links.begin(), links.end());
    out.push_back(make_record("u" + std::to_string(r), detokenize(itoks), detokenize(ftoks), links, Source::web,
                              Status::confirmed));
  }
  return out;
}


// Twenty-ish records over a small shared vocabulary: substitutions, identity
// links, phrase links both ways, insertions, deletions and a few five-token
// phrases that the dictionary must skip.
inline std::vector<CorpusRecord> toy_dictionary_corpus(std::uint64_t seed, std::size_t count = 20) {
  const std::vector<std::pair<std::string, std::string>> subs{
      {"خونه", "خانه"}, {"هندونه", "هندوانه"}, {"میگه", "می‌گوید"}, {"اینو", "این را"}, {"خونه", "منزل"}};
  const std::vector<std::string> same{"کتاب", "قلم", "آب"};
  std::mt19937_64 rng(seed);
  std::vector<CorpusRecord> out;
  for (std::size_t r = 0; r < count; ++r) {
    std::vector<std::string> inf;
    std::vector<std::string> form;
    std::vector<AlignmentLink> links;
    const std::size_t segments = 2 + rng() % 5;
    for (std::size_t s = 0; s < segments; ++s) {
      std::vector<std::string> a;
      std::vector<std::string> b;
      switch (rng() % 6) {
        case 0:
        case 1: {
          const auto& [i, f] = subs[rng() % subs.size()];
          a = split_tokens(i);
          b = split_tokens(f);
          break;
        }
        case 2: a = b = {same[rng() % same.size()]}; break;
        case 3: a = {"یه", "کم"}; b = {"کمی"}; break;
        case 4: (rng() % 2 ? a : b) = {rng() % 2 ? "و" : "را"}; break;
        default: a = {"ی۱", "ی۲", "ی۳", "ی۴", "ی۵"}; b = {"پنج"}; break;
      }
      links.push_back({{inf.size(), inf.size() + a.size()}, {form.size(), form.size() + b.size()}});
      inf.insert(inf.end(), a.begin(), a.end());
      form.insert(form.end(), b.begin(), b.end());
    }
    if (inf.empty() || form.empty()) {
      links.push_back({{inf.size(), inf.size() + 1}, {form.size(), form.size() + 1}});
      inf.push_back("آب");
      form.push_back("آب");
    }
    out.push_back(make_record("t" + std::to_string(r), detokenize(inf), detokenize(form), links));
  }
  return out;
}

struct DictionaryOracle {
  std::map<std::pair<std::string, std::string>, std::uint64_t> dictionary;
  std::set<std::pair<std::string, std::string>> unique_pairs;
};

// Enumerates every link by hand, with its own whitespace split.
inline DictionaryOracle dictionary_oracle(const std::vector<CorpusRecord>& records) {
  const auto words = [](const std::string& s) {
    std::vector<std::string> w;
    std::istringstream in(s);
    for (std::string t; in >> t;) w.push_back(t);
    return w;
  };
  DictionaryOracle o;
  for (const auto& r : records) {
    const auto inf = words(r.informal);
    const auto form = words(r.formal);
    for (const auto& l : r.links) {
      if (l.informal.begin == l.informal.end || l.formal.begin == l.formal.end) continue;
      std::string i;
      std::string f;
      for (auto k = l.informal.begin; k < l.informal.end; ++k) i += (i.empty() ? "" : " ") + inf[k];
      for (auto k = l.formal.begin; k < l.formal.end; ++k) f += (f.empty() ? "" : " ") + form[k];
      o.unique_pairs.emplace(i, f);
      if (i != f && l.informal.end - l.informal.begin <= 4) ++o.dictionary[{i, f}];
    }
  }
  return o;
}

}  // namespace shekaste::testing
