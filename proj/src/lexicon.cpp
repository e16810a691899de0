#include "shekaste/lexicon.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <stdexcept>

#include "shekaste/text.hpp"
#include "shekaste/vocabulary.hpp"

namespace shekaste {

namespace {

std::uint64_t fnv1a(std::string_view a, std::string_view b, std::uint64_t salt) {
  std::uint64_t h = 1469598103934665603ULL ^ salt;
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xFF;
    h *= 1099511628211ULL;
  };
  mix(a);
  mix(b);
  return h;
}

void append_contexts(LexEntry& into, const std::vector<ContextSample>& extra) {
  for (const auto& c : extra) {
    if (into.contexts.size() >= kContextSampleBound) break;
    into.contexts.push_back(c);
  }
}

}  // namespace

bool same_persisted(const LexEntry& a, const LexEntry& b) {
  return a.informal == b.informal && a.formal == b.formal && a.frequency == b.frequency &&
         a.category == b.category;
}

void Lexicon::add(LexEntry entry) {
  if (entry.informal == entry.formal) {
    throw std::invalid_argument("identity pair '" + entry.informal + "' cannot be a dictionary entry");
  }
  if (entry.frequency == 0) throw std::invalid_argument("frequency must be >= 1");
  const std::size_t n_tokens = split_tokens(entry.informal).size();
  if (n_tokens == 0 || n_tokens > kMaxInformalPhraseTokens) {
    throw std::invalid_argument("informal phrase must have 1.." +
                                std::to_string(kMaxInformalPhraseTokens) + " tokens");
  }
  if (split_tokens(entry.formal).empty()) throw std::invalid_argument("empty formal phrase");
  max_informal_tokens_ = std::max(max_informal_tokens_, n_tokens);

  auto& by_formal = entries_[entry.informal];
  const auto it = by_formal.find(entry.formal);
  if (it == by_formal.end()) {
    if (entry.contexts.size() > kContextSampleBound) entry.contexts.resize(kContextSampleBound);
    std::string key = entry.formal;
    by_formal.emplace(std::move(key), std::move(entry));
    return;
  }
  LexEntry& existing = it->second;
  existing.frequency += entry.frequency;
  append_contexts(existing, entry.contexts);
  if (existing.category.empty() || (!entry.category.empty() && entry.category < existing.category)) {
    existing.category = entry.category;
  }
}

void Lexicon::observe(const std::string& informal, const std::string& formal,
                      const ContextSample& context, const std::string& category) {
  const LexEntry* current = find(informal, formal);
  if (current == nullptr) {
    add({informal, formal, 1, {context}, category});
    return;
  }
  LexEntry& e = entries_.find(informal)->second.find(formal)->second;
  e.frequency += 1;
  if (e.contexts.size() < kContextSampleBound) {
    e.contexts.push_back(context);
    return;
  }
  // Reservoir step with a generator seeded from the pair and the count, so
  // identical observation sequences keep identical samples.
  std::mt19937_64 rng(fnv1a(informal, formal, e.frequency));
  const std::uint64_t j = rng() % e.frequency;
  if (j < kContextSampleBound) e.contexts[j] = context;
}

std::vector<LexEntry> Lexicon::lookup(std::string_view informal) const {
  std::vector<LexEntry> out;
  const auto it = entries_.find(informal);
  if (it == entries_.end()) return out;
  for (const auto& [formal, entry] : it->second) out.push_back(entry);
  std::stable_sort(out.begin(), out.end(), [](const LexEntry& a, const LexEntry& b) {
    if (a.frequency != b.frequency) return a.frequency > b.frequency;
    return a.formal < b.formal;
  });
  return out;
}

const LexEntry* Lexicon::find(std::string_view informal, std::string_view formal) const {
  const auto it = entries_.find(informal);
  if (it == entries_.end()) return nullptr;
  const auto jt = it->second.find(formal);
  return jt == it->second.end() ? nullptr : &jt->second;
}

bool Lexicon::contains_informal(std::string_view informal) const {
  return entries_.find(informal) != entries_.end();
}

std::size_t Lexicon::size() const {
  std::size_t n = 0;
  for (const auto& [k, v] : entries_) n += v.size();
  return n;
}

std::vector<const LexEntry*> Lexicon::entries() const {
  std::vector<const LexEntry*> out;
  for (const auto& [k, v] : entries_) {
    for (const auto& [f, e] : v) out.push_back(&e);
  }
  return out;
}

bool Lexicon::operator==(const Lexicon& other) const {
  const auto a = entries();
  const auto b = other.entries();
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!same_persisted(*a[i], *b[i])) return false;
  }
  return true;
}

Lexicon merge(const Lexicon& a, const Lexicon& b) {
  Lexicon out = a;
  for (const LexEntry* e : b.entries()) out.add(*e);
  return out;
}

LexiconLoad parse_lexicon(std::istream& in, const std::string& source) {
  LexiconLoad result;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() < 3 || fields.size() > 4) {
      throw DataError(source, line_no, "expected 3 or 4 tab-separated columns, got " +
                                           std::to_string(fields.size()));
    }
    LexEntry e;
    e.informal = fields[0];
    e.formal = fields[1];
    if (fields.size() == 4) e.category = fields[3];
    const std::string& freq = fields[2];
    if (freq.empty() || !std::all_of(freq.begin(), freq.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      throw DataError(source, line_no, "frequency '" + freq + "' is not a non-negative integer");
    }
    try {
      e.frequency = std::stoull(freq);
    } catch (const std::exception&) {
      throw DataError(source, line_no, "frequency out of range");
    }
    if (result.lexicon.find(e.informal, e.formal) != nullptr) {
      result.warnings.push_back(source + ":" + std::to_string(line_no) + ": duplicate pair '" +
                                e.informal + "' -> '" + e.formal + "', frequencies summed");
    }
    try {
      result.lexicon.add(std::move(e));
    } catch (const std::invalid_argument& err) {
      throw DataError(source, line_no, err.what());
    }
  }
  return result;
}

LexiconLoad load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse_lexicon(in, path.string());
}

void write_lexicon(const Lexicon& lexicon, std::ostream& out) {
  for (const LexEntry* e : lexicon.entries()) {
    out << e->informal << '\t' << e->formal << '\t' << e->frequency << '\t' << e->category << '\n';
  }
}

void save_lexicon(const Lexicon& lexicon, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_lexicon(lexicon, out);
}

void AmbiguityTable::add(const std::string& suffix, AmbiguityCandidate candidate) {
  auto& entry = entries_[suffix];
  entry.suffix_surface = suffix;
  entry.candidates.push_back(std::move(candidate));
}

const AmbiguityEntry* AmbiguityTable::find(std::string_view suffix) const {
  const auto it = entries_.find(suffix);
  return it == entries_.end() ? nullptr : &it->second;
}

std::vector<std::string> AmbiguityTable::suffixes() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : entries_) out.push_back(k);
  std::stable_sort(out.begin(), out.end(),
                   [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
  return out;
}

AmbiguityTable AmbiguityTable::parse(std::istream& in, const std::string& source) {
  AmbiguityTable table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() != 5) throw DataError(source, line_no, "expected 5 tab-separated columns");
    AmbiguityCandidate c{trim(fields[1]), trim(fields[2]), trim(fields[3]), trim(fields[4])};
    if (c.expansion.find("{stem}") == std::string::npos) {
      throw DataError(source, line_no, "expansion must reference {stem}");
    }
    table.add(trim(fields[0]), std::move(c));
  }
  return table;
}

AmbiguityTable AmbiguityTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return parse(in, path.string());
}

}  // namespace shekaste
