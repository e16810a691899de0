#include "shekaste/vocabulary.hpp"

#include <fstream>

namespace shekaste {

DataError::DataError(const std::string& source, std::size_t line, const std::string& message)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + message), line_(line) {}

std::vector<std::string> split_fields(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_ws(s[b])) ++b;
  while (e > b && is_ws(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

namespace {

bool skip_line(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return in;
}

}  // namespace

void Vocabulary::add(const std::string& word, const std::vector<std::string>& tags) {
  auto& set = words_[word];
  for (const auto& t : tags) {
    if (!t.empty()) set.insert(t);
  }
}

bool Vocabulary::contains(std::string_view word) const {
  return words_.find(word) != words_.end();
}

bool Vocabulary::has_tag(std::string_view word, std::string_view tag) const {
  const auto it = words_.find(word);
  if (it == words_.end()) return false;
  return it->second.find(std::string(tag)) != it->second.end();
}

bool Vocabulary::is_formal(std::string_view word) const {
  const auto it = words_.find(word);
  if (it == words_.end()) return false;
  for (const auto& t : it->second) {
    if (t != kLexiconTag) return true;
  }
  return it->second.empty();
}

const std::set<std::string>* Vocabulary::tags(std::string_view word) const {
  const auto it = words_.find(word);
  return it == words_.end() ? nullptr : &it->second;
}

Vocabulary Vocabulary::parse(std::istream& in, const std::string& source) {
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto fields = split_fields(line, '\t');
    const std::string word = trim(fields[0]);
    if (word.empty()) throw DataError(source, line_no, "empty word");
    std::vector<std::string> tags;
    if (fields.size() > 1) {
      for (const auto& t : split_fields(fields[1], ',')) tags.push_back(trim(t));
    }
    vocab.add(word, tags);
  }
  return vocab;
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in, path.string());
}

void VerbLexicon::add(VerbLexEntry entry) {
  const std::size_t idx = entries_.size();
  by_formal_.try_emplace(entry.formal, idx);
  if (!entry.informal.empty()) by_informal_.try_emplace(entry.informal, idx);
  entries_.push_back(std::move(entry));
}

const VerbLexEntry* VerbLexicon::find_formal(std::string_view formal) const {
  const auto it = by_formal_.find(formal);
  return it == by_formal_.end() ? nullptr : &entries_[it->second];
}

const VerbLexEntry* VerbLexicon::find_informal(std::string_view informal) const {
  const auto it = by_informal_.find(informal);
  return it == by_informal_.end() ? nullptr : &entries_[it->second];
}

VerbLexicon VerbLexicon::parse(std::istream& in, const std::string& source) {
  VerbLexicon verbs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    const auto fields = split_fields(line, '\t');
    if (fields.size() < 2) throw DataError(source, line_no, "expected informal<TAB>formal[<TAB>features]");
    VerbLexEntry e;
    e.informal = trim(fields[0]);
    if (e.informal == "-") e.informal.clear();
    e.formal = trim(fields[1]);
    if (e.formal.empty()) throw DataError(source, line_no, "empty formal surface");
    if (fields.size() > 2) {
      for (const auto& raw : split_fields(fields[2], ',')) {
        const std::string f = trim(raw);
        if (f.empty() || f == "verb") continue;
        if (f == "dest") e.takes_destination = true;
        else if (f == "participle") e.perfect_participle = true;
        else if (f == "subj") e.subjunctive = true;
        else if (f == "imp") e.imperative = true;
        else if (f == "pres") e.present_indicative = true;
        else if (f == "past") {}
        else if (f == "intr") e.intransitive = true;
        else if (f.starts_with("person=")) e.person = f.substr(7);
        else if (f.starts_with("causative-of=")) e.causative_of = f.substr(13);
        else throw DataError(source, line_no, "unknown verb feature '" + f + "'");
      }
    }
    verbs.add(std::move(e));
  }
  return verbs;
}

VerbLexicon VerbLexicon::load(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse(in, path.string());
}

std::vector<std::string> parse_word_list(std::istream& in) {
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    if (skip_line(line)) continue;
    out.push_back(trim(line));
  }
  return out;
}

std::vector<std::string> load_word_list(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  return parse_word_list(in);
}

}  // namespace shekaste
