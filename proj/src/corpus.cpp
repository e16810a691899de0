#include "shekaste/corpus.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <regex>
#include <sstream>
#include <stdexcept>

#include "shekaste/text.hpp"

namespace shekaste {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr std::pair<Source, std::string_view> kSourceNames[] = {
    {Source::web, "web"},       {Source::twitter, "twitter"},     {Source::instagram, "instagram"},
    {Source::myself, "myself"}, {Source::movie, "movie"},         {Source::messenger, "messenger"},
    {Source::weblog, "weblog"}, {Source::book, "book"}};

constexpr std::pair<Status, std::string_view> kStatusNames[] = {
    {Status::draft, "draft"}, {Status::reviewed, "reviewed"}, {Status::confirmed, "confirmed"}};

Span span_from_json(const json& v, const char* side) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number_unsigned() || !v[1].is_number_unsigned()) {
    throw std::invalid_argument(std::string("link ") + side + " span must be [start, end] with non-negative integers");
  }
  Span s{v[0].get<std::size_t>(), v[1].get<std::size_t>()};
  if (s.begin > s.end) throw std::invalid_argument(std::string("link ") + side + " span has start > end");
  return s;
}

template <typename T>
const json& require(const json& obj, const char* key, T check, const char* what) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw std::invalid_argument(std::string("missing field '") + key + "'");
  if (!check(*it)) throw std::invalid_argument(std::string("field '") + key + "' must be " + what);
  return *it;
}

std::string issue_code(LinkProblem::Kind kind) {
  switch (kind) {
    case LinkProblem::Kind::both_empty: return "both-spans-empty";
    case LinkProblem::Kind::out_of_bounds: return "out-of-bounds";
    case LinkProblem::Kind::informal_overlap: return "informal-overlap";
    case LinkProblem::Kind::formal_overlap: return "formal-overlap";
  }
  return "link";
}

}  // namespace

std::string_view to_string(Source s) {
  for (const auto& [v, name] : kSourceNames) {
    if (v == s) return name;
  }
  return "web";
}

std::string_view to_string(Status s) {
  for (const auto& [v, name] : kStatusNames) {
    if (v == s) return name;
  }
  return "draft";
}

std::optional<Source> parse_source(std::string_view name) {
  for (const auto& [v, n] : kSourceNames) {
    if (n == name) return v;
  }
  return std::nullopt;
}

std::optional<Status> parse_status(std::string_view name) {
  for (const auto& [v, n] : kStatusNames) {
    if (n == name) return v;
  }
  return std::nullopt;
}

bool status_transition_allowed(Status from, Status to) {
  return from == to || (from == Status::draft && to == Status::reviewed) ||
         (from == Status::reviewed && to == Status::confirmed);
}

bool is_iso8601_with_offset(std::string_view text) {
  static const std::regex re(R"(\d{4}-(0[1-9]|1[0-2])-(0[1-9]|[12]\d|3[01])T([01]\d|2[0-3]):[0-5]\d:[0-5]\d(\.\d+)?(Z|[+-]([01]\d|2[0-3]):[0-5]\d))");
  return std::regex_match(text.begin(), text.end(), re);
}

std::string current_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S+00:00", &tm);
  return buf;
}

CorpusError::CorpusError(const std::string& source, std::size_t line, const std::string& message,
                         std::string record_id)
    : DataError(source, line, record_id.empty() ? message : "record '" + record_id + "': " + message),
      record_id_(std::move(record_id)) {}

ordered_json record_to_json(const CorpusRecord& r) {
  ordered_json links = ordered_json::array();
  for (const auto& l : r.links) {
    ordered_json link;
    link["informal"] = {l.informal.begin, l.informal.end};
    link["formal"] = {l.formal.begin, l.formal.end};
    links.push_back(std::move(link));
  }
  ordered_json out;
  out["id"] = r.id;
  out["informal"] = r.informal;
  out["formal"] = r.formal;
  out["links"] = std::move(links);
  out["source"] = std::string(to_string(r.source));
  out["annotator"] = r.annotator;
  out["created_at"] = r.created_at;
  out["status"] = std::string(to_string(r.status));
  out["syntactic_change"] = r.syntactic_change;
  return out;
}

CorpusRecord record_from_json(const json& v) {
  if (!v.is_object()) throw std::invalid_argument("record must be a JSON object");
  const auto is_string = [](const json& x) { return x.is_string(); };
  CorpusRecord r;
  r.id = require(v, "id", is_string, "a string").get<std::string>();
  r.informal = require(v, "informal", is_string, "a string").get<std::string>();
  r.formal = require(v, "formal", is_string, "a string").get<std::string>();
  const json& links = require(v, "links", [](const json& x) { return x.is_array(); }, "an array");
  for (const auto& l : links) {
    if (!l.is_object() || !l.contains("informal") || !l.contains("formal")) {
      throw std::invalid_argument("each link needs 'informal' and 'formal' spans");
    }
    r.links.push_back({span_from_json(l["informal"], "informal"), span_from_json(l["formal"], "formal")});
  }
  const std::string source = require(v, "source", is_string, "a string").get<std::string>();
  const auto src = parse_source(source);
  if (!src) throw std::invalid_argument("unknown source '" + source + "'");
  r.source = *src;
  r.annotator = require(v, "annotator", is_string, "a string").get<std::string>();
  r.created_at = require(v, "created_at", is_string, "a string").get<std::string>();
  const std::string status = require(v, "status", is_string, "a string").get<std::string>();
  const auto st = parse_status(status);
  if (!st) throw std::invalid_argument("unknown status '" + status + "'");
  r.status = *st;
  r.syntactic_change =
      require(v, "syntactic_change", [](const json& x) { return x.is_boolean(); }, "a boolean").get<bool>();
  return r;
}

std::string serialize_record(const CorpusRecord& record) { return record_to_json(record).dump(); }

CorpusReader::CorpusReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

std::optional<CorpusRecord> CorpusReader::next() {
  while (std::getline(in_, buffer_)) {
    ++line_;
    if (!buffer_.empty() && buffer_.back() == '\r') buffer_.pop_back();
    if (buffer_.find_first_not_of(" \t") == std::string::npos) continue;
    json value;
    try {
      value = json::parse(buffer_);
    } catch (const json::parse_error& e) {
      throw CorpusError(source_, line_, std::string("malformed JSON: ") + e.what());
    }
    try {
      return record_from_json(value);
    } catch (const std::exception& e) {
      std::string id;
      if (value.is_object() && value.contains("id") && value["id"].is_string()) id = value["id"].get<std::string>();
      throw CorpusError(source_, line_, e.what(), id);
    }
  }
  return std::nullopt;
}

void for_each_record(const std::filesystem::path& path, const std::function<void(const CorpusRecord&)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  CorpusReader reader(in, path.string());
  while (auto r = reader.next()) fn(*r);
}

std::vector<CorpusRecord> parse_corpus(std::istream& in, const std::string& source) {
  std::vector<CorpusRecord> out;
  CorpusReader reader(in, source);
  while (auto r = reader.next()) out.push_back(std::move(*r));
  return out;
}

std::vector<CorpusRecord> load_corpus(const std::filesystem::path& path) {
  std::vector<CorpusRecord> out;
  for_each_record(path, [&](const CorpusRecord& r) { out.push_back(r); });
  return out;
}

void write_corpus(std::span<const CorpusRecord> records, std::ostream& out) {
  for (const auto& r : records) out << serialize_record(r) << '\n';
}

void save_corpus(std::span<const CorpusRecord> records, const std::filesystem::path& path) {
  // Write then rename so readers never see a half-written file.
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    write_corpus(records, out);
    if (!out.flush()) throw std::runtime_error("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

ordered_json issue_to_json(const RecordIssue& issue) {
  ordered_json out;
  out["severity"] = issue.is_error() ? "error" : "warning";
  out["code"] = issue.code;
  out["message"] = issue.message;
  if (!issue.links.empty()) out["links"] = issue.links;
  if (issue.token) out["token"] = *issue.token;
  return out;
}

bool has_errors(std::span<const RecordIssue> issues) {
  return std::any_of(issues.begin(), issues.end(), [](const RecordIssue& i) { return i.is_error(); });
}

std::vector<RecordIssue> validate_record(const CorpusRecord& record, const CorpusRecord* previous) {
  using Sev = RecordIssue::Severity;
  std::vector<RecordIssue> issues;
  if (record.id.empty()) issues.push_back({Sev::error, "empty-id", "record id is empty", {}, {}});

  std::vector<std::string> inf;
  std::vector<std::string> form;
  try {
    inf = normalized_tokens(record.informal);
    form = normalized_tokens(record.formal);
  } catch (const DecodeError& e) {
    issues.push_back({Sev::error, "bad-encoding", e.what(), {}, {}});
    return issues;
  }
  if (inf.empty()) issues.push_back({Sev::error, "empty-informal", "informal sentence is empty", {}, {}});
  if (form.empty()) issues.push_back({Sev::error, "empty-formal", "formal sentence is empty", {}, {}});
  if (!is_iso8601_with_offset(record.created_at)) {
    issues.push_back({Sev::error, "bad-timestamp",
                      "created_at '" + record.created_at + "' is not ISO 8601 with a UTC offset", {}, {}});
  }
  if (previous && !status_transition_allowed(previous->status, record.status)) {
    issues.push_back({Sev::error, "illegal-transition",
                      "status cannot change from " + std::string(to_string(previous->status)) + " to " +
                          std::string(to_string(record.status)),
                      {}, {}});
  }

  const auto problems = check_links(record.links, inf.size(), form.size());
  for (const auto& p : problems) {
    RecordIssue issue{Sev::error, issue_code(p.kind), p.message, {p.first}, {}};
    if (p.kind == LinkProblem::Kind::informal_overlap || p.kind == LinkProblem::Kind::formal_overlap) {
      issue.links.push_back(p.second);
    }
    issues.push_back(std::move(issue));
  }
  const bool in_bounds = std::none_of(problems.begin(), problems.end(), [](const LinkProblem& p) {
    return p.kind == LinkProblem::Kind::out_of_bounds;
  });
  if (in_bounds) {
    const auto ic = informal_cover(record.links, inf.size());
    for (std::size_t i = 0; i < ic.size(); ++i) {
      if (ic[i] == 0) {
        issues.push_back({Sev::warning, "unlinked-informal-token",
                          "informal token " + std::to_string(i) + " ('" + inf[i] + "') is not linked", {}, i});
      }
    }
    const auto fc = formal_cover(record.links, form.size());
    for (std::size_t i = 0; i < fc.size(); ++i) {
      if (fc[i] == 0) {
        issues.push_back({Sev::warning, "unlinked-formal-token",
                          "formal token " + std::to_string(i) + " ('" + form[i] + "') is not linked", {}, i});
      }
    }
  }
  const bool computed = syntactic_change_of(record.links);
  if (computed != record.syntactic_change) {
    issues.push_back({Sev::warning, "syntactic-change-mismatch",
                      std::string("stored syntactic_change is ") + (record.syntactic_change ? "true" : "false") +
                          " but the links say " + (computed ? "true" : "false"),
                      {}, {}});
  }
  return issues;
}

std::size_t count_lexicon_hits(std::span<const std::string> tokens, const Lexicon& informal_lexicon) {
  return static_cast<std::size_t>(std::count_if(tokens.begin(), tokens.end(), [&](const std::string& t) {
    return informal_lexicon.contains_informal(t);
  }));
}

bool is_candidate(std::string_view sentence, const Lexicon& informal_lexicon) {
  const auto tokens = normalized_tokens(sentence);
  if (tokens.size() < kMinCandidateTokens || tokens.size() > kMaxCandidateTokens) return false;
  return count_lexicon_hits(tokens, informal_lexicon) >= kMinInformalHits;
}

std::vector<std::string> filter_candidates(std::span<const std::string> sentences, const Lexicon& informal_lexicon) {
  std::vector<std::string> out;
  for (const auto& s : sentences) {
    if (is_candidate(s, informal_lexicon)) out.push_back(s);
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> link_pairs(const CorpusRecord& record) {
  const auto inf = normalized_tokens(record.informal);
  const auto form = normalized_tokens(record.formal);
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& l : record.links) {
    if (l.informal.empty() || l.formal.empty() || l.informal.end > inf.size() || l.formal.end > form.size()) continue;
    out.emplace_back(span_text(inf, l.informal), span_text(form, l.formal));
  }
  return out;
}

DictionaryExtraction extract_dictionary(std::span<const CorpusRecord> records) {
  DictionaryExtraction out;
  std::set<std::pair<std::string, std::string>> unique;
  for (const auto& r : records) {
    const auto inf = normalized_tokens(r.informal);
    const auto form = normalized_tokens(r.formal);
    for (const auto& l : r.links) {
      if (l.informal.empty() || l.formal.empty() || l.informal.end > inf.size() || l.formal.end > form.size()) {
        continue;
      }
      std::string i = span_text(inf, l.informal);
      std::string f = span_text(form, l.formal);
      unique.emplace(i, f);
      if (i == f) continue;
      if (l.informal.size() > kMaxInformalPhraseTokens) {
        ++out.skipped_long_phrases;
        continue;
      }
      ContextSample ctx;
      if (l.informal.begin > 0) ctx.previous = inf[l.informal.begin - 1];
      if (l.informal.end < inf.size()) ctx.next = inf[l.informal.end];
      out.dictionary.observe(i, f, ctx);
    }
  }
  out.unique_word_pairs = unique.size();
  return out;
}

void StatsAccumulator::add(const CorpusRecord& record) {
  ++records_;
  formal_tokens_ += normalized_tokens(record.formal).size();
  informal_tokens_ += normalized_tokens(record.informal).size();
  links_ += record.links.size();
  if (record.syntactic_change) ++syntactic_;
  ++sources_[record.source];
  for (auto& p : link_pairs(record)) pairs_.insert(std::move(p));
}

void StatsAccumulator::merge(const StatsAccumulator& other) {
  records_ += other.records_;
  formal_tokens_ += other.formal_tokens_;
  informal_tokens_ += other.informal_tokens_;
  links_ += other.links_;
  syntactic_ += other.syntactic_;
  for (const auto& [s, n] : other.sources_) sources_[s] += n;
  pairs_.insert(other.pairs_.begin(), other.pairs_.end());
}

CorpusStats StatsAccumulator::result() const {
  CorpusStats s;
  s.record_count = records_;
  s.formal_tokens = formal_tokens_;
  s.informal_tokens = informal_tokens_;
  s.alignment_count = links_;
  s.syntactic_change_records = syntactic_;
  if (records_ > 0) {
    const double n = static_cast<double>(records_);
    s.avg_formal_length = static_cast<double>(formal_tokens_) / n;
    s.avg_informal_length = static_cast<double>(informal_tokens_) / n;
    s.pct_syntactic_change = 100.0 * static_cast<double>(syntactic_) / n;
  }
  s.unique_word_pairs = pairs_.size();
  s.dictionary_size = static_cast<std::size_t>(
      std::count_if(pairs_.begin(), pairs_.end(), [](const auto& p) { return p.first != p.second; }));
  for (Source src : kAllSources) s.source_distribution[src] = 0;
  for (const auto& [src, n] : sources_) s.source_distribution[src] = n;
  return s;
}

CorpusStats compute_stats(std::span<const CorpusRecord> records) {
  StatsAccumulator acc;
  for (const auto& r : records) acc.add(r);
  return acc.result();
}

ordered_json stats_to_json(const CorpusStats& s) {
  ordered_json out;
  out["record_count"] = s.record_count;
  out["avg_formal_length"] = s.avg_formal_length;
  out["avg_informal_length"] = s.avg_informal_length;
  out["alignment_count"] = s.alignment_count;
  out["unique_word_pairs"] = s.unique_word_pairs;
  out["pct_syntactic_change"] = s.pct_syntactic_change;
  out["dictionary_size"] = s.dictionary_size;
  ordered_json dist = ordered_json::object();
  for (Source src : kAllSources) {
    const auto it = s.source_distribution.find(src);
    dist[std::string(to_string(src))] = it == s.source_distribution.end() ? 0 : it->second;
  }
  out["source_distribution"] = std::move(dist);
  out["formal_tokens"] = s.formal_tokens;
  out["informal_tokens"] = s.informal_tokens;
  out["syntactic_change_records"] = s.syntactic_change_records;
  return out;
}

ordered_json source_distribution_json(const CorpusStats& s) {
  ordered_json rows = ordered_json::array();
  for (Source src : kAllSources) {
    const auto it = s.source_distribution.find(src);
    const std::size_t n = it == s.source_distribution.end() ? 0 : it->second;
    ordered_json row;
    row["source"] = std::string(to_string(src));
    row["count"] = n;
    row["percent"] = s.record_count == 0 ? 0.0 : 100.0 * static_cast<double>(n) / static_cast<double>(s.record_count);
    rows.push_back(std::move(row));
  }
  ordered_json out;
  out["total"] = s.record_count;
  out["sources"] = std::move(rows);
  return out;
}

}  // namespace shekaste
