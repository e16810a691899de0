#include "shekaste/suggest.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>

#include "shekaste/text.hpp"
#include "shekaste/vocabulary.hpp"

namespace shekaste {

namespace {

std::string join_issues(const std::vector<RecordIssue>& issues) {
  std::string out = "record rejected:";
  for (const auto& i : issues) {
    if (i.is_error()) out += " " + i.message + ";";
  }
  return out;
}

std::uint64_t parse_count(const std::string& field, const std::string& source, std::size_t line) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc() || ptr != field.data() + field.size() || v == 0) {
    throw DataError(source, line, "count '" + field + "' must be a positive integer");
  }
  return v;
}

}  // namespace

InvalidRecordError::InvalidRecordError(std::vector<RecordIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

void AlignmentHistory::add(const std::string& informal, const std::string& formal, const Context& context,
                           std::uint64_t count) {
  if (count == 0) return;
  pairs_[informal][formal] += count;
  contexts_[{informal, formal}][context] += count;
}

void AlignmentHistory::ingest(const CorpusRecord& record) {
  auto issues = validate_record(record);
  if (has_errors(issues)) throw InvalidRecordError(std::move(issues));
  const auto inf = normalized_tokens(record.informal);
  const auto form = normalized_tokens(record.formal);
  for (const auto& l : record.links) {
    if (l.informal.empty() || l.formal.empty()) continue;
    Context ctx;
    if (l.informal.begin > 0) ctx.first = inf[l.informal.begin - 1];
    if (l.informal.end < inf.size()) ctx.second = inf[l.informal.end];
    add(span_text(inf, l.informal), span_text(form, l.formal), ctx);
  }
}

std::uint64_t AlignmentHistory::count(std::string_view informal, std::string_view formal) const {
  const auto it = pairs_.find(informal);
  if (it == pairs_.end()) return 0;
  const auto jt = it->second.find(formal);
  return jt == it->second.end() ? 0 : jt->second;
}

std::vector<std::pair<std::string, std::uint64_t>> AlignmentHistory::formal_for(std::string_view informal) const {
  std::vector<std::pair<std::string, std::uint64_t>> out;
  const auto it = pairs_.find(informal);
  if (it == pairs_.end()) return out;
  for (const auto& [f, n] : it->second) out.emplace_back(f, n);
  return out;
}

std::uint64_t AlignmentHistory::context_overlap(std::string_view informal, std::string_view formal,
                                                std::string_view left, std::string_view right) const {
  const auto it = contexts_.find(Pair{std::string(informal), std::string(formal)});
  if (it == contexts_.end()) return 0;
  std::uint64_t score = 0;
  for (const auto& [ctx, n] : it->second) {
    if (ctx.first == left) score += n;
    if (ctx.second == right) score += n;
  }
  return score;
}

Lexicon AlignmentHistory::to_lexicon() const {
  Lexicon lex;
  for (const auto& [inf, formals] : pairs_) {
    if (split_tokens(inf).size() > kMaxInformalPhraseTokens) continue;
    for (const auto& [f, n] : formals) {
      if (inf == f) continue;
      LexEntry e;
      e.informal = inf;
      e.formal = f;
      e.frequency = n;
      lex.add(std::move(e));
    }
  }
  return lex;
}

void AlignmentHistory::write(std::ostream& out) const {
  out << kSnapshotHeader << '\n';
  for (const auto& [inf, formals] : pairs_) {
    for (const auto& [f, n] : formals) out << "P\t" << inf << '\t' << f << '\t' << n << '\n';
  }
  for (const auto& [pair, ctxs] : contexts_) {
    for (const auto& [ctx, n] : ctxs) {
      out << "C\t" << pair.first << '\t' << pair.second << '\t' << ctx.first << '\t' << ctx.second << '\t' << n
          << '\n';
    }
  }
}

AlignmentHistory AlignmentHistory::read(std::istream& in, const std::string& source) {
  AlignmentHistory h;
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line) || line != kSnapshotHeader) {
    throw DataError(source, 1, "missing header '" + std::string(kSnapshotHeader) + "'");
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto f = split_fields(line, '\t');
    if (f[0] == "P" && f.size() == 4) {
      h.pairs_[f[1]][f[2]] += parse_count(f[3], source, line_no);
    } else if (f[0] == "C" && f.size() == 6) {
      h.contexts_[{f[1], f[2]}][{f[3], f[4]}] += parse_count(f[5], source, line_no);
    } else {
      throw DataError(source, line_no, "expected a P or C row");
    }
  }
  for (const auto& [pair, ctxs] : h.contexts_) {
    if (h.count(pair.first, pair.second) == 0) {
      throw DataError(source, line_no, "context for unknown pair '" + pair.first + "' -> '" + pair.second + "'");
    }
  }
  return h;
}

void AlignmentHistory::save(const std::filesystem::path& path) const {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    write(out);
  }
  std::filesystem::rename(tmp, path);
}

AlignmentHistory AlignmentHistory::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read(in, path.string());
}

AlignmentHistory rebuild_history(std::span<const CorpusRecord> records) {
  AlignmentHistory h;
  for (const auto& r : records) {
    if (r.status == Status::reviewed || r.status == Status::confirmed) h.ingest(r);
  }
  return h;
}

std::string_view to_string(Provenance p) {
  return p == Provenance::history ? "history" : "diagonal-fallback";
}

std::vector<Suggestion> suggest(std::span<const std::string> informal, std::span<const std::string> formal,
                                const AlignmentHistory& history) {
  std::vector<Suggestion> out;
  std::vector<bool> inf_used(informal.size(), false);
  std::vector<bool> form_used(formal.size(), false);

  struct Option {
    std::size_t position;
    std::size_t length;
    std::string phrase;
    std::uint64_t count;
    std::uint64_t overlap;
  };
  const auto better = [](const Option& a, const Option& b) {
    if (a.count != b.count) return a.count > b.count;
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    if (a.position != b.position) return a.position < b.position;
    return a.phrase < b.phrase;
  };

  const std::size_t max_n = std::min(kMaxInformalPhraseTokens, informal.size());
  for (std::size_t n = max_n; n >= 1; --n) {
    for (std::size_t i = 0; i + n <= informal.size(); ++i) {
      if (std::any_of(inf_used.begin() + static_cast<std::ptrdiff_t>(i),
                      inf_used.begin() + static_cast<std::ptrdiff_t>(i + n), [](bool u) { return u; })) {
        continue;
      }
      const std::string phrase = span_text(informal, {i, i + n});
      const auto candidates = history.formal_for(phrase);
      if (candidates.empty()) continue;
      const std::string left = i > 0 ? informal[i - 1] : std::string();
      const std::string right = i + n < informal.size() ? informal[i + n] : std::string();

      std::optional<Option> best;
      for (const auto& [fphrase, count] : candidates) {
        const auto ftoks = split_tokens(fphrase);
        const std::size_t m = ftoks.size();
        if (m == 0 || m > formal.size()) continue;
        const std::uint64_t overlap = history.context_overlap(phrase, fphrase, left, right);
        for (std::size_t q = 0; q + m <= formal.size(); ++q) {
          bool ok = true;
          for (std::size_t k = 0; k < m && ok; ++k) ok = !form_used[q + k] && formal[q + k] == ftoks[k];
          if (!ok) continue;
          Option o{q, m, fphrase, count, overlap};
          if (!best || better(o, *best)) best = o;
        }
      }
      if (!best) continue;
      for (std::size_t k = i; k < i + n; ++k) inf_used[k] = true;
      for (std::size_t k = best->position; k < best->position + best->length; ++k) form_used[k] = true;
      out.push_back({{{i, i + n}, {best->position, best->position + best->length}},
                     best->count,
                     best->overlap,
                     Provenance::history});
    }
  }

  // Diagonal fallback: pair the r-th of k unclaimed tokens on each side by
  // relative rank; the rest become insertions or deletions.
  std::vector<std::size_t> u;
  std::vector<std::size_t> v;
  for (std::size_t i = 0; i < informal.size(); ++i) {
    if (!inf_used[i]) u.push_back(i);
  }
  for (std::size_t q = 0; q < formal.size(); ++q) {
    if (!form_used[q]) v.push_back(q);
  }
  const std::size_t k = std::min(u.size(), v.size());
  std::vector<bool> u_paired(u.size(), false);
  std::vector<bool> v_paired(v.size(), false);
  for (std::size_t r = 0; r < k; ++r) {
    const std::size_t a = r * u.size() / k;
    const std::size_t b = r * v.size() / k;
    u_paired[a] = true;
    v_paired[b] = true;
    out.push_back({{{u[a], u[a] + 1}, {v[b], v[b] + 1}}, 0, 0, Provenance::diagonal_fallback});
  }
  const std::size_t ni = informal.size();
  const std::size_t nf = formal.size();
  for (std::size_t a = 0; a < u.size(); ++a) {
    if (u_paired[a]) continue;
    const std::size_t f = nf == 0 || ni == 0 ? 0 : u[a] * nf / ni;
    out.push_back({{{u[a], u[a] + 1}, {f, f}}, 0, 0, Provenance::diagonal_fallback});
  }
  for (std::size_t b = 0; b < v.size(); ++b) {
    if (v_paired[b]) continue;
    const std::size_t i = nf == 0 || ni == 0 ? 0 : v[b] * ni / nf;
    out.push_back({{{i, i}, {v[b], v[b] + 1}}, 0, 0, Provenance::diagonal_fallback});
  }

  std::sort(out.begin(), out.end(), [](const Suggestion& a, const Suggestion& b) {
    if (a.link.informal.begin != b.link.informal.begin) return a.link.informal.begin < b.link.informal.begin;
    if (a.link.informal.end != b.link.informal.end) return a.link.informal.end < b.link.informal.end;
    return a.link.formal.begin < b.link.formal.begin;
  });
  return out;
}

}  // namespace shekaste
