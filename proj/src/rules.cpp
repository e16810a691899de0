#include "shekaste/rules.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "shekaste/text.hpp"

namespace shekaste {

std::string_view to_string(RuleCategory c) {
  switch (c) {
    case RuleCategory::phonological: return "phonological";
    case RuleCategory::morphological: return "morphological";
    case RuleCategory::syntactic: return "syntactic";
    case RuleCategory::mistake: return "mistake";
  }
  return "?";
}

std::optional<RuleCategory> parse_rule_category(std::string_view name) {
  if (name == "phonological") return RuleCategory::phonological;
  if (name == "morphological") return RuleCategory::morphological;
  if (name == "syntactic") return RuleCategory::syntactic;
  if (name == "mistake") return RuleCategory::mistake;
  return std::nullopt;
}

namespace {

std::string join_issues(const std::vector<RuleIssue>& issues) {
  std::ostringstream os;
  os << issues.size() << " rule error(s)";
  for (const auto& i : issues) os << "\n  line " << i.line << ": " << i.message;
  return os.str();
}

std::vector<std::string> split_on(std::string_view text, std::string_view sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      return out;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + sep.size();
  }
}

bool known_with_tags(const Vocabulary& vocab, std::string_view word,
                     const std::vector<std::string>& tags) {
  if (tags.empty()) return vocab.contains(word);
  return std::any_of(tags.begin(), tags.end(),
                     [&](const std::string& t) { return vocab.has_tag(word, t); });
}

// "TEMPLATE@A/B" -> template and tag list.
std::pair<std::string, std::vector<std::string>> split_tag_suffix(std::string_view spec) {
  const std::size_t at = spec.rfind('@');
  if (at == std::string_view::npos) return {std::string(spec), {}};
  std::vector<std::string> tags;
  for (auto& t : split_fields(spec.substr(at + 1), '/')) {
    if (!t.empty()) tags.push_back(t);
  }
  return {std::string(spec.substr(0, at)), tags};
}

Guard parse_guard(std::string_view raw) {
  Guard g;
  g.source = std::string(raw);
  std::string_view s = raw;
  if (s.starts_with("!")) {
    g.negated = true;
    s.remove_prefix(1);
  }
  if (s == "first") { g.kind = Guard::Kind::first; return g; }
  if (s == "last") { g.kind = Guard::Kind::last; return g; }
  if (s == "left-known") { g.kind = Guard::Kind::left_known; return g; }
  if (s == "right-known") { g.kind = Guard::Kind::right_known; return g; }
  const bool left = s.starts_with("left");
  const bool right = s.starts_with("right");
  if (!left && !right) throw PatternError("unknown guard '" + std::string(raw) + "'");
  s.remove_prefix(left ? 4 : 5);
  if (s.starts_with(":")) {
    g.kind = left ? Guard::Kind::left_pattern : Guard::Kind::right_pattern;
    g.pattern = Pattern::compile(s.substr(1));
    return g;
  }
  if (s.starts_with("@")) {
    g.kind = left ? Guard::Kind::left_tag : Guard::Kind::right_tag;
    for (auto& t : split_fields(s.substr(1), '/')) {
      if (!t.empty()) g.tags.push_back(t);
    }
    if (g.tags.empty()) throw PatternError("guard '" + std::string(raw) + "' has no tags");
    return g;
  }
  throw PatternError("unknown guard '" + std::string(raw) + "'");
}

bool guard_holds(const Guard& g, const NeighborContext& ctx, const Vocabulary& vocab) {
  bool result = false;
  switch (g.kind) {
    case Guard::Kind::first: result = ctx.index == 0; break;
    case Guard::Kind::last: result = ctx.index + 1 == ctx.count; break;
    case Guard::Kind::left_pattern:
      result = ctx.left && g.pattern->matches(*ctx.left);
      break;
    case Guard::Kind::right_pattern:
      result = ctx.right && g.pattern->matches(*ctx.right);
      break;
    case Guard::Kind::left_tag: result = ctx.left && known_with_tags(vocab, *ctx.left, g.tags); break;
    case Guard::Kind::right_tag: result = ctx.right && known_with_tags(vocab, *ctx.right, g.tags); break;
    case Guard::Kind::left_known: result = ctx.left && vocab.is_formal(*ctx.left); break;
    case Guard::Kind::right_known: result = ctx.right && vocab.is_formal(*ctx.right); break;
  }
  return result != g.negated;
}

Rule parse_rule_line(const std::string& line, std::size_t line_no) {
  const auto fields = split_on(line, " | ");
  if (fields.size() != 7) {
    throw PatternError("expected 7 fields separated by ' | ', got " + std::to_string(fields.size()));
  }
  Rule r;
  r.line = line_no;
  r.id = trim(fields[0]);
  if (r.id.empty()) throw PatternError("empty rule id");

  const std::string category = trim(fields[1]);
  const auto cat = parse_rule_category(category);
  if (!cat) throw PatternError("unknown category '" + category + "'");
  if (*cat == RuleCategory::syntactic) {
    throw PatternError("syntactic transforms are built into the converter and cannot be rule lines");
  }
  r.category = *cat;

  const std::string prio = trim(fields[2]);
  const auto [ptr, ec] = std::from_chars(prio.data(), prio.data() + prio.size(), r.priority);
  if (ec != std::errc() || ptr != prio.data() + prio.size()) {
    throw PatternError("priority '" + prio + "' is not an integer");
  }

  r.pattern = Pattern::compile(trim(fields[3]));
  r.replacement = Template::parse(trim(fields[4]));
  if (r.replacement.max_group() >= static_cast<int>(r.pattern.group_count())) {
    throw PatternError("replacement references undefined capture $" +
                       std::to_string(r.replacement.max_group()));
  }

  const std::string guards = trim(fields[5]);
  if (guards != "-" && !guards.empty()) {
    for (const auto& g : split_fields(guards, ';')) {
      const std::string t = trim(g);
      if (!t.empty()) r.guards.push_back(parse_guard(t));
    }
  }

  const std::string flags = trim(fields[6]);
  if (flags != "-" && !flags.empty()) {
    for (const auto& f : split_fields(flags, ',')) {
      const std::string t = trim(f);
      if (t == "validate") {
        r.validate.enabled = true;
      } else if (t.starts_with("validate=")) {
        r.validate.enabled = true;
        auto [tmpl, tags] = split_tag_suffix(std::string_view(t).substr(9));
        if (!tmpl.empty()) {
          Template target = Template::parse(tmpl);
          if (target.max_group() >= static_cast<int>(r.pattern.group_count())) {
            throw PatternError("validation target references undefined capture");
          }
          r.validate.target = std::move(target);
        }
        r.validate.tags = std::move(tags);
      } else if (t == "unknown-only") {
        r.unknown_only = true;
      } else if (!t.empty()) {
        throw PatternError("unknown flag '" + t + "'");
      }
    }
  }
  return r;
}

bool rule_order(const Rule& a, const Rule& b) {
  if (a.priority != b.priority) return a.priority < b.priority;
  return a.id < b.id;
}

}  // namespace

RuleParseError::RuleParseError(std::vector<RuleIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

std::optional<std::string> apply_rule(const Rule& rule, std::string_view token,
                                      const NeighborContext& context, const Vocabulary& vocabulary) {
  if (token.empty()) return std::nullopt;
  if (rule.unknown_only && vocabulary.is_formal(token)) return std::nullopt;
  for (const Guard& g : rule.guards) {
    if (!guard_holds(g, context, vocabulary)) return std::nullopt;
  }
  const std::u32string cps = decode_utf8(token);
  const auto m = rule.pattern.search(cps);
  if (!m) return std::nullopt;

  std::string result;
  if (!rule.replacement.deletes()) {
    const auto [b, e] = *m->groups[0];
    result = encode_utf8(std::u32string_view(cps).substr(0, b));
    result += rule.replacement.expand(cps, *m);
    result += encode_utf8(std::u32string_view(cps).substr(e));
  }
  if (result == token) return std::nullopt;

  if (rule.validate.enabled) {
    if (rule.validate.target) {
      if (!known_with_tags(vocabulary, rule.validate.target->expand(cps, *m), rule.validate.tags)) {
        return std::nullopt;
      }
    } else {
      const auto parts = split_tokens(result);
      if (parts.empty()) return std::nullopt;
      for (const auto& p : parts) {
        if (!known_with_tags(vocabulary, p, rule.validate.tags)) return std::nullopt;
      }
    }
  }
  return result;
}

RuleSet::RuleSet() : vocabulary_(std::make_shared<Vocabulary>()) {}

RuleSet::RuleSet(std::vector<Rule> rules, std::shared_ptr<const Vocabulary> vocabulary)
    : vocabulary_(vocabulary ? std::move(vocabulary) : std::make_shared<Vocabulary>()) {
  for (Rule& r : rules) {
    switch (r.category) {
      case RuleCategory::morphological: morphological_.push_back(std::move(r)); break;
      case RuleCategory::phonological: phonological_.push_back(std::move(r)); break;
      case RuleCategory::mistake: mistake_.push_back(std::move(r)); break;
      case RuleCategory::syntactic: break;
    }
  }
  std::sort(morphological_.begin(), morphological_.end(), rule_order);
  std::sort(phonological_.begin(), phonological_.end(), rule_order);
  std::sort(mistake_.begin(), mistake_.end(), rule_order);
}

std::span<const Rule> RuleSet::stage(RuleCategory category) const {
  switch (category) {
    case RuleCategory::morphological: return morphological_;
    case RuleCategory::phonological: return phonological_;
    case RuleCategory::mistake: return mistake_;
    case RuleCategory::syntactic: break;
  }
  return {};
}

const Rule* RuleSet::find(std::string_view id) const {
  for (const auto* group : {&morphological_, &phonological_, &mistake_}) {
    for (const Rule& r : *group) {
      if (r.id == id) return &r;
    }
  }
  return nullptr;
}

std::size_t RuleSet::size() const {
  return morphological_.size() + phonological_.size() + mistake_.size();
}

RuleSet RuleSet::with_vocabulary(std::shared_ptr<const Vocabulary> vocabulary) const {
  RuleSet copy = *this;
  copy.vocabulary_ = vocabulary ? std::move(vocabulary) : std::make_shared<Vocabulary>();
  return copy;
}

StageResult RuleSet::apply_stage(RuleCategory category, std::span<const std::string> tokens) const {
  StageResult out;
  out.surfaces.assign(tokens.begin(), tokens.end());
  const auto rules = stage(category);
  // Left context is already rewritten (last word of the nearest surviving
  // token); right context is still the input.
  std::string left;
  bool has_left = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    NeighborContext ctx;
    ctx.index = i;
    ctx.count = tokens.size();
    if (i > 0 && !out.surfaces[i - 1].empty()) {
      const std::string& prev = out.surfaces[i - 1];
      const std::size_t sp = prev.rfind(' ');
      left = sp == std::string::npos ? prev : prev.substr(sp + 1);
      has_left = true;
    }
    if (has_left) ctx.left = left;
    if (i + 1 < tokens.size()) ctx.right = tokens[i + 1];
    for (const Rule& r : rules) {
      if (auto rewritten = apply_rule(r, tokens[i], ctx, *vocabulary_)) {
        out.trace.push_back({i, r.id, tokens[i], *rewritten});
        out.surfaces[i] = std::move(*rewritten);
        break;
      }
    }
  }
  return out;
}

RuleSet parse_ruleset(std::string_view text, std::shared_ptr<const Vocabulary> vocabulary) {
  std::vector<Rule> rules;
  std::vector<RuleIssue> issues;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      Rule r = parse_rule_line(t, line_no);
      if (!ids.insert(r.id).second) {
        issues.push_back({line_no, "duplicate rule id '" + r.id + "'"});
        continue;
      }
      rules.push_back(std::move(r));
    } catch (const PatternError& e) {
      issues.push_back({line_no, e.what()});
    } catch (const DecodeError& e) {
      issues.push_back({line_no, e.what()});
    }
  }
  if (!issues.empty()) throw RuleParseError(std::move(issues));
  return RuleSet(std::move(rules), std::move(vocabulary));
}

RuleSet load_ruleset(const std::filesystem::path& path, std::shared_ptr<const Vocabulary> vocabulary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_ruleset(ss.str(), std::move(vocabulary));
}

std::vector<std::string> replay_trace(std::span<const std::string> input,
                                      std::span<const TraceEntry> trace) {
  std::vector<std::string> out(input.begin(), input.end());
  for (const TraceEntry& t : trace) {
    if (t.token_index < out.size() && out[t.token_index] == t.before) out[t.token_index] = t.after;
  }
  return out;
}

}  // namespace shekaste
