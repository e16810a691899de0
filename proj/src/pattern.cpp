#include "shekaste/pattern.hpp"

#include <functional>

namespace shekaste {

struct SetItem {
  char32_t lo = 0;
  char32_t hi = 0;
  std::optional<CharClass> cls;
};

struct Pattern::Node {
  enum class Kind { literal, any, char_class, set, group, begin, end };
  Kind kind = Kind::literal;
  char32_t ch = 0;
  CharClass cls = CharClass::consonant;
  std::vector<SetItem> items;
  bool negated = false;
  int group = -1;
  std::vector<std::vector<Node>> alternatives;
  std::size_t min = 1;
  std::size_t max = 1;  // kUnbounded for * and +
};

namespace {

using Node = Pattern::Node;
using Seq = std::vector<Node>;
using Captures = std::vector<std::optional<std::pair<std::size_t, std::size_t>>>;
using Cont = std::function<bool(std::size_t)>;

constexpr std::size_t kUnbounded = static_cast<std::size_t>(-1);

class Parser {
 public:
  explicit Parser(std::u32string src) : src_(std::move(src)) {}

  Node parse_root() {
    Node root;
    root.kind = Node::Kind::group;
    root.group = 0;
    root.alternatives = parse_alternatives();
    if (pos_ != src_.size()) fail("unbalanced ')'");
    return root;
  }

  std::size_t groups() const { return next_group_; }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw PatternError(what + " at position " + std::to_string(pos_));
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char32_t peek() const { return src_[pos_]; }

  std::vector<Seq> parse_alternatives() {
    std::vector<Seq> alts;
    alts.push_back(parse_sequence());
    while (!at_end() && peek() == U'|') {
      ++pos_;
      alts.push_back(parse_sequence());
    }
    return alts;
  }

  Seq parse_sequence() {
    Seq seq;
    while (!at_end() && peek() != U'|' && peek() != U')') {
      Node atom = parse_atom();
      if (!at_end() && (peek() == U'*' || peek() == U'+' || peek() == U'?')) {
        if (atom.kind == Node::Kind::begin || atom.kind == Node::Kind::end) {
          fail("quantifier after anchor");
        }
        const char32_t q = src_[pos_++];
        atom.min = q == U'+' ? 1 : 0;
        atom.max = q == U'?' ? 1 : kUnbounded;
        if (!at_end() && (peek() == U'*' || peek() == U'+' || peek() == U'?')) {
          fail("stacked quantifier");
        }
      }
      seq.push_back(std::move(atom));
    }
    return seq;
  }

  CharClass parse_class_name() {
    // pos_ is just past '{'
    std::u32string name;
    while (!at_end() && peek() != U'}') name.push_back(src_[pos_++]);
    if (at_end()) fail("unterminated class name");
    ++pos_;
    const auto cls = parse_char_class(encode_utf8(name));
    if (!cls) fail("unknown character class '" + encode_utf8(name) + "'");
    return *cls;
  }

  Node parse_atom() {
    Node n;
    const char32_t c = src_[pos_++];
    switch (c) {
      case U'^': n.kind = Node::Kind::begin; return n;
      case U'$': n.kind = Node::Kind::end; return n;
      case U'.': n.kind = Node::Kind::any; return n;
      case U'*': case U'+': case U'?': fail("quantifier without operand");
      case U'{':
        n.kind = Node::Kind::char_class;
        n.cls = parse_class_name();
        return n;
      case U'[': return parse_set();
      case U'(': {
        n.kind = Node::Kind::group;
        n.group = static_cast<int>(next_group_++);
        n.alternatives = parse_alternatives();
        if (at_end() || peek() != U')') fail("missing ')'");
        ++pos_;
        return n;
      }
      case U'\\':
        if (at_end()) fail("dangling escape");
        n.kind = Node::Kind::literal;
        n.ch = src_[pos_++];
        return n;
      default:
        n.kind = Node::Kind::literal;
        n.ch = c;
        return n;
    }
  }

  Node parse_set() {
    Node n;
    n.kind = Node::Kind::set;
    if (!at_end() && peek() == U'^') {
      n.negated = true;
      ++pos_;
    }
    while (!at_end() && peek() != U']') {
      char32_t c = src_[pos_++];
      if (c == U'{') {
        n.items.push_back({0, 0, parse_class_name()});
        continue;
      }
      if (c == U'\\') {
        if (at_end()) fail("dangling escape");
        c = src_[pos_++];
      }
      SetItem item{c, c, std::nullopt};
      if (pos_ + 1 < src_.size() && peek() == U'-' && src_[pos_ + 1] != U']') {
        ++pos_;
        item.hi = src_[pos_++];
        if (item.hi < item.lo) fail("reversed range");
      }
      n.items.push_back(item);
    }
    if (at_end()) fail("unterminated '['");
    ++pos_;
    if (n.items.empty()) fail("empty set");
    return n;
  }

  std::u32string src_;
  std::size_t pos_ = 0;
  std::size_t next_group_ = 1;
};

bool char_matches(const Node& n, char32_t ch) {
  switch (n.kind) {
    case Node::Kind::literal: return ch == n.ch;
    case Node::Kind::any: return true;
    case Node::Kind::char_class: return classify(ch) == n.cls;
    case Node::Kind::set: {
      bool hit = false;
      for (const SetItem& item : n.items) {
        if (item.cls ? classify(ch) == *item.cls : (ch >= item.lo && ch <= item.hi)) {
          hit = true;
          break;
        }
      }
      return hit != n.negated;
    }
    default: return false;
  }
}

class Matcher {
 public:
  Matcher(std::u32string_view text, Captures& caps) : text_(text), caps_(caps) {}

  bool seq(const Seq& s, std::size_t idx, std::size_t pos, const Cont& k) {
    if (idx == s.size()) return k(pos);
    return repeat(s[idx], 0, pos, [&](std::size_t p) { return seq(s, idx + 1, p, k); });
  }

  bool group(const Node& n, std::size_t pos, const Cont& k) {
    for (const Seq& alt : n.alternatives) {
      const auto saved = caps_[static_cast<std::size_t>(n.group)];
      const bool ok = seq(alt, 0, pos, [&](std::size_t p) {
        const auto inner = caps_[static_cast<std::size_t>(n.group)];
        caps_[static_cast<std::size_t>(n.group)] = std::make_pair(pos, p);
        if (k(p)) return true;
        caps_[static_cast<std::size_t>(n.group)] = inner;
        return false;
      });
      if (ok) return true;
      caps_[static_cast<std::size_t>(n.group)] = saved;
    }
    return false;
  }

 private:
  bool once(const Node& n, std::size_t pos, const Cont& k) {
    switch (n.kind) {
      case Node::Kind::begin: return pos == 0 && k(pos);
      case Node::Kind::end: return pos == text_.size() && k(pos);
      case Node::Kind::group: return group(n, pos, k);
      default:
        return pos < text_.size() && char_matches(n, text_[pos]) && k(pos + 1);
    }
  }

  bool repeat(const Node& n, std::size_t count, std::size_t pos, const Cont& k) {
    if (count < n.max) {
      const bool more = once(n, pos, [&](std::size_t p) {
        if (p == pos && count >= n.min) return false;  // empty iteration
        return repeat(n, count + 1, p, k);
      });
      if (more) return true;
    }
    return count >= n.min && k(pos);
  }

  std::u32string_view text_;
  Captures& caps_;
};

}  // namespace

Pattern Pattern::compile(std::string_view source) {
  if (source.empty()) throw PatternError("empty pattern");
  std::u32string decoded;
  try {
    decoded = decode_utf8(source);
  } catch (const DecodeError& e) {
    throw PatternError(e.what());
  }
  Parser parser(std::move(decoded));
  Pattern p;
  p.source_ = std::string(source);
  p.root_ = std::make_shared<const Node>(parser.parse_root());
  p.group_count_ = parser.groups();
  return p;
}

std::optional<PatternMatch> Pattern::search(std::u32string_view text) const {
  for (std::size_t start = 0; start <= text.size(); ++start) {
    Captures caps(group_count_);
    Matcher m(text, caps);
    if (m.group(*root_, start, [](std::size_t) { return true; })) {
      return PatternMatch{std::move(caps)};
    }
  }
  return std::nullopt;
}

std::optional<PatternMatch> Pattern::search(std::string_view utf8) const {
  return search(decode_utf8(utf8));
}

Template Template::parse(std::string_view source) {
  Template t;
  t.source_ = std::string(source);
  if (source == kDelete) {
    t.deletes_ = true;
    return t;
  }
  std::string literal;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const char c = source[i];
    if (c == '$' && i + 1 < source.size() && source[i + 1] >= '0' && source[i + 1] <= '9') {
      if (!literal.empty()) t.parts_.push_back({std::move(literal), -1});
      literal.clear();
      const int g = source[i + 1] - '0';
      t.parts_.push_back({{}, g});
      t.max_group_ = std::max(t.max_group_, g);
      ++i;
      continue;
    }
    literal.push_back(c);
  }
  if (!literal.empty()) t.parts_.push_back({std::move(literal), -1});
  return t;
}

std::string Template::expand(std::u32string_view text, const PatternMatch& match) const {
  if (deletes_) return {};
  std::string out;
  for (const Part& part : parts_) {
    if (part.group < 0) {
      out += part.literal;
      continue;
    }
    const auto g = static_cast<std::size_t>(part.group);
    if (g < match.groups.size() && match.groups[g]) {
      const auto [b, e] = *match.groups[g];
      out += encode_utf8(text.substr(b, e - b));
    }
  }
  return out;
}

std::optional<std::string> rewrite(const Pattern& pattern, const Template& replacement,
                                   std::string_view text) {
  const std::u32string cps = decode_utf8(text);
  const auto m = pattern.search(cps);
  if (!m) return std::nullopt;
  if (replacement.deletes()) return std::string{};
  const auto [b, e] = *m->groups[0];
  std::string out = encode_utf8(std::u32string_view(cps).substr(0, b));
  out += replacement.expand(cps, *m);
  out += encode_utf8(std::u32string_view(cps).substr(e));
  return out;
}

}  // namespace shekaste
