#pragma once

// Token-local pattern language used by rewrite rules.
//
//   ^ $          token start / end anchors
//   .            any character
//   {C} {V} ...  character class (consonant, vowel-letter, digit,
//                punctuation, joiner); full names are accepted too
//   [abc] [^ab]  character set, may contain {X} classes and a-b ranges
//   ( a | b )    capture group with alternation
//   * + ?        greedy quantifiers
//   \x           literal x
//
// Matching runs over code points with backtracking; tokens are short.

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "shekaste/text.hpp"

namespace shekaste {

class PatternError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct PatternMatch {
  // Code point ranges; index 0 is the whole match. Unset groups are nullopt.
  std::vector<std::optional<std::pair<std::size_t, std::size_t>>> groups;
};

class Pattern {
 public:
  // Throws PatternError.
  static Pattern compile(std::string_view source);

  std::optional<PatternMatch> search(std::u32string_view text) const;
  std::optional<PatternMatch> search(std::string_view utf8) const;
  bool matches(std::string_view utf8) const { return search(utf8).has_value(); }

  // Including the whole-match slot 0.
  std::size_t group_count() const { return group_count_; }
  const std::string& source() const { return source_; }

  struct Node;

 private:
  std::string source_;
  std::shared_ptr<const Node> root_;
  std::size_t group_count_ = 0;
};

// Replacement template: literal text with $0..$9 capture references.
// A template consisting of "∅" deletes the token.
class Template {
 public:
  static constexpr std::string_view kDelete = "∅";

  static Template parse(std::string_view source);

  // Highest referenced capture index, or -1.
  int max_group() const { return max_group_; }
  bool deletes() const { return deletes_; }
  const std::string& source() const { return source_; }

  std::string expand(std::u32string_view text, const PatternMatch& match) const;

 private:
  struct Part {
    std::string literal;
    int group = -1;
  };
  std::string source_;
  std::vector<Part> parts_;
  int max_group_ = -1;
  bool deletes_ = false;
};

// Replaces the leftmost match of `pattern` in `text` with `replacement`,
// keeping the unmatched prefix and suffix.
std::optional<std::string> rewrite(const Pattern& pattern, const Template& replacement,
                                   std::string_view text);

}  // namespace shekaste
