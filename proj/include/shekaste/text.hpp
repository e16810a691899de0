#pragma once

// Text normalization, character classes and tokenization for Persian text.
// All strings crossing this interface are UTF-8.

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace shekaste {

inline constexpr char32_t kZwnj = 0x200C;
inline constexpr std::string_view kZwnjUtf8 = "‌";

class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(std::size_t byte_offset);
  std::size_t byte_offset() const { return byte_offset_; }

 private:
  std::size_t byte_offset_;
};

std::u32string decode_utf8(std::string_view text);
std::string encode_utf8(std::u32string_view text);
std::size_t codepoint_length(std::string_view text);

// A collapsed run of identical letters. `offset` is the code point offset of
// the surviving letter in the normalized text.
struct EmphasisFlag {
  std::size_t offset = 0;
  std::size_t run_length = 0;

  bool operator==(const EmphasisFlag&) const = default;
};

struct NormalizedText {
  std::string text;
  std::vector<EmphasisFlag> emphasis_flags;
};

enum class CharClass { consonant, vowel_letter, digit, punctuation, joiner };

std::string_view to_string(CharClass cls);
std::optional<CharClass> parse_char_class(std::string_view name);

// nullopt for characters outside every class (Latin letters, diacritics, ...).
std::optional<CharClass> classify(char32_t ch);
bool is_letter(char32_t ch);
bool is_punctuation(char32_t ch);

// Canonical composition followed by the yeh/kaf/digit mapping table.
std::string map_characters(std::string_view raw);

std::pair<std::string, std::vector<EmphasisFlag>> collapse_repetition(std::string_view text);

// Throws DecodeError on invalid UTF-8.
NormalizedText normalize_text(std::string_view raw);

struct Token {
  std::string surface;
  std::size_t index = 0;
  // Half-open code point offsets into the normalized text.
  std::size_t begin = 0;
  std::size_t end = 0;
};

using TokenSequence = std::vector<Token>;

TokenSequence tokenize(const NormalizedText& text);

// Normalizes then tokenizes, returning only the surfaces.
std::vector<std::string> normalized_tokens(std::string_view raw);

// Splits on single spaces without normalizing. Empty input yields no tokens.
std::vector<std::string> split_tokens(std::string_view text);

std::string detokenize(std::span<const std::string> surfaces);
std::string detokenize(const TokenSequence& tokens);

}  // namespace shekaste
