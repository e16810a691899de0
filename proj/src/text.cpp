#include "shekaste/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <string>

namespace shekaste {

DecodeError::DecodeError(std::size_t byte_offset)
    : std::runtime_error("invalid UTF-8 at byte offset " + std::to_string(byte_offset)),
      byte_offset_(byte_offset) {}

std::u32string decode_utf8(std::string_view text) {
  std::u32string out;
  out.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const auto lead = static_cast<unsigned char>(text[i]);
    char32_t cp = 0;
    std::size_t extra = 0;
    if (lead < 0x80) {
      cp = lead;
    } else if ((lead & 0xE0) == 0xC0) {
      cp = lead & 0x1F;
      extra = 1;
    } else if ((lead & 0xF0) == 0xE0) {
      cp = lead & 0x0F;
      extra = 2;
    } else if ((lead & 0xF8) == 0xF0) {
      cp = lead & 0x07;
      extra = 3;
    } else {
      throw DecodeError(i);
    }
    for (std::size_t k = 1; k <= extra; ++k) {
      if (i + k >= text.size()) throw DecodeError(i);
      const auto cont = static_cast<unsigned char>(text[i + k]);
      if ((cont & 0xC0) != 0x80) throw DecodeError(i + k);
      cp = (cp << 6) | (cont & 0x3F);
    }
    // Overlong forms, surrogates and out-of-range values.
    const bool overlong = (extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
                          (extra == 3 && cp < 0x10000);
    if (overlong || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) throw DecodeError(i);
    out.push_back(cp);
    i += extra + 1;
  }
  return out;
}

std::string encode_utf8(std::u32string_view text) {
  std::string out;
  out.reserve(text.size() * 2);
  for (char32_t cp : text) {
    if (cp < 0x80) {
      out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
      out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
      out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
      out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
      out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
  }
  return out;
}

std::size_t codepoint_length(std::string_view text) {
  std::size_t n = 0;
  for (char c : text) {
    if ((static_cast<unsigned char>(c) & 0xC0) != 0x80) ++n;
  }
  return n;
}

std::string_view to_string(CharClass cls) {
  switch (cls) {
    case CharClass::consonant: return "consonant";
    case CharClass::vowel_letter: return "vowel-letter";
    case CharClass::digit: return "digit";
    case CharClass::punctuation: return "punctuation";
    case CharClass::joiner: return "joiner";
  }
  return "?";
}

std::optional<CharClass> parse_char_class(std::string_view name) {
  if (name == "consonant" || name == "C") return CharClass::consonant;
  if (name == "vowel-letter" || name == "V") return CharClass::vowel_letter;
  if (name == "digit" || name == "D") return CharClass::digit;
  if (name == "punctuation" || name == "P") return CharClass::punctuation;
  if (name == "joiner" || name == "J") return CharClass::joiner;
  return std::nullopt;
}

namespace {

bool is_arabic_script_letter(char32_t ch) {
  // Base letters of the Arabic block plus the Persian/Urdu extensions.
  return (ch >= 0x0621 && ch <= 0x063A) || (ch >= 0x0641 && ch <= 0x064A) ||
         (ch >= 0x0671 && ch <= 0x06D3) || ch == 0x06D5 || (ch >= 0x06EE && ch <= 0x06EF) ||
         (ch >= 0x06FA && ch <= 0x06FC) || ch == 0x06FF;
}

char32_t map_codepoint(char32_t ch) {
  switch (ch) {
    case 0x0643:  // arabic kaf
    case 0xFED9: case 0xFEDA: case 0xFEDB: case 0xFEDC:
    case 0xFB8E: case 0xFB8F: case 0xFB90: case 0xFB91:
      return 0x06A9;
    case 0x064A:  // arabic yeh
    case 0xFEF1: case 0xFEF2: case 0xFEF3: case 0xFEF4:
    case 0xFBFC: case 0xFBFD: case 0xFBFE: case 0xFBFF:
      return 0x06CC;
    default:
      break;
  }
  if (ch >= 0x0660 && ch <= 0x0669) return ch - 0x0660 + 0x06F0;
  return ch;
}

}  // namespace

std::optional<CharClass> classify(char32_t ch) {
  if (ch == kZwnj || ch == 0x200D) return CharClass::joiner;
  if (ch == 0x0627 || ch == 0x0648 || ch == 0x06CC || ch == 0x0622) return CharClass::vowel_letter;
  if (is_arabic_script_letter(ch)) return CharClass::consonant;
  if ((ch >= U'0' && ch <= U'9') || (ch >= 0x0660 && ch <= 0x0669) ||
      (ch >= 0x06F0 && ch <= 0x06F9)) {
    return CharClass::digit;
  }
  if (is_punctuation(ch)) return CharClass::punctuation;
  return std::nullopt;
}

bool is_letter(char32_t ch) {
  if (ch == kZwnj || ch == 0x200D) return false;
  return u_isalpha(static_cast<UChar32>(ch)) != 0;
}

bool is_punctuation(char32_t ch) {
  return u_ispunct(static_cast<UChar32>(ch)) != 0;
}

std::string map_characters(std::string_view raw) {
  // Validates as a side effect; ICU would silently replace bad bytes.
  const std::u32string decoded = decode_utf8(raw);

  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* nfc = icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU NFC normalizer unavailable");
  const icu::UnicodeString source = icu::UnicodeString::fromUTF8(encode_utf8(decoded));
  icu::UnicodeString composed = nfc->normalize(source, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");
  std::string composed_utf8;
  composed.toUTF8String(composed_utf8);

  std::u32string cps = decode_utf8(composed_utf8);
  for (char32_t& ch : cps) ch = map_codepoint(ch);
  return encode_utf8(cps);
}

std::pair<std::string, std::vector<EmphasisFlag>> collapse_repetition(std::string_view text) {
  const std::u32string in = decode_utf8(text);
  std::u32string out;
  out.reserve(in.size());
  std::vector<EmphasisFlag> flags;
  std::size_t i = 0;
  while (i < in.size()) {
    std::size_t j = i + 1;
    while (j < in.size() && in[j] == in[i]) ++j;
    const std::size_t run = j - i;
    if (run >= 3 && is_letter(in[i])) {
      flags.push_back({out.size(), run});
      out.push_back(in[i]);
    } else {
      out.append(in, i, run);
    }
    i = j;
  }
  return {encode_utf8(out), std::move(flags)};
}

namespace {

bool is_space(char32_t ch) {
  return ch == U' ' || ch == U'\t' || ch == U'\n' || ch == U'\r' || ch == U'\v' || ch == U'\f' ||
         u_isUWhiteSpace(static_cast<UChar32>(ch)) != 0;
}

std::string collapse_whitespace(std::string_view text) {
  const std::u32string in = decode_utf8(text);
  std::u32string out;
  out.reserve(in.size());
  bool pending_space = false;
  for (char32_t ch : in) {
    if (is_space(ch)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(U' ');
    pending_space = false;
    out.push_back(ch);
  }
  return encode_utf8(out);
}

}  // namespace

NormalizedText normalize_text(std::string_view raw) {
  const std::string mapped = map_characters(raw);
  auto [text, flags] = collapse_repetition(collapse_whitespace(mapped));
  return {std::move(text), std::move(flags)};
}

TokenSequence tokenize(const NormalizedText& text) {
  TokenSequence tokens;
  const std::string_view s = text.text;
  std::size_t cp_offset = 0;
  std::size_t start_byte = 0;
  std::size_t start_cp = 0;
  auto flush = [&](std::size_t end_byte) {
    if (end_byte > start_byte) {
      tokens.push_back({std::string(s.substr(start_byte, end_byte - start_byte)), tokens.size(),
                        start_cp, cp_offset});
    }
  };
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto byte = static_cast<unsigned char>(s[i]);
    if (byte == ' ') {
      flush(i);
      ++cp_offset;
      start_byte = i + 1;
      start_cp = cp_offset;
      continue;
    }
    if ((byte & 0xC0) != 0x80) ++cp_offset;
  }
  flush(s.size());
  return tokens;
}

std::vector<std::string> normalized_tokens(std::string_view raw) {
  const TokenSequence tokens = tokenize(normalize_text(raw));
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const Token& t : tokens) out.push_back(t.surface);
  return out;
}

std::vector<std::string> split_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t pos = text.find(' ', start);
    const std::size_t end = pos == std::string_view::npos ? text.size() : pos;
    if (end > start) out.emplace_back(text.substr(start, end - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string detokenize(std::span<const std::string> surfaces) {
  std::string out;
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    if (i > 0) out.push_back(' ');
    out += surfaces[i];
  }
  return out;
}

std::string detokenize(const TokenSequence& tokens) {
  std::vector<std::string> surfaces;
  surfaces.reserve(tokens.size());
  for (const Token& t : tokens) surfaces.push_back(t.surface);
  return detokenize(surfaces);
}

}  // namespace shekaste
