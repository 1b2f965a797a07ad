#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "tcmbench/metrics/types.hpp"
#include "tcmbench/util/utf8.hpp"

namespace tcmbench::metrics {

enum class TokenizeMode {
  /// CJK codepoints become single-character tokens; other letters and
  /// digits form lowercased words; whitespace and punctuation separate.
  CharCjkWordLatin,
  /// Split on whitespace only, lowercase, drop punctuation-only tokens.
  Whitespace,
};

inline TokenSequence tokenize(std::string_view text,
                              TokenizeMode mode = TokenizeMode::CharCjkWordLatin) {
  std::vector<std::string> out;
  std::string word;
  bool word_has_content = false;

  auto flush = [&] {
    if (!word.empty() && (mode == TokenizeMode::CharCjkWordLatin || word_has_content))
      out.push_back(word);
    word.clear();
    word_has_content = false;
  };

  for (char32_t raw : utf8::decode(text)) {
    const char32_t c = utf8::ascii_lower(utf8::fold_width(raw));
    if (utf8::is_space(c)) {
      flush();
      continue;
    }
    if (mode == TokenizeMode::Whitespace) {
      utf8::append(word, c);
      word_has_content = word_has_content || !utf8::is_punct(c);
      continue;
    }
    if (utf8::is_punct(c)) {
      flush();
    } else if (utf8::is_cjk(c)) {
      flush();
      out.push_back(utf8::encode(c));
    } else {
      utf8::append(word, c);
    }
  }
  flush();
  return TokenSequence(std::move(out));
}

}  // namespace tcmbench::metrics
