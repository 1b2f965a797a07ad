#pragma once

// Turns raw model output into structured answers. Failures are a value
// (ParseFailure), never an exception.

#include <algorithm>
#include <array>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tcmbench/util/utf8.hpp"

namespace tcmbench::scenarios {

struct OptionLetter {
  char letter;
};
struct Label {
  std::string text;
};
struct EntitySet {
  std::set<std::string> items;
};
struct RankedItems {
  std::vector<std::string> items;
};
struct FreeText {
  std::string text;
};
struct ParseFailure {
  std::string reason;
};

struct ParsedAnswer {
  std::variant<OptionLetter, Label, EntitySet, RankedItems, FreeText, ParseFailure> value;
  std::string rule;  // identifier of the rule that produced `value`

  bool failed() const { return std::holds_alternative<ParseFailure>(value); }
  template <class T>
  const T* as() const {
    return std::get_if<T>(&value);
  }
};

namespace detail {

inline std::u32string trim(std::u32string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && utf8::is_space(s[b])) ++b;
  while (e > b && utf8::is_space(s[e - 1])) --e;
  return std::u32string(s.substr(b, e - b));
}

inline std::u32string fold(std::u32string_view s) {
  std::u32string out(s);
  for (auto& c : out) c = utf8::fold_width(c);
  return out;
}

inline std::vector<std::u32string> lines(std::u32string_view s) {
  std::vector<std::u32string> out;
  std::u32string cur;
  for (char32_t c : s) {
    if (c == U'\n' || c == U'\r') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

constexpr bool is_ascii_alnum(char32_t c) {
  return (c >= U'0' && c <= U'9') || (c >= U'a' && c <= U'z') || (c >= U'A' && c <= U'Z');
}

constexpr bool is_option(char32_t c) { return c >= U'A' && c <= U'E'; }

inline bool starts_with_ci(std::u32string_view s, std::size_t pos, std::u32string_view word) {
  if (pos + word.size() > s.size()) return false;
  for (std::size_t k = 0; k < word.size(); ++k)
    if (utf8::ascii_lower(s[pos + k]) != word[k]) return false;
  return true;
}

}  // namespace detail

/// Removes `<think>...</think>` spans (nesting-aware; an unclosed block runs
/// to the end) and any text preceding an unmatched `</think>`, then trims.
/// Applied to a fixpoint, so the result is idempotent.
inline std::string strip_reasoning_markup(std::string_view raw) {
  static constexpr std::string_view kOpen = "<think>";
  static constexpr std::string_view kClose = "</think>";
  std::string cur(raw);
  for (;;) {
    std::string out;
    int depth = 0;
    std::size_t i = 0;
    while (i < cur.size()) {
      if (cur.compare(i, kOpen.size(), kOpen) == 0) {
        ++depth;
        i += kOpen.size();
      } else if (cur.compare(i, kClose.size(), kClose) == 0) {
        if (depth > 0) {
          --depth;
        } else {
          out.clear();  // reasoning emitted without its opening tag
        }
        i += kClose.size();
      } else {
        if (depth == 0) out.push_back(cur[i]);
        ++i;
      }
    }
    auto trimmed = utf8::encode(detail::trim(utf8::decode(out)));
    if (trimmed == cur) return trimmed;
    cur = std::move(trimmed);
  }
}

/// Option-letter cascade; first hit wins:
///   answer-cue    letter right after 答案 / 选 / answer (optional is/是/为, colon)
///   parenthesized (B), [B], 【B】
///   standalone    an A-E capital not touching other ASCII letters or digits
///   first-line    first A-E capital on the first non-empty line
inline ParsedAnswer extract_option_letter(std::string_view raw) {
  const auto s = detail::fold(utf8::decode(raw));
  auto hit = [](char32_t c, const char* rule) {
    return ParsedAnswer{OptionLetter{static_cast<char>(c)}, rule};
  };

  static const std::array<std::u32string_view, 3> kCues{U"答案", U"选", U"answer"};
  for (std::size_t pos = 0; pos < s.size(); ++pos) {
    for (auto cue : kCues) {
      if (!detail::starts_with_ci(s, pos, cue)) continue;
      std::size_t j = pos + cue.size();
      auto skip_spaces = [&] {
        while (j < s.size() && utf8::is_space(s[j])) ++j;
      };
      auto skip_copula = [&] {
        skip_spaces();
        if (j < s.size() && (s[j] == U'是' || s[j] == U'为')) ++j;
        else if (detail::starts_with_ci(s, j, U"is")) j += 2;
        skip_spaces();
      };
      skip_copula();
      if (j < s.size() && s[j] == U':') ++j;
      skip_copula();
      if (j < s.size() && detail::is_option(s[j]) &&
          (j + 1 >= s.size() || !detail::is_ascii_alnum(s[j + 1])))
        return hit(s[j], "answer-cue");
    }
  }

  static constexpr std::u32string_view kOpen = U"([【〔〖";
  static constexpr std::u32string_view kClose = U")]】〕〗";
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    if (kOpen.find(s[i]) != std::u32string_view::npos && detail::is_option(s[i + 1]) &&
        kClose.find(s[i + 2]) != std::u32string_view::npos)
      return hit(s[i + 1], "parenthesized");
  }

  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!detail::is_option(s[i])) continue;
    const bool left_ok = i == 0 || !detail::is_ascii_alnum(s[i - 1]);
    const bool right_ok = i + 1 >= s.size() || !detail::is_ascii_alnum(s[i + 1]);
    if (left_ok && right_ok) return hit(s[i], "standalone");
  }

  for (const auto& line : detail::lines(s)) {
    if (detail::trim(line).empty()) continue;
    for (char32_t c : line)
      if (detail::is_option(c)) return hit(c, "first-line");
    break;
  }
  return {ParseFailure{"no option letter"}, "no-option-letter"};
}

/// Width-folded, lowercased, with whitespace and punctuation removed.
inline std::string normalize_label(std::string_view s) {
  std::string out;
  for (char32_t c : utf8::decode(s)) {
    c = utf8::ascii_lower(utf8::fold_width(c));
    if (utf8::is_space(c) || utf8::is_punct(c) || utf8::is_control(c)) continue;
    utf8::append(out, c);
  }
  return out;
}

using Normalizer = std::function<std::string(std::string_view)>;

/// First line whose content survives prefix removal and normalization.
inline ParsedAnswer extract_label(std::string_view raw, const Normalizer& normalizer = normalize_label) {
  static const std::array<std::u32string_view, 6> kPrefixes{
      U"证型", U"诊断", U"辨证", U"证候", U"答案", U"中医诊断"};
  for (const auto& line : detail::lines(detail::fold(utf8::decode(raw)))) {
    auto t = detail::trim(line);
    bool stripped = true;
    while (stripped) {
      stripped = false;
      for (auto p : kPrefixes) {
        if (t.size() >= p.size() && std::u32string_view(t).substr(0, p.size()) == p) {
          std::size_t j = p.size();
          while (j < t.size() && (utf8::is_space(t[j]))) ++j;
          if (j < t.size() && t[j] == U':') {
            t = detail::trim(std::u32string_view(t).substr(j + 1));
            stripped = true;
          }
        }
      }
    }
    auto label = normalizer(utf8::encode(t));
    if (!label.empty()) return {Label{label}, "first-line-label"};
  }
  return {ParseFailure{"empty label"}, "empty-label"};
}

/// Normal form for list items and gold entities: width-folded, lowercased
/// Latin, inner whitespace collapsed, surrounding punctuation removed.
inline std::string normalize_item(std::string_view s) {
  std::u32string t;
  bool pending_space = false;
  for (char32_t c : utf8::decode(s)) {
    c = utf8::ascii_lower(utf8::fold_width(c));
    if (utf8::is_control(c)) continue;
    if (utf8::is_space(c)) {
      pending_space = !t.empty();
      continue;
    }
    if (pending_space) t.push_back(U' ');
    pending_space = false;
    t.push_back(c);
  }
  std::size_t b = 0, e = t.size();
  while (b < e && (utf8::is_punct(t[b]) || utf8::is_space(t[b]))) ++b;
  while (e > b && (utf8::is_punct(t[e - 1]) || utf8::is_space(t[e - 1]))) --e;
  return utf8::encode(std::u32string_view(t).substr(b, e - b));
}

namespace detail {

inline bool is_digit(char32_t c) { return c >= U'0' && c <= U'9'; }

// "1." "2、" "(3)" "（4）" at the start of a line. Chinese numerals are not
// treated as numbering: herb names such as 三七 would be eaten.
inline std::u32string strip_numbering(std::u32string s) {
  s = trim(s);
  std::size_t i = 0;
  bool paren = false;
  if (i < s.size() && s[i] == U'(') {
    paren = true;
    ++i;
  }
  const std::size_t start = i;
  while (i < s.size() && is_digit(s[i])) ++i;
  if (i == start || i >= s.size()) return s;
  if (paren) {
    if (s[i] != U')') return s;
    ++i;
  } else if (s[i] == U'.' || s[i] == U'、' || s[i] == U')' || s[i] == U':') {
    // "1.5g" is a dosage, not numbering
    if (s[i] == U'.' && i + 1 < s.size() && is_digit(s[i + 1])) return s;
    ++i;
  } else {
    return s;
  }
  return trim(std::u32string_view(s).substr(i));
}

// Trailing dosage such as "15g", "10 克", " 3": digits preceded by
// whitespace, or followed by a unit.
inline std::u32string strip_dosage(std::u32string s) {
  static const std::array<std::u32string_view, 18> kUnits{
      U"mg", U"kg", U"ml", U"g", U"毫克", U"千克", U"克", U"毫升", U"钱", U"两",
      U"枚", U"片", U"粒", U"个", U"只", U"条", U"寸", U"cm"};
  s = trim(s);
  // parenthetical annotation holding a number, e.g. "(15g)"
  if (!s.empty() && (s.back() == U')' || s.back() == U'）')) {
    auto open = s.find_last_of(U"(（");
    if (open != std::u32string::npos &&
        std::any_of(s.begin() + static_cast<long>(open), s.end(), is_digit))
      s = trim(std::u32string_view(s).substr(0, open));
  }
  std::size_t e = s.size();
  bool has_unit = false;
  for (auto u : kUnits) {
    if (e >= u.size()) {
      bool match = true;
      for (std::size_t k = 0; k < u.size(); ++k)
        if (utf8::ascii_lower(s[e - u.size() + k]) != u[k]) match = false;
      if (match) {
        e -= u.size();
        has_unit = true;
        break;
      }
    }
  }
  while (e > 0 && utf8::is_space(s[e - 1])) --e;
  std::size_t d = e;
  while (d > 0 && (is_digit(s[d - 1]) || s[d - 1] == U'.' || s[d - 1] == U'~' || s[d - 1] == U'-')) --d;
  const bool has_digits = d < e && std::any_of(s.begin() + static_cast<long>(d),
                                               s.begin() + static_cast<long>(e), is_digit);
  if (!has_digits) return s;
  const bool spaced = d > 0 && utf8::is_space(s[d - 1]);
  if (!has_unit && !spaced) return s;
  if (d == 0) return U"";
  return trim(std::u32string_view(s).substr(0, d));
}

}  // namespace detail

/// Splits an enumerated answer into items. Separators: 、 , ; and newlines
/// (full-width forms included). Numbering prefixes and trailing dosages are
/// removed, items normalized with normalize_item, duplicates dropped keeping
/// the first occurrence.
inline ParsedAnswer parse_item_list(std::string_view raw, bool ordered = true) {
  static constexpr std::u32string_view kSeparators = U"、,;，；";
  std::vector<std::string> items;
  std::set<std::string> seen;
  for (const auto& line : detail::lines(detail::fold(utf8::decode(raw)))) {
    const auto body = detail::strip_numbering(line);
    std::u32string piece;
    auto flush = [&] {
      auto cleaned = detail::strip_dosage(detail::strip_numbering(piece));
      piece.clear();
      auto item = normalize_item(utf8::encode(cleaned));
      if (item.empty()) return;
      if (seen.insert(item).second) items.push_back(std::move(item));
    };
    for (char32_t c : body) {
      if (kSeparators.find(c) != std::u32string_view::npos) {
        flush();
      } else {
        piece.push_back(c);
      }
    }
    flush();
  }
  if (items.empty()) return {ParseFailure{"no items"}, "no-items"};
  if (ordered) return {RankedItems{std::move(items)}, "item-list"};
  return {EntitySet{std::set<std::string>(items.begin(), items.end())}, "item-set"};
}

}  // namespace tcmbench::scenarios
