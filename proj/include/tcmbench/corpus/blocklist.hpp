#pragma once

#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "tcmbench/corpus/document.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/fs.hpp"
#include "tcmbench/util/utf8.hpp"

namespace tcmbench::corpus {

struct Blocklist {
  std::vector<std::string> terms;
  double rate_per_1000 = 5.0;  // hits allowed per 1000 characters
};

/// One term per line; blank lines and lines starting with '#' are skipped.
/// A line `rate = N` sets the density limit.
inline Blocklist load_blocklist(const std::filesystem::path& path) {
  Blocklist b;
  std::istringstream in(fsutil::read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    line = line.substr(first, line.find_last_not_of(" \t") - first + 1);
    if (line.rfind("rate", 0) == 0 && line.find('=') != std::string::npos) {
      try {
        b.rate_per_1000 = std::stod(line.substr(line.find('=') + 1));
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ": bad rate line '" + line + "'");
      }
      continue;
    }
    b.terms.push_back(line);
  }
  return b;
}

namespace detail {

inline std::u32string fold_lower(std::string_view s) {
  auto u = utf8::decode(s);
  for (auto& c : u) c = utf8::ascii_lower(utf8::fold_width(c));
  return u;
}

inline bool ascii_alnum(char32_t c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

/// Non-overlapping occurrences. Latin edges must sit on word boundaries, so
/// "ct" does not match inside "extract".
inline std::size_t count_occurrences(const std::u32string& hay, const std::u32string& needle) {
  if (needle.empty()) return 0;
  const bool word_start = ascii_alnum(needle.front());
  const bool word_end = ascii_alnum(needle.back());
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::u32string::npos;) {
    const auto end = pos + needle.size();
    const bool ok = !(word_start && pos > 0 && ascii_alnum(hay[pos - 1])) &&
                    !(word_end && end < hay.size() && ascii_alnum(hay[end]));
    if (ok) ++n;
    pos = hay.find(needle, ok ? end : pos + 1);
  }
  return n;
}

}  // namespace detail

struct BlocklistDrop {
  std::string id;
  std::size_t chars = 0;
  std::size_t hits = 0;
  std::map<std::string, std::size_t> terms;  // term -> hits
};

struct BlocklistResult {
  std::vector<CorpusDocument> kept;
  std::vector<BlocklistDrop> dropped;
};

/// Drops a document when hits * 1000 > rate * chars (strictly greater, so a
/// document exactly at the limit is kept). Matching ignores width and
/// Latin case.
inline BlocklistResult filter_blocklist(std::vector<CorpusDocument> docs, const Blocklist& list) {
  if (list.terms.empty()) throw ValidationError("blocklist is empty");
  if (!(list.rate_per_1000 >= 0.0)) throw ValidationError("blocklist rate must be non-negative");
  std::vector<std::pair<std::string, std::u32string>> terms;
  for (const auto& t : list.terms) terms.emplace_back(t, detail::fold_lower(t));

  BlocklistResult r;
  for (auto& d : docs) {
    const auto text = detail::fold_lower(d.normalized);
    BlocklistDrop info{d.id, text.size(), 0, {}};
    for (const auto& [name, folded] : terms) {
      const auto n = detail::count_occurrences(text, folded);
      if (n == 0) continue;
      info.terms[name] += n;
      info.hits += n;
    }
    if (static_cast<double>(info.hits) * 1000.0 > list.rate_per_1000 * static_cast<double>(info.chars)) {
      r.dropped.push_back(std::move(info));
    } else {
      r.kept.push_back(std::move(d));
    }
  }
  return r;
}

}  // namespace tcmbench::corpus
