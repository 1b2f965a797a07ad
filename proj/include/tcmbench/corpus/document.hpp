#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/hash.hpp"
#include "tcmbench/util/utf8.hpp"

namespace tcmbench::corpus {

enum class SourceTag { Books, Literature, PublicDataset };

constexpr std::string_view to_string(SourceTag s) {
  switch (s) {
    case SourceTag::Books: return "books";
    case SourceTag::Literature: return "literature";
    case SourceTag::PublicDataset: return "public-dataset";
  }
  return "?";
}

inline std::optional<SourceTag> try_parse_source(std::string_view s) {
  for (auto t : {SourceTag::Books, SourceTag::Literature, SourceTag::PublicDataset})
    if (to_string(t) == s) return t;
  return std::nullopt;
}

/// Unifies line endings and character widths, drops control characters,
/// collapses horizontal whitespace to one space, trims each line and removes
/// blank lines. A trailing newline survives if the input ended with one.
inline std::string normalize_document(std::string_view raw) {
  const auto in = utf8::decode(raw);
  std::u32string out;
  std::u32string line;
  bool pending_space = false;
  bool ends_with_newline = false;
  auto end_line = [&] {
    if (!line.empty()) {
      if (!out.empty()) out.push_back(U'\n');
      out += line;
    }
    line.clear();
    pending_space = false;
  };
  for (std::size_t i = 0; i < in.size(); ++i) {
    char32_t c = in[i];
    if (c == U'\r') {
      if (i + 1 < in.size() && in[i + 1] == U'\n') ++i;
      c = U'\n';
    }
    if (c == U'\n' || c == 0x2028 || c == 0x2029) {
      end_line();
      ends_with_newline = true;
      continue;
    }
    c = utf8::fold_width(c);
    if (utf8::is_control(c)) continue;
    if (utf8::is_space(c)) {
      pending_space = !line.empty();
      continue;
    }
    if (pending_space) line.push_back(U' ');
    pending_space = false;
    line.push_back(c);
    ends_with_newline = false;
  }
  end_line();
  if (!out.empty() && ends_with_newline) out.push_back(U'\n');
  return utf8::encode(out);
}

/// One source text. The digest depends only on the normalized text.
struct CorpusDocument {
  std::string id;
  SourceTag source = SourceTag::PublicDataset;
  std::string raw;
  std::string normalized;
  std::string digest;
  std::vector<std::uint64_t> signature;  // MinHash; filled by MinHasher
};

inline CorpusDocument make_document(std::string id, SourceTag source, std::string raw) {
  CorpusDocument d;
  d.id = std::move(id);
  d.source = source;
  d.normalized = normalize_document(raw);
  d.raw = std::move(raw);
  d.digest = hash::sha256_hex(d.normalized);
  return d;
}

struct DroppedDocument {
  std::string id;
  std::string reason;
};

struct FilterResult {
  std::vector<CorpusDocument> kept;
  std::vector<DroppedDocument> dropped;
};

/// Keeps the first document for each digest; empty documents are dropped.
inline FilterResult dedup_exact(std::vector<CorpusDocument> docs) {
  FilterResult r;
  std::unordered_set<std::string> seen;
  for (auto& d : docs) {
    if (d.normalized.empty()) {
      r.dropped.push_back({d.id, "empty"});
    } else if (!seen.insert(d.digest).second) {
      r.dropped.push_back({d.id, "duplicate"});
    } else {
      r.kept.push_back(std::move(d));
    }
  }
  return r;
}

}  // namespace tcmbench::corpus
