#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcmbench/corpus/document.hpp"
#include "tcmbench/corpus/instructions.hpp"

namespace tcmbench::corpus {

inline constexpr std::uint64_t kMiB = 1024ull * 1024ull;
inline constexpr std::uint64_t kGiB = 1024ull * kMiB;

struct SourceEntry {
  std::uint64_t bytes = 0;
  std::uint64_t docs = 0;
  friend bool operator==(const SourceEntry&, const SourceEntry&) = default;
};

/// Per-source sizes of the pretraining text plus the instruction count.
/// Totals are derived from the entries, so they always agree.
class CorpusManifest {
 public:
  void add(const std::string& source, std::uint64_t bytes, std::uint64_t docs) {
    auto& e = sources_[source];
    e.bytes += bytes;
    e.docs += docs;
  }
  void add_qa(std::uint64_t n) { qa_ += n; }

  const std::map<std::string, SourceEntry>& sources() const noexcept { return sources_; }
  std::uint64_t qa_count() const noexcept { return qa_; }
  std::uint64_t total_bytes() const {
    std::uint64_t t = 0;
    for (const auto& [_, e] : sources_) t += e.bytes;
    return t;
  }
  std::uint64_t total_docs() const {
    std::uint64_t t = 0;
    for (const auto& [_, e] : sources_) t += e.docs;
    return t;
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    nlohmann::ordered_json s = nlohmann::ordered_json::object();
    for (const auto& [name, e] : sources_) s[name] = {{"bytes", e.bytes}, {"docs", e.docs}};
    j["sources"] = s;
    j["total_bytes"] = total_bytes();
    j["total_docs"] = total_docs();
    j["qa_count"] = qa_;
    return j;
  }

 private:
  std::map<std::string, SourceEntry> sources_;
  std::uint64_t qa_ = 0;
};

/// Bytes are counted on normalized text.
inline CorpusManifest corpus_manifest(const std::vector<CorpusDocument>& docs,
                                      const std::vector<InstructionRecord>& records) {
  CorpusManifest m;
  for (const auto& d : docs) m.add(std::string(to_string(d.source)), d.normalized.size(), 1);
  m.add_qa(records.size());
  return m;
}

}  // namespace tcmbench::corpus
