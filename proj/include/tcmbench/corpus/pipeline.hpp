#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcmbench/corpus/blocklist.hpp"
#include "tcmbench/corpus/document.hpp"
#include "tcmbench/corpus/minhash.hpp"

namespace tcmbench::corpus {

struct DedupOptions {
  double threshold = 0.9;
  std::size_t slots = 128;
  std::size_t bands = 32;
  std::uint64_t seed = 0x7cb1;
  std::optional<Blocklist> blocklist;
};

/// One dropped document and why.
struct DropRecord {
  std::string id;
  std::string stage;  // "exact", "near" or "blocklist"
  std::string reason;
  nlohmann::ordered_json detail = nlohmann::ordered_json::object();
};

struct DedupResult {
  std::vector<CorpusDocument> kept;  // input order
  std::vector<DropRecord> drops;
  std::vector<NearDuplicate> near;   // every confirmed pair among exact survivors
};

inline nlohmann::ordered_json to_json(const DropRecord& d) {
  nlohmann::ordered_json j;
  j["id"] = d.id;
  j["stage"] = d.stage;
  j["reason"] = d.reason;
  if (!d.detail.empty()) j["detail"] = d.detail;
  return j;
}

inline nlohmann::ordered_json to_json(const NearDuplicate& n) {
  nlohmann::ordered_json j;
  j["first"] = n.first;
  j["second"] = n.second;
  j["estimated"] = n.estimated;
  j["jaccard"] = n.jaccard;
  return j;
}

/// Exact dedup, then near-duplicate removal, then the optional blocklist.
/// Near-duplicates are resolved in input order: a document is dropped when
/// an earlier document that is still kept is confirmed similar to it. The
/// kept set therefore contains no confirmed pair, so a second pass over it
/// drops nothing.
inline DedupResult dedup_corpus(std::vector<CorpusDocument> docs, const DedupOptions& opt = {}) {
  DedupResult r;
  auto exact = dedup_exact(std::move(docs));
  for (const auto& d : exact.dropped) r.drops.push_back({d.id, "exact", d.reason});

  auto kept = std::move(exact.kept);
  const MinHasher hasher(opt.slots, opt.bands, opt.seed);
  for (auto& d : kept) hasher.sign(d);
  r.near = near_dup_scan(kept, opt.threshold, opt.bands);

  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < kept.size(); ++i) index[kept[i].id] = i;
  auto ordered = r.near;
  std::sort(ordered.begin(), ordered.end(), [&](const auto& a, const auto& b) {
    const auto ka = std::minmax(index.at(a.first), index.at(a.second));
    const auto kb = std::minmax(index.at(b.first), index.at(b.second));
    return ka < kb;
  });
  std::set<std::size_t> dropped;
  for (const auto& n : ordered) {
    const auto [i, j] = std::minmax(index.at(n.first), index.at(n.second));
    if (dropped.count(i) || dropped.count(j)) continue;
    dropped.insert(j);
    DropRecord d{kept[j].id, "near", "near-duplicate of " + kept[i].id};
    d.detail["of"] = kept[i].id;
    d.detail["jaccard"] = n.jaccard;
    r.drops.push_back(std::move(d));
  }
  std::vector<CorpusDocument> survivors;
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (!dropped.count(i)) survivors.push_back(std::move(kept[i]));

  if (opt.blocklist) {
    auto b = filter_blocklist(std::move(survivors), *opt.blocklist);
    for (const auto& d : b.dropped) {
      DropRecord rec{d.id, "blocklist", "blocklisted terms above rate"};
      rec.detail["hits"] = d.hits;
      rec.detail["chars"] = d.chars;
      rec.detail["terms"] = d.terms;
      r.drops.push_back(std::move(rec));
    }
    survivors = std::move(b.kept);
  }
  r.kept = std::move(survivors);
  return r;
}

}  // namespace tcmbench::corpus
