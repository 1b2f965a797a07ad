#pragma once

#include <algorithm>
#include <cstdint>
#include <utility>
#include <vector>

#include "tcmbench/scenarios/example.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/hash.hpp"

namespace tcmbench::datasets {

struct SplitSpec {
  std::uint64_t seed = 0;
  std::size_t test_count = 0;
};

struct Split {
  std::vector<scenarios::ScenarioExample> train;
  std::vector<scenarios::ScenarioExample> test;
};

/// Seeded shuffle keyed by record id: the outcome depends only on the seed
/// and the set of ids, never on input order. Each split is sorted by id.
inline Split split_sample(std::vector<scenarios::ScenarioExample> records, const SplitSpec& spec) {
  if (spec.test_count > records.size())
    throw ValidationError("test_count " + std::to_string(spec.test_count) + " exceeds " +
                          std::to_string(records.size()) + " records");
  auto key = [&](const scenarios::ScenarioExample& r) {
    return hash::splitmix64(hash::fnv1a64(r.id) ^ spec.seed);
  };
  std::sort(records.begin(), records.end(), [&](const auto& a, const auto& b) {
    const auto ka = key(a), kb = key(b);
    return ka != kb ? ka < kb : a.id < b.id;
  });
  Split out;
  const auto cut = records.begin() + static_cast<std::ptrdiff_t>(spec.test_count);
  out.test.assign(std::make_move_iterator(records.begin()), std::make_move_iterator(cut));
  out.train.assign(std::make_move_iterator(cut), std::make_move_iterator(records.end()));
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(out.train.begin(), out.train.end(), by_id);
  std::sort(out.test.begin(), out.test.end(), by_id);
  return out;
}

}  // namespace tcmbench::datasets
