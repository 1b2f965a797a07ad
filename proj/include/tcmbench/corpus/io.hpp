#pragma once

#include <algorithm>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcmbench/corpus/document.hpp"
#include "tcmbench/corpus/instructions.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/fs.hpp"

namespace tcmbench::corpus {

namespace fs = std::filesystem;

/// Reads every regular file under `dir` as one document, in path order.
/// Ids are paths relative to `dir`. A top-level directory named after a
/// source tag ("books", "literature", "public-dataset") sets the source;
/// other files get `fallback`.
inline std::vector<CorpusDocument> load_documents(const fs::path& dir,
                                                  SourceTag fallback = SourceTag::PublicDataset) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  std::vector<CorpusDocument> docs;
  for (const auto& f : files) {
    const auto rel = fs::relative(f, dir);
    auto source = fallback;
    if (std::distance(rel.begin(), rel.end()) > 1)
      if (auto s = try_parse_source(rel.begin()->string())) source = *s;
    docs.push_back(make_document(rel.generic_string(), source, fsutil::read_file(f)));
  }
  return docs;
}

/// Reads a file of one JSON object per line; blank lines are skipped.
inline std::vector<nlohmann::json> read_jsonl(const fs::path& path) {
  std::istringstream in(fsutil::read_file(path));
  std::vector<nlohmann::json> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(nlohmann::json::parse(line));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(path.string() + ": line " + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

template <class Range, class ToJson>
std::string to_jsonl(const Range& items, ToJson&& f) {
  std::string out;
  for (const auto& it : items) {
    out += f(it).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

}  // namespace tcmbench::corpus
