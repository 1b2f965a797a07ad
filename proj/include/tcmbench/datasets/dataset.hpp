#pragma once

// Line-delimited dataset files and their sidecar manifests.
//
// One JSON object per line with keys, in canonical order:
//   id, kind, question, options?, reference, gold_items?, system_exemplar?, metadata?
// `reference` may be a list for entity and recommendation kinds, in which
// case it is read as the gold item list.

#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "tcmbench/scenarios/example.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/fs.hpp"
#include "tcmbench/util/hash.hpp"
#include "tcmbench/util/utf8.hpp"

namespace tcmbench::datasets {

namespace fs = std::filesystem;
using scenarios::ScenarioExample;
using scenarios::ScenarioKind;

struct Manifest {
  std::optional<ScenarioKind> kind;
  std::size_t count = 0;
  std::size_t total_chars = 0;
  std::string digest;  // sha256 of the file bytes

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

struct DatasetFile {
  fs::path path;
  std::optional<ScenarioKind> kind;  // unset only for an empty file
  std::vector<ScenarioExample> records;
  Manifest manifest;                   // computed from the file
  std::optional<Manifest> declared;    // read from the sidecar, if present
};

inline fs::path manifest_path(const fs::path& data) {
  auto p = data;
  p += ".manifest.json";
  return p;
}

/// Characters counted toward the manifest: question, options and reference.
inline std::size_t record_chars(const ScenarioExample& ex) {
  std::size_t n = utf8::length(ex.question) + utf8::length(ex.reference);
  for (const auto& [_, text] : ex.options) n += utf8::length(text);
  for (const auto& g : ex.gold_items) n += utf8::length(g);
  return n;
}

inline nlohmann::ordered_json to_json(const Manifest& m) {
  nlohmann::ordered_json j;
  j["kind"] = m.kind ? nlohmann::ordered_json(std::string(scenarios::to_string(*m.kind)))
                     : nlohmann::ordered_json(nullptr);
  j["count"] = m.count;
  j["total_chars"] = m.total_chars;
  j["digest"] = m.digest;
  return j;
}

inline Manifest manifest_from_json(const nlohmann::json& j) {
  Manifest m;
  if (j.contains("kind") && !j.at("kind").is_null())
    m.kind = scenarios::parse_kind(j.at("kind").get<std::string>());
  m.count = j.at("count").get<std::size_t>();
  m.total_chars = j.value("total_chars", std::size_t{0});
  m.digest = j.value("digest", std::string());
  return m;
}

namespace detail {

inline std::string field_error(std::size_t line, const std::string& field, const std::string& why) {
  return "line " + std::to_string(line) + ": field '" + field + "' " + why;
}

inline ScenarioExample record_from_json(const nlohmann::json& j, std::size_t line) {
  if (!j.is_object()) throw ValidationError("line " + std::to_string(line) + ": not an object");
  auto str = [&](const char* key, bool required) -> std::optional<std::string> {
    if (!j.contains(key)) {
      if (required) throw ValidationError(field_error(line, key, "is missing"));
      return std::nullopt;
    }
    if (!j.at(key).is_string()) throw ValidationError(field_error(line, key, "must be a string"));
    return j.at(key).get<std::string>();
  };
  auto string_list = [&](const nlohmann::json& v, const char* key) {
    if (!v.is_array()) throw ValidationError(field_error(line, key, "must be a list"));
    std::vector<std::string> out;
    for (const auto& e : v) {
      if (!e.is_string()) throw ValidationError(field_error(line, key, "must hold strings"));
      out.push_back(e.get<std::string>());
    }
    return out;
  };

  ScenarioExample ex;
  ex.id = *str("id", true);
  const auto kind = *str("kind", true);
  auto parsed = scenarios::try_parse_kind(kind);
  if (!parsed) throw ValidationError(field_error(line, "kind", "has unknown value '" + kind + "'"));
  ex.kind = *parsed;
  ex.question = *str("question", true);
  if (!j.contains("reference")) throw ValidationError(field_error(line, "reference", "is missing"));
  if (j.at("reference").is_array()) {
    ex.gold_items = string_list(j.at("reference"), "reference");
  } else {
    ex.reference = *str("reference", true);
  }
  if (j.contains("options")) {
    const auto& o = j.at("options");
    if (!o.is_object()) throw ValidationError(field_error(line, "options", "must be an object"));
    for (const auto& [letter, text] : o.items()) {
      if (letter.size() != 1 || !text.is_string())
        throw ValidationError(field_error(line, "options", "must map single letters to text"));
      ex.options[letter[0]] = text.get<std::string>();
    }
  }
  if (j.contains("gold_items")) {
    auto items = string_list(j.at("gold_items"), "gold_items");
    ex.gold_items.insert(ex.gold_items.end(), items.begin(), items.end());
  }
  if (auto s = str("system_exemplar", false)) ex.system_exemplar = *s;
  if (j.contains("metadata")) {
    ex.metadata = j.at("metadata");
    if (!ex.metadata.is_object())
      throw ValidationError(field_error(line, "metadata", "must be an object"));
    if (ex.metadata.contains("source") && !ex.metadata.at("source").is_string())
      throw ValidationError(field_error(line, "metadata.source", "must be a string"));
  }
  try {
    scenarios::validate_example(ex);
  } catch (const ValidationError& e) {
    throw ValidationError("line " + std::to_string(line) + ": " + e.what());
  }
  return ex;
}

}  // namespace detail

inline nlohmann::ordered_json record_to_json(const ScenarioExample& ex) {
  nlohmann::ordered_json j;
  j["id"] = ex.id;
  j["kind"] = std::string(scenarios::to_string(ex.kind));
  j["question"] = ex.question;
  if (!ex.options.empty()) {
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (const auto& [letter, text] : ex.options) o[std::string(1, letter)] = text;
    j["options"] = o;
  }
  j["reference"] = ex.reference;
  if (!ex.gold_items.empty()) j["gold_items"] = ex.gold_items;
  if (ex.system_exemplar) j["system_exemplar"] = *ex.system_exemplar;
  if (!ex.metadata.is_null()) j["metadata"] = nlohmann::ordered_json::parse(ex.metadata.dump());
  return j;
}

/// Serializes records in canonical form, one per line.
inline std::string serialize_records(const std::vector<ScenarioExample>& records) {
  std::string out;
  for (const auto& r : records) {
    out += record_to_json(r).dump(-1, ' ', false, nlohmann::json::error_handler_t::strict);
    out += '\n';
  }
  return out;
}

inline Manifest compute_manifest(const std::vector<ScenarioExample>& records,
                                 std::string_view bytes) {
  Manifest m;
  m.count = records.size();
  if (!records.empty()) m.kind = records.front().kind;
  for (const auto& r : records) m.total_chars += record_chars(r);
  m.digest = hash::sha256_hex(bytes);
  return m;
}

/// Parses dataset text. Errors name the line, and the field for schema
/// violations; a duplicated id cites both lines.
inline DatasetFile parse_dataset(std::string_view text, const fs::path& origin = {}) {
  DatasetFile out;
  out.path = origin;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 0;
  std::size_t start = 0;
  const std::string prefix = origin.empty() ? std::string() : origin.string() + ": ";
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    start = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(prefix + "line " + std::to_string(line_no) + ": malformed record (" +
                            e.what() + ")");
    }
    ScenarioExample ex;
    try {
      ex = detail::record_from_json(j, line_no);
    } catch (const ValidationError& e) {
      throw ValidationError(prefix + e.what());
    }
    if (auto [it, fresh] = seen.emplace(ex.id, line_no); !fresh)
      throw ValidationError(prefix + "duplicate id '" + ex.id + "' on lines " +
                            std::to_string(it->second) + " and " + std::to_string(line_no));
    if (out.kind && *out.kind != ex.kind)
      throw ValidationError(prefix + "line " + std::to_string(line_no) + ": field 'kind' is " +
                            std::string(scenarios::to_string(ex.kind)) + " but the file holds " +
                            std::string(scenarios::to_string(*out.kind)));
    out.kind = ex.kind;
    out.records.push_back(std::move(ex));
  }
  out.manifest = compute_manifest(out.records, text);
  return out;
}

/// Loads a dataset file and, when present, its sidecar manifest.
inline DatasetFile load_dataset(const fs::path& path) {
  const auto bytes = fsutil::read_file(path);
  auto ds = parse_dataset(bytes, path);
  const auto mp = manifest_path(path);
  if (fs::exists(mp)) {
    try {
      ds.declared = manifest_from_json(nlohmann::json::parse(fsutil::read_file(mp)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(mp.string() + ": malformed manifest (" + e.what() + ")");
    }
  }
  return ds;
}

/// Writes records canonically plus a fresh sidecar manifest.
inline Manifest save_dataset(const fs::path& path, const std::vector<ScenarioExample>& records) {
  for (const auto& r : records) scenarios::validate_example(r);
  const auto text = serialize_records(records);
  fsutil::write_atomic(path, text);
  auto m = compute_manifest(records, text);
  fsutil::write_atomic(manifest_path(path), to_json(m).dump(2) + "\n");
  return m;
}

struct DatasetStats {
  std::size_t records = 0;
  std::size_t total_chars = 0;
  std::map<std::string, std::size_t> per_kind;
  std::map<std::string, std::size_t> per_source;  // metadata.source, "" when absent
};

/// Summarizes a loaded dataset, checking it against its declared manifest.
inline DatasetStats dataset_stats(const DatasetFile& ds) {
  if (ds.declared) {
    const auto& d = *ds.declared;
    if (d.count != ds.manifest.count)
      throw ValidationError(ds.path.string() + ": manifest declares " + std::to_string(d.count) +
                            " records but the file has " + std::to_string(ds.manifest.count));
    if (!d.digest.empty() && d.digest != ds.manifest.digest)
      throw ValidationError(ds.path.string() + ": manifest digest does not match file contents");
    if (d.kind && ds.kind && *d.kind != *ds.kind)
      throw ValidationError(ds.path.string() + ": manifest kind does not match records");
  }
  DatasetStats s;
  s.records = ds.records.size();
  for (const auto& r : ds.records) {
    s.total_chars += record_chars(r);
    ++s.per_kind[std::string(scenarios::to_string(r.kind))];
    std::string src;
    if (r.metadata.is_object() && r.metadata.contains("source"))
      src = r.metadata.at("source").get<std::string>();
    ++s.per_source[src];
  }
  return s;
}

}  // namespace tcmbench::datasets
