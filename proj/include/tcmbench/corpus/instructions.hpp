#pragma once

#include <functional>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "json.hpp"
#include "tcmbench/corpus/document.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/log.hpp"
#include "tcmbench/util/utf8.hpp"

namespace tcmbench::corpus {

enum class Strategy { Linguisticise, Structured, Refine };

constexpr std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::Linguisticise: return "A-linguisticise";
    case Strategy::Structured: return "B-structured";
    case Strategy::Refine: return "C-refine";
  }
  return "?";
}

inline Strategy parse_strategy(std::string_view s) {
  if (s == "A" || s == to_string(Strategy::Linguisticise)) return Strategy::Linguisticise;
  if (s == "B" || s == to_string(Strategy::Structured)) return Strategy::Structured;
  if (s == "C" || s == to_string(Strategy::Refine)) return Strategy::Refine;
  throw ValidationError("unknown strategy: " + std::string(s));
}

struct InstructionRecord {
  std::string instruction;
  std::optional<std::string> input;
  std::string output;
  Strategy strategy = Strategy::Refine;
  std::string source_id;

  friend bool operator==(const InstructionRecord&, const InstructionRecord&) = default;
};

inline nlohmann::ordered_json to_json(const InstructionRecord& r) {
  nlohmann::ordered_json j;
  j["instruction"] = r.instruction;
  if (r.input) j["input"] = *r.input;
  j["output"] = r.output;
  j["strategy"] = std::string(to_string(r.strategy));
  j["source_id"] = r.source_id;
  return j;
}

/// Strips leading and trailing whitespace, including ideographic spaces.
inline std::string trim_text(std::string_view s) {
  const auto u = utf8::decode(s);
  std::size_t b = 0, e = u.size();
  while (b < e && utf8::is_space(u[b])) ++b;
  while (e > b && utf8::is_space(u[e - 1])) --e;
  return utf8::encode(std::u32string_view(u).substr(b, e - b));
}

struct BuildResult {
  std::vector<InstructionRecord> records;
  std::vector<DroppedDocument> skipped;  // source id and reason
  std::size_t dropped_empty = 0;
  std::size_t dropped_duplicate = 0;
};

// --- strategy A -------------------------------------------------------------

/// Rewrites a knowledge snippet in conversational form. Receives the system
/// prompt and the snippet; throws on failure.
using RewriteFn = std::function<std::string(const std::string& system, const std::string& text)>;

struct RewritePrompt {
  std::string system =
      "你是一名中医药知识编辑。请将用户提供的中医知识改写为通俗、准确、口语化的讲解，"
      "不得增加原文没有的事实。只输出改写后的文本。";
  std::string instruction = "请用通俗易懂的语言讲解下面的中医知识。";
};

inline BuildResult build_linguisticised(const std::vector<CorpusDocument>& snippets,
                                        const RewriteFn& rewrite,
                                        const RewritePrompt& prompt = {}) {
  if (!rewrite) throw ConfigError("strategy A needs a rewrite endpoint");
  BuildResult r;
  for (const auto& s : snippets) {
    if (s.normalized.empty()) {
      ++r.dropped_empty;
      continue;
    }
    std::string out;
    try {
      out = trim_text(rewrite(prompt.system, s.normalized));
    } catch (const std::exception& e) {
      log::warn("rewrite failed for '" + s.id + "': " + e.what());
      r.skipped.push_back({s.id, std::string("rewrite failed: ") + e.what()});
      continue;
    }
    if (out.empty()) {
      log::warn("rewrite returned nothing for '" + s.id + "'");
      r.skipped.push_back({s.id, "rewrite returned empty text"});
      continue;
    }
    r.records.push_back({prompt.instruction, s.normalized, out, Strategy::Linguisticise, s.id});
  }
  return r;
}

// --- strategy B -------------------------------------------------------------

/// Instruction and output templates with 〈field〉 placeholders.
struct QaTemplate {
  std::string instruction;
  std::string output;
};

/// Parses the compact form "instruction/output".
inline QaTemplate parse_qa_template(std::string_view s) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) throw ValidationError("template needs 'instruction/output'");
  return {std::string(s.substr(0, slash)), std::string(s.substr(slash + 1))};
}

/// Replaces each 〈name〉 with record[name]. Returns nullopt when a field is
/// missing, empty or not a scalar.
inline std::optional<std::string> fill_template(const std::string& tpl, const nlohmann::json& record) {
  static const std::string kOpen = "〈", kClose = "〉";
  std::string out;
  std::size_t pos = 0;
  while (true) {
    const auto open = tpl.find(kOpen, pos);
    if (open == std::string::npos) break;
    const auto close = tpl.find(kClose, open + kOpen.size());
    if (close == std::string::npos) break;
    out.append(tpl, pos, open - pos);
    const auto name = tpl.substr(open + kOpen.size(), close - open - kOpen.size());
    if (!record.contains(name)) return std::nullopt;
    const auto& v = record.at(name);
    std::string text;
    if (v.is_string()) {
      text = v.get<std::string>();
    } else if (v.is_number() || v.is_boolean()) {
      text = v.dump();
    } else {
      return std::nullopt;
    }
    if (text.empty()) return std::nullopt;
    out += text;
    pos = close + kClose.size();
  }
  out.append(tpl, pos);
  return out;
}

/// Deterministic template expansion of structured records. Each record
/// should carry an "id"; otherwise its index is used.
inline BuildResult build_structured(const std::vector<nlohmann::json>& records,
                                    const std::vector<QaTemplate>& templates) {
  if (templates.empty()) throw ValidationError("strategy B needs at least one template");
  BuildResult r;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    const std::string id = rec.is_object() && rec.contains("id") && rec.at("id").is_string()
                               ? rec.at("id").get<std::string>()
                               : "#" + std::to_string(i);
    if (!rec.is_object()) {
      r.skipped.push_back({id, "not a key/value record"});
      continue;
    }
    for (const auto& t : templates) {
      auto ins = fill_template(t.instruction, rec);
      auto out = fill_template(t.output, rec);
      if (!ins || !out) {
        r.skipped.push_back({id, "missing field for template '" + t.instruction + "'"});
        continue;
      }
      r.records.push_back({*ins, std::nullopt, *out, Strategy::Structured, id});
    }
  }
  return r;
}

// --- strategy C -------------------------------------------------------------

namespace detail {

inline std::string first_string(const nlohmann::json& j, std::initializer_list<const char*> keys) {
  for (const char* k : keys)
    if (j.contains(k) && j.at(k).is_string()) return j.at(k).get<std::string>();
  return {};
}

}  // namespace detail

/// Maps heterogeneous QA records onto the instruction schema, dropping
/// records with an empty output and exact duplicates (first one wins).
inline BuildResult build_refined(const std::vector<nlohmann::json>& records) {
  BuildResult r;
  std::set<std::tuple<std::string, std::string, std::string>> seen;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (!rec.is_object()) {
      r.skipped.push_back({"#" + std::to_string(i), "not a key/value record"});
      continue;
    }
    const auto id = rec.contains("id") && rec.at("id").is_string() ? rec.at("id").get<std::string>()
                                                                    : "#" + std::to_string(i);
    InstructionRecord out;
    out.instruction = trim_text(detail::first_string(rec, {"instruction", "question", "prompt", "query"}));
    auto input = trim_text(detail::first_string(rec, {"input", "context"}));
    if (!input.empty()) out.input = input;
    out.output = trim_text(detail::first_string(rec, {"output", "answer", "response"}));
    out.strategy = Strategy::Refine;
    out.source_id = id;
    if (out.output.empty() || out.instruction.empty()) {
      ++r.dropped_empty;
      continue;
    }
    if (!seen.emplace(out.instruction, input, out.output).second) {
      ++r.dropped_duplicate;
      continue;
    }
    r.records.push_back(std::move(out));
  }
  return r;
}

}  // namespace tcmbench::corpus
