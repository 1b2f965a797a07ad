#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "json.hpp"
#include "tcmbench/modelclient/types.hpp"
#include "tcmbench/scenarios/example.hpp"
#include "tcmbench/scenarios/kind.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/fs.hpp"

namespace tcmbench::modelclient {

/// System and user templates for one scenario kind. Placeholders:
/// {exemplar} in `system`; {question} and {options} in `user`.
struct PromptTemplate {
  std::string system;
  std::string user = "{question}";
  std::string exemplar;  // used when the example carries none
};

struct DecodeParams {
  double temperature = 0.0;
  int max_tokens = 4096;
};

class TemplateSet {
 public:
  void set(scenarios::ScenarioKind k, PromptTemplate t) { templates_[k] = std::move(t); }

  const PromptTemplate& at(scenarios::ScenarioKind k) const {
    auto it = templates_.find(k);
    if (it == templates_.end())
      throw ConfigError("no prompt template for scenario " + std::string(scenarios::to_string(k)));
    return it->second;
  }

  bool contains(scenarios::ScenarioKind k) const { return templates_.count(k) != 0; }

  /// Overrides entries from a JSON object keyed by kind:
  ///   {"APQ": {"system": "...", "user": "...", "exemplar": "..."}}
  /// Missing fields keep their current value.
  void merge_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("templates must be an object keyed by scenario kind");
    for (const auto& [key, v] : j.items()) {
      const auto kind = scenarios::try_parse_kind(key);
      if (!kind) throw ConfigError("templates: unknown scenario kind '" + key + "'");
      PromptTemplate t = contains(*kind) ? at(*kind) : PromptTemplate{};
      t.system = v.value("system", t.system);
      t.user = v.value("user", t.user);
      t.exemplar = v.value("exemplar", t.exemplar);
      set(*kind, std::move(t));
    }
  }

 private:
  std::map<scenarios::ScenarioKind, PromptTemplate> templates_;
};

/// Built-in Chinese templates, one exemplar per kind.
inline TemplateSet default_templates() {
  using K = scenarios::ScenarioKind;
  TemplateSet s;
  const std::string role = "你是一名中医药专家。";
  const std::string example = "\n示例：\n{exemplar}";
  s.set(K::APQ, {role + "请回答单项选择题，只输出正确选项的字母（A、B、C、D或E）。" + example,
                 "{question}\n{options}",
                 "问题：下列哪味药具有大补元气的功效？\nA. 人参\nB. 黄连\nC. 大黄\nD. 芒硝\n答案：A"});
  s.set(K::TCMCD, {role + "请根据病例给出中医证型，只输出证型名称。" + example, "{question}",
                   "病例：胁肋胀痛，情志抑郁，纳少便溏，舌淡苔白，脉弦细。\n证型：肝郁脾虚"});
  s.set(K::TCMEE, {role + "请从文本中抽取中医药实体，用顿号分隔输出。" + example, "{question}",
                   "文本：方用黄芪、当归补气养血。\n实体：黄芪、当归"});
  s.set(K::HFR, {role + "请推荐中药或方剂，按推荐程度从高到低用顿号分隔列出。" + example,
                 "{question}", "问题：气虚乏力，推荐中药。\n推荐：人参、黄芪、白术"});
  s.set(K::APR, {role + "请推荐针灸穴位，按推荐程度从高到低用顿号分隔列出。" + example,
                 "{question}", "问题：胃痛，推荐穴位。\n推荐：中脘、足三里、内关"});
  s.set(K::HCCA, {role + "请分析中药的化学成分。" + example, "{question}",
                  "问题：甘草的主要化学成分有哪些？\n回答：甘草含甘草酸、甘草次酸及黄酮类成分。"});
  s.set(K::GCPMI, {role + "请为中成药撰写说明书内容。" + example, "{question}",
                   "问题：请写出六味地黄丸的功能主治。\n回答：滋阴补肾。用于肾阴亏损，头晕耳鸣，腰膝酸软。"});
  s.set(K::DHPE, {role + "请描述中药的药理作用。" + example, "{question}",
                  "问题：黄芪有哪些药理作用？\n回答：黄芪具有增强免疫、抗疲劳、保护心肌等作用。"});
  s.set(K::TCMKQA, {role + "请回答中医药知识问题。" + example, "{question}",
                    "问题：四君子汤由哪些药物组成？\n回答：人参、白术、茯苓、甘草。"});
  s.set(K::TCMRC, {role + "请阅读材料并回答问题。" + example, "{question}",
                   "材料：人参味甘微苦，性微温。问题：人参的药性如何？\n回答：性微温。"});
  s.set(K::TLAW, {role + "请根据给定主题撰写学术论文摘要。" + example,
                  "请根据以下主题撰写一篇学术论文摘要：\n{question}",
                  "主题：针刺治疗失眠的临床研究\n摘要：目的 观察针刺治疗失眠的疗效。方法 ……"});
  s.set(K::ADTG, {role + "请根据论文摘要拟定论文题目。" + example,
                  "请根据以下摘要拟定论文题目：\n{question}",
                  "摘要：目的 观察针刺治疗失眠的疗效。……\n题目：针刺治疗失眠的临床研究"});
  return s;
}

inline TemplateSet load_templates(const std::filesystem::path& path) {
  auto s = default_templates();
  try {
    s.merge_json(nlohmann::json::parse(fsutil::read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return s;
}

namespace detail {

/// Single pass over `tpl`, so substituted text is never rescanned.
inline std::string fill(const std::string& tpl, const std::map<std::string, std::string>& values) {
  std::string out;
  std::size_t pos = 0;
  while (pos < tpl.size()) {
    const auto open = tpl.find('{', pos);
    if (open == std::string::npos) break;
    const auto close = tpl.find('}', open);
    if (close == std::string::npos) break;
    auto it = values.find(tpl.substr(open + 1, close - open - 1));
    out.append(tpl, pos, open - pos);
    if (it != values.end()) {
      out += it->second;
      pos = close + 1;
    } else {
      out += '{';
      pos = open + 1;
    }
  }
  out.append(tpl, pos);
  return out;
}

}  // namespace detail

/// System message from the kind's template and exemplar, user message from
/// the question (plus "A. ..." lines for APQ).
inline ChatRequest render_prompt(const scenarios::ScenarioExample& ex, const TemplateSet& templates,
                                 const DecodeParams& decode = {}) {
  const auto& t = templates.at(ex.kind);
  std::string options;
  for (const auto& [letter, text] : ex.options) {
    if (!options.empty()) options += '\n';
    options += std::string(1, letter) + ". " + text;
  }
  const std::string exemplar = ex.system_exemplar ? *ex.system_exemplar : t.exemplar;
  ChatRequest r;
  r.temperature = decode.temperature;
  r.max_tokens = decode.max_tokens;
  const auto system = detail::fill(t.system, {{"exemplar", exemplar}});
  if (!system.empty()) r.messages.push_back({Role::System, system});
  r.messages.push_back(
      {Role::User, detail::fill(t.user, {{"question", ex.question}, {"options", options}})});
  r.validate();
  return r;
}

}  // namespace tcmbench::modelclient
