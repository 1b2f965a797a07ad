#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcmbench/metrics.hpp"
#include "tcmbench/scenarios/embedding.hpp"
#include "tcmbench/scenarios/example.hpp"
#include "tcmbench/scenarios/kind.hpp"
#include "tcmbench/scenarios/parse.hpp"

namespace tcmbench::scenarios {

struct ItemScore {
  std::string id;
  std::string parse_rule;
  bool parse_failed = false;
  std::vector<std::pair<std::string, double>> metrics;  // suite order
};

/// Per-scenario aggregate; metric values are per-item means.
struct MetricReport {
  ScenarioKind kind = ScenarioKind::APQ;
  std::size_t item_count = 0;
  std::size_t parse_failures = 0;
  double parse_failure_rate = 0.0;
  std::vector<std::pair<std::string, double>> metrics;  // suite order
  std::vector<ItemScore> items;

  double metric(std::string_view name) const {
    for (const auto& [k, v] : metrics)
      if (k == name) return v;
    throw ValidationError("metric not in report: " + std::string(name));
  }
};

using EvalItem = std::pair<ScenarioExample, ModelResponse>;

/// Parse a raw response according to the scenario's answer shape.
inline ParsedAnswer parse_response(ScenarioKind kind, std::string_view raw) {
  const auto text = strip_reasoning_markup(raw);
  switch (answer_shape(kind)) {
    case AnswerShape::OptionLetter: return extract_option_letter(text);
    case AnswerShape::Label: return extract_label(text);
    case AnswerShape::EntitySet: return parse_item_list(text, false);
    case AnswerShape::RankedItems: return parse_item_list(text, true);
    case AnswerShape::FreeText:
      if (text.empty()) return {ParseFailure{"empty response"}, "empty-text"};
      return {FreeText{text}, "free-text"};
  }
  return {ParseFailure{"unknown kind"}, "unknown"};
}

namespace detail {

inline std::set<std::string> normalized_gold(const ScenarioExample& ex) {
  std::set<std::string> out;
  for (const auto& g : ex.gold_items) {
    auto n = normalize_item(g);
    if (!n.empty()) out.insert(std::move(n));
  }
  return out;
}

inline std::vector<std::pair<std::string, double>> zeros(ScenarioKind kind) {
  std::vector<std::pair<std::string, double>> out;
  for (const auto& m : metric_suite_for(kind)) out.emplace_back(m, 0.0);
  return out;
}

}  // namespace detail

/// Scores every (example, response) pair with the kind's metric suite.
/// Parse failures score 0 on every metric of their item.
inline MetricReport evaluate_scenario(ScenarioKind kind, std::span<const EvalItem> items,
                                      EmbeddingProvider* embedder = nullptr) {
  const auto& suite = metric_suite_for(kind);
  const bool needs_embedder =
      std::find(suite.begin(), suite.end(), "bertscore") != suite.end();
  if (needs_embedder && embedder == nullptr)
    throw ValidationError(std::string("scenario ") + std::string(to_string(kind)) +
                          " needs an embedding provider for bertscore");
  for (const auto& [ex, _] : items) {
    if (ex.kind != kind)
      throw ValidationError("item '" + ex.id + "' has kind " + std::string(to_string(ex.kind)) +
                            ", expected " + std::string(to_string(kind)));
  }

  MetricReport report;
  report.kind = kind;
  report.item_count = items.size();

  std::vector<ParsedAnswer> parsed;
  parsed.reserve(items.size());
  for (const auto& [ex, resp] : items) parsed.push_back(parse_response(kind, resp.text));

  // Embeddings for generation scenarios are fetched in one batch.
  std::vector<metrics::EmbeddingMatrix> cand_emb, ref_emb;
  if (needs_embedder) {
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (const auto* ft = parsed[i].as<FreeText>()) {
        texts.push_back(ft->text);
        texts.push_back(items[i].first.reference);
      }
    }
    if (!texts.empty()) {
      auto all = embedder->embed(texts);
      if (all.size() != texts.size())
        throw ValidationError("embedding provider returned wrong number of matrices");
      for (std::size_t k = 0; k < all.size(); k += 2) {
        cand_emb.push_back(std::move(all[k]));
        ref_emb.push_back(std::move(all[k + 1]));
      }
    }
  }

  std::vector<metrics::LabelPair> label_pairs;
  std::size_t emb_index = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& ex = items[i].first;
    const auto& ans = parsed[i];
    ItemScore score{ex.id, ans.rule, ans.failed(), detail::zeros(kind)};
    auto set = [&](const std::string& name, double v) {
      for (auto& [k, val] : score.metrics)
        if (k == name) val = v;
    };

    switch (answer_shape(kind)) {
      case AnswerShape::OptionLetter: {
        const auto* l = ans.as<OptionLetter>();
        std::string pred = l ? std::string(1, l->letter) : std::string();
        label_pairs.emplace_back(pred, ex.reference);
        set("accuracy", pred == ex.reference ? 1.0 : 0.0);
        break;
      }
      case AnswerShape::Label: {
        const auto* l = ans.as<Label>();
        std::string pred = l ? l->text : std::string();
        std::string gold = normalize_label(ex.reference);
        label_pairs.emplace_back(pred, gold);
        set("accuracy", pred == gold ? 1.0 : 0.0);
        break;
      }
      case AnswerShape::EntitySet: {
        if (const auto* es = ans.as<EntitySet>()) {
          const auto prf = metrics::prf_sets(es->items, detail::normalized_gold(ex));
          set("precision", prf.precision);
          set("recall", prf.recall);
          set("f1", prf.f1);
        }
        break;
      }
      case AnswerShape::RankedItems: {
        const auto gold = detail::normalized_gold(ex);
        if (gold.empty()) throw ValidationError("item '" + ex.id + "' has no usable gold items");
        if (const auto* ri = ans.as<RankedItems>()) {
          metrics::RankingQuery q{metrics::RankedList(ri->items), metrics::RelevanceSet(gold)};
          const auto topk = metrics::topk_metrics(q, 3);
          set("mrr", metrics::reciprocal_rank(q));
          set("p@3", topk.precision);
          set("r@3", topk.recall);
          set("hr@3", topk.hit_rate);
          set("ndcg", metrics::ndcg(q));
          set("accuracy", gold.count(ri->items.front()) ? 1.0 : 0.0);
        }
        break;
      }
      case AnswerShape::FreeText: {
        if (const auto* ft = ans.as<FreeText>()) {
          const auto cand = metrics::tokenize(ft->text);
          const auto ref = metrics::tokenize(ex.reference);
          set("bleu-1", metrics::bleu(cand, ref, metrics::BleuParams::uniform(1)).value);
          set("bleu-4", metrics::bleu(cand, ref, metrics::BleuParams::uniform(4)).value);
          set("rouge-1", metrics::rouge_n(cand, ref, 1).value);
          set("rouge-2", metrics::rouge_n(cand, ref, 2).value);
          set("rouge-l", metrics::rouge_l(cand, ref).value);
          set("meteor", metrics::meteor(cand, ref).value);
          const auto& ce = cand_emb[emb_index];
          const auto& re = ref_emb[emb_index];
          ++emb_index;
          if (!ce.empty() && !re.empty()) set("bertscore", metrics::bert_score(ce, re).f1);
        }
        break;
      }
    }
    if (score.parse_failed) ++report.parse_failures;
    report.items.push_back(std::move(score));
  }

  report.metrics = detail::zeros(kind);
  if (!items.empty()) {
    for (auto& [name, value] : report.metrics) {
      if (name == "accuracy" && !label_pairs.empty()) {
        value = metrics::accuracy(label_pairs);
        continue;
      }
      double sum = 0.0;
      for (const auto& it : report.items)
        for (const auto& [k, v] : it.metrics)
          if (k == name) sum += v;
      value = sum / static_cast<double>(items.size());
    }
    report.parse_failure_rate =
        static_cast<double>(report.parse_failures) / static_cast<double>(items.size());
  }
  return report;
}

inline nlohmann::ordered_json metrics_to_json(const std::vector<std::pair<std::string, double>>& m) {
  nlohmann::ordered_json out = nlohmann::ordered_json::object();
  for (const auto& [k, v] : m) out[k] = v;
  return out;
}

inline nlohmann::ordered_json to_json(const MetricReport& r) {
  nlohmann::ordered_json j;
  j["scenario"] = std::string(to_string(r.kind));
  j["items"] = r.item_count;
  j["parse_failures"] = r.parse_failures;
  j["parse_failure_rate"] = r.parse_failure_rate;
  j["metrics"] = metrics_to_json(r.metrics);
  return j;
}

inline nlohmann::ordered_json to_json(const ItemScore& s) {
  nlohmann::ordered_json j;
  j["id"] = s.id;
  j["parse_rule"] = s.parse_rule;
  j["parse_failed"] = s.parse_failed;
  j["metrics"] = metrics_to_json(s.metrics);
  return j;
}

}  // namespace tcmbench::scenarios
