#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "tcmbench/util/errors.hpp"

namespace tcmbench::scenarios {

/// The twelve benchmark task families.
enum class ScenarioKind {
  APQ,     // single-choice answer prediction
  TCMCD,   // case diagnosis (syndrome label)
  TCMEE,   // entity extraction
  HFR,     // herb / formula recommendation
  APR,     // acupuncture point recommendation
  HCCA,    // herbal chemical composition analysis
  GCPMI,   // patent medicine instruction generation
  DHPE,    // herbal pharmacological effect description
  TCMKQA,  // knowledge question answering
  TCMRC,   // reading comprehension
  TLAW,    // topic-led abstract writing
  ADTG,    // abstract-driven topic generation
};

inline constexpr std::array<ScenarioKind, 12> kAllKinds{
    ScenarioKind::APQ,   ScenarioKind::TCMCD,  ScenarioKind::TCMEE, ScenarioKind::HFR,
    ScenarioKind::APR,   ScenarioKind::HCCA,   ScenarioKind::GCPMI, ScenarioKind::DHPE,
    ScenarioKind::TCMKQA, ScenarioKind::TCMRC, ScenarioKind::TLAW,  ScenarioKind::ADTG};

constexpr std::string_view to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::APQ: return "APQ";
    case ScenarioKind::TCMCD: return "TCMCD";
    case ScenarioKind::TCMEE: return "TCMEE";
    case ScenarioKind::HFR: return "HFR";
    case ScenarioKind::APR: return "APR";
    case ScenarioKind::HCCA: return "HCCA";
    case ScenarioKind::GCPMI: return "GCPMI";
    case ScenarioKind::DHPE: return "DHPE";
    case ScenarioKind::TCMKQA: return "TCMKQA";
    case ScenarioKind::TCMRC: return "TCMRC";
    case ScenarioKind::TLAW: return "TLAW";
    case ScenarioKind::ADTG: return "ADTG";
  }
  return "?";
}

inline std::optional<ScenarioKind> try_parse_kind(std::string_view s) {
  for (auto k : kAllKinds)
    if (to_string(k) == s) return k;
  return std::nullopt;
}

inline ScenarioKind parse_kind(std::string_view s) {
  if (auto k = try_parse_kind(s)) return *k;
  throw ValidationError("unknown scenario kind: " + std::string(s));
}

enum class AnswerShape { OptionLetter, Label, EntitySet, RankedItems, FreeText };

constexpr AnswerShape answer_shape(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::APQ: return AnswerShape::OptionLetter;
    case ScenarioKind::TCMCD: return AnswerShape::Label;
    case ScenarioKind::TCMEE: return AnswerShape::EntitySet;
    case ScenarioKind::HFR:
    case ScenarioKind::APR: return AnswerShape::RankedItems;
    default: return AnswerShape::FreeText;
  }
}

/// Metric identifiers reported for each scenario, in report order.
inline const std::vector<std::string>& metric_suite_for(ScenarioKind k) {
  static const std::vector<std::string> kAccuracy{"accuracy"};
  static const std::vector<std::string> kPrf{"precision", "recall", "f1"};
  static const std::vector<std::string> kRecommend{"mrr", "p@3", "r@3", "hr@3", "ndcg"};
  static const std::vector<std::string> kAcupoint{"mrr", "p@3",  "r@3",
                                                  "hr@3", "ndcg", "accuracy"};
  static const std::vector<std::string> kGeneration{
      "bleu-1", "bleu-4", "bertscore", "rouge-1", "rouge-2", "rouge-l", "meteor"};
  switch (answer_shape(k)) {
    case AnswerShape::OptionLetter:
    case AnswerShape::Label: return kAccuracy;
    case AnswerShape::EntitySet: return kPrf;
    case AnswerShape::RankedItems:
      return k == ScenarioKind::APR ? kAcupoint : kRecommend;
    case AnswerShape::FreeText: return kGeneration;
  }
  return kAccuracy;
}

/// Size of each published test set.
constexpr std::size_t reference_test_size(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::APQ: return 2000;
    case ScenarioKind::TCMCD: return 500;
    case ScenarioKind::TCMEE: return 480;
    case ScenarioKind::HFR: return 500;
    case ScenarioKind::APR: return 350;
    case ScenarioKind::HCCA: return 437;
    case ScenarioKind::GCPMI: return 566;
    case ScenarioKind::DHPE: return 437;
    case ScenarioKind::TCMKQA: return 500;
    case ScenarioKind::TCMRC: return 500;
    case ScenarioKind::TLAW: return 1000;
    case ScenarioKind::ADTG: return 1000;
  }
  return 0;
}

}  // namespace tcmbench::scenarios
