#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "tcmbench/scenarios/kind.hpp"
#include "tcmbench/util/errors.hpp"

namespace tcmbench::scenarios {

/// One evaluation item.
///
/// `reference` holds the gold option letter (APQ), the gold label (TCMCD),
/// or the gold text (generation kinds). Entity and recommendation kinds keep
/// their gold items in `gold_items`.
struct ScenarioExample {
  std::string id;
  ScenarioKind kind = ScenarioKind::APQ;
  std::optional<std::string> system_exemplar;
  std::string question;
  std::map<char, std::string> options;
  std::string reference;
  std::vector<std::string> gold_items;
  nlohmann::json metadata;  // null or object

  friend bool operator==(const ScenarioExample&, const ScenarioExample&) = default;
};

struct ModelResponse {
  std::string text;
};

/// Throws ValidationError naming the offending field.
inline void validate_example(const ScenarioExample& ex) {
  auto fail = [&](const std::string& field, const std::string& why) {
    throw ValidationError("record '" + ex.id + "': field '" + field + "' " + why);
  };
  if (ex.id.empty()) throw ValidationError("record with empty field 'id'");
  if (ex.question.empty()) fail("question", "is empty");
  if (!ex.metadata.is_null() && !ex.metadata.is_object()) fail("metadata", "must be an object");

  const bool is_apq = ex.kind == ScenarioKind::APQ;
  if (!is_apq && !ex.options.empty()) fail("options", "only allowed for APQ");

  switch (answer_shape(ex.kind)) {
    case AnswerShape::OptionLetter: {
      if (ex.options.size() < 2 || ex.options.size() > 5)
        fail("options", "must hold 2 to 5 choices");
      for (const auto& [letter, text] : ex.options) {
        if (letter < 'A' || letter > 'E') fail("options", "letters must be A-E");
        if (text.empty()) fail("options", std::string("choice ") + letter + " is empty");
      }
      if (ex.reference.size() != 1 || !ex.options.count(ex.reference[0]))
        fail("reference", "gold letter '" + ex.reference + "' is not among the options");
      break;
    }
    case AnswerShape::Label:
    case AnswerShape::FreeText:
      if (ex.reference.empty()) fail("reference", "is empty");
      break;
    case AnswerShape::EntitySet:
      for (const auto& g : ex.gold_items)
        if (g.empty()) fail("gold_items", "contains an empty item");
      break;
    case AnswerShape::RankedItems:
      if (ex.gold_items.empty()) fail("gold_items", "must be nonempty");
      for (const auto& g : ex.gold_items)
        if (g.empty()) fail("gold_items", "contains an empty item");
      break;
  }
}

}  // namespace tcmbench::scenarios
