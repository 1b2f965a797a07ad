#include <gtest/gtest.h>

#include <random>

#include "tcmbench/scenarios.hpp"

using namespace tcmbench::scenarios;
using tcmbench::ValidationError;

namespace {

ScenarioExample make(ScenarioKind kind, std::string id) {
  ScenarioExample ex;
  ex.id = std::move(id);
  ex.kind = kind;
  ex.question = "问题";
  return ex;
}

ScenarioExample apq(std::string id, std::string gold) {
  auto ex = make(ScenarioKind::APQ, std::move(id));
  ex.options = {{'A', "甲"}, {'B', "乙"}, {'C', "丙"}, {'D', "丁"}};
  ex.reference = std::move(gold);
  return ex;
}

ScenarioExample with_gold(ScenarioKind kind, std::string id, std::vector<std::string> gold) {
  auto ex = make(kind, std::move(id));
  ex.gold_items = std::move(gold);
  return ex;
}

ScenarioExample with_ref(ScenarioKind kind, std::string id, std::string ref) {
  auto ex = make(kind, std::move(id));
  ex.reference = std::move(ref);
  return ex;
}

std::vector<std::string> ranked(const ParsedAnswer& a) {
  const auto* r = a.as<RankedItems>();
  return r ? r->items : std::vector<std::string>{};
}

}  // namespace

// --- kinds and suites -----------------------------------------------------

TEST(Kind, RoundTripsAllTwelve) {
  EXPECT_EQ(kAllKinds.size(), 12u);
  for (auto k : kAllKinds) EXPECT_EQ(parse_kind(to_string(k)), k);
  EXPECT_THROW(parse_kind("XYZ"), ValidationError);
}

TEST(Kind, SuiteTable) {
  using V = std::vector<std::string>;
  EXPECT_EQ(metric_suite_for(ScenarioKind::APQ), V{"accuracy"});
  EXPECT_EQ(metric_suite_for(ScenarioKind::TCMCD), V{"accuracy"});
  EXPECT_EQ(metric_suite_for(ScenarioKind::TCMEE), (V{"precision", "recall", "f1"}));
  EXPECT_EQ(metric_suite_for(ScenarioKind::HFR), (V{"mrr", "p@3", "r@3", "hr@3", "ndcg"}));
  EXPECT_EQ(metric_suite_for(ScenarioKind::APR),
            (V{"mrr", "p@3", "r@3", "hr@3", "ndcg", "accuracy"}));
  const V gen{"bleu-1", "bleu-4", "bertscore", "rouge-1", "rouge-2", "rouge-l", "meteor"};
  for (auto k : {ScenarioKind::HCCA, ScenarioKind::GCPMI, ScenarioKind::DHPE,
                 ScenarioKind::TCMKQA, ScenarioKind::TCMRC, ScenarioKind::TLAW,
                 ScenarioKind::ADTG})
    EXPECT_EQ(metric_suite_for(k), gen) << to_string(k);
}

TEST(Kind, ReferenceSizes) {
  std::size_t total = 0;
  for (auto k : kAllKinds) total += reference_test_size(k);
  EXPECT_EQ(total, 8270u);
  EXPECT_EQ(reference_test_size(ScenarioKind::APQ), 2000u);
  EXPECT_EQ(reference_test_size(ScenarioKind::APR), 350u);
}

// --- validation -----------------------------------------------------------

TEST(Validate, ApqRules) {
  EXPECT_NO_THROW(validate_example(apq("q1", "B")));
  auto bad = apq("q2", "F");
  EXPECT_THROW(validate_example(bad), ValidationError);
  auto one = apq("q3", "A");
  one.options = {{'A', "甲"}};
  EXPECT_THROW(validate_example(one), ValidationError);
}

TEST(Validate, MessageNamesField) {
  auto ex = with_gold(ScenarioKind::HFR, "h1", {});
  try {
    validate_example(ex);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("gold_items"), std::string::npos);
  }
}

TEST(Validate, OptionsOnlyForApq) {
  auto ex = with_ref(ScenarioKind::TCMKQA, "k1", "答");
  ex.options = {{'A', "x"}, {'B', "y"}};
  EXPECT_THROW(validate_example(ex), ValidationError);
  EXPECT_THROW(validate_example(with_ref(ScenarioKind::TLAW, "t1", "")), ValidationError);
}

// --- strip_reasoning_markup -----------------------------------------------

TEST(StripReasoning, RemovesThinkBlock) {
  EXPECT_EQ(strip_reasoning_markup("<think>推理过程</think>答案：B"), "答案：B");
}

TEST(StripReasoning, IdentityWithoutMarkup) {
  EXPECT_EQ(strip_reasoning_markup("答案：B"), "答案：B");
}

TEST(StripReasoning, NestedAndUnclosed) {
  EXPECT_EQ(strip_reasoning_markup("<think>a<think>b</think>c</think>答案：C"), "答案：C");
  EXPECT_EQ(strip_reasoning_markup("答案：D<think>还在想"), "答案：D");
  EXPECT_EQ(strip_reasoning_markup("  <think></think>  A  "), "A");
}

TEST(StripReasoning, IdempotentOnRandomTagSoup) {
  std::mt19937 rng(7);
  const std::vector<std::string> parts{"<think>", "</think>", "答案", "A", " ", "\n", "x", "<thi"};
  for (int t = 0; t < 500; ++t) {
    std::string s;
    const int n = static_cast<int>(rng() % 10);
    for (int i = 0; i < n; ++i) s += parts[rng() % parts.size()];
    const auto once = strip_reasoning_markup(s);
    EXPECT_EQ(strip_reasoning_markup(once), once) << s;
  }
}

// --- extract_option_letter ------------------------------------------------

TEST(OptionLetter, Examples) {
  auto a = extract_option_letter("答案：B");
  ASSERT_TRUE(a.as<OptionLetter>());
  EXPECT_EQ(a.as<OptionLetter>()->letter, 'B');
  EXPECT_EQ(a.rule, "answer-cue");

  auto b = extract_option_letter("正确选项是(C)，因为…");
  ASSERT_TRUE(b.as<OptionLetter>());
  EXPECT_EQ(b.as<OptionLetter>()->letter, 'C');

  auto c = extract_option_letter("本题无法作答");
  EXPECT_TRUE(c.failed());
}

TEST(OptionLetter, CascadePriority) {
  // An answer cue outranks an earlier parenthesized letter.
  EXPECT_EQ(extract_option_letter("(A)不对，答案：D").as<OptionLetter>()->letter, 'D');
  EXPECT_EQ(extract_option_letter("我认为是 E 项").as<OptionLetter>()->letter, 'E');
  EXPECT_EQ(extract_option_letter("Answer: c").rule.empty(), false);
}

TEST(OptionLetter, OnlyLetterOrFailure) {
  std::mt19937 rng(11);
  const std::vector<std::string> parts{"答案", "：", "A", "F", "(", ")", "选", "b", " ", "\n",
                                       "Answer", "xyz", "Z"};
  for (int t = 0; t < 1000; ++t) {
    std::string s;
    const int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) s += parts[rng() % parts.size()];
    const auto r = extract_option_letter(s);
    if (const auto* l = r.as<OptionLetter>()) {
      EXPECT_GE(l->letter, 'A');
      EXPECT_LE(l->letter, 'E');
    } else {
      EXPECT_TRUE(r.failed()) << s;
    }
  }
}

// --- labels ---------------------------------------------------------------

TEST(Label, StripsPrefix) {
  auto a = extract_label("证型：肝郁脾虚");
  ASSERT_TRUE(a.as<Label>());
  EXPECT_EQ(a.as<Label>()->text, "肝郁脾虚");
}

TEST(Label, FirstLineOfMultiline) {
  auto a = extract_label("诊断: 肝郁脾虚。\n理由：胁痛，纳差");
  ASSERT_TRUE(a.as<Label>());
  EXPECT_EQ(a.as<Label>()->text, "肝郁脾虚");
}

TEST(Label, WhitespaceOnlyFails) { EXPECT_TRUE(extract_label("  \n\t ").failed()); }

TEST(Label, WidthAndPunctuationUnified) {
  EXPECT_EQ(normalize_label("肝郁 脾虚！"), normalize_label("肝郁脾虚"));
}

// --- item lists -----------------------------------------------------------

TEST(ItemList, Examples) {
  EXPECT_EQ(ranked(parse_item_list("人参、黄芪、甘草")),
            (std::vector<std::string>{"人参", "黄芪", "甘草"}));
  EXPECT_EQ(ranked(parse_item_list("1. 足三里 15g\n2. 合谷")),
            (std::vector<std::string>{"足三里", "合谷"}));
  EXPECT_TRUE(parse_item_list("。。。").failed());
}

TEST(ItemList, NumeralHerbNamesSurvive) {
  EXPECT_EQ(ranked(parse_item_list("三七 6克；当归(10g)")),
            (std::vector<std::string>{"三七", "当归"}));
}

TEST(ItemList, DuplicatesDroppedFirstOrderKept) {
  EXPECT_EQ(ranked(parse_item_list("甘草,人参，甘草;黄芪")),
            (std::vector<std::string>{"甘草", "人参", "黄芪"}));
}

TEST(ItemList, EntitySetIgnoresOrder) {
  const auto a = parse_item_list("甲、乙", false);
  const auto b = parse_item_list("乙、甲", false);
  ASSERT_TRUE(a.as<EntitySet>() && b.as<EntitySet>());
  EXPECT_EQ(a.as<EntitySet>()->items, b.as<EntitySet>()->items);
}

TEST(ItemList, PropertyDedupedInFirstOccurrenceOrder) {
  std::mt19937 rng(3);
  const std::vector<std::string> herbs{"人参", "甘草", "黄芪", "三七", "当归", "合谷"};
  const std::vector<std::string> seps{"、", ",", "，", ";", "\n", "；"};
  const std::vector<std::string> dosage{"", " 15g", "10克", "(6g)", " 3 g"};
  for (int t = 0; t < 1000; ++t) {
    std::string s;
    std::vector<std::string> expected;
    const int n = static_cast<int>(rng() % 7);
    for (int i = 0; i < n; ++i) {
      const auto& h = herbs[rng() % herbs.size()];
      if (std::find(expected.begin(), expected.end(), h) == expected.end()) expected.push_back(h);
      if (i > 0) s += seps[rng() % seps.size()];
      if (rng() % 3 == 0) s += std::to_string(i + 1) + ". ";
      s += h + dosage[rng() % dosage.size()];
    }
    const auto r = parse_item_list(s);
    if (expected.empty()) {
      EXPECT_TRUE(r.failed());
      continue;
    }
    EXPECT_EQ(ranked(r), expected) << s;
  }
}

// --- evaluate_scenario ----------------------------------------------------

TEST(Evaluate, ApqAccuracyHalf) {
  std::vector<EvalItem> items{{apq("1", "A"), {"A"}}, {apq("2", "C"), {"B"}}};
  const auto r = evaluate_scenario(ScenarioKind::APQ, items);
  EXPECT_DOUBLE_EQ(r.metric("accuracy"), 0.5);
  EXPECT_DOUBLE_EQ(r.parse_failure_rate, 0.0);
}

TEST(Evaluate, HfrWorkedExample) {
  std::vector<EvalItem> items{{with_gold(ScenarioKind::HFR, "h", {"人参"}), {"甘草、人参"}}};
  const auto r = evaluate_scenario(ScenarioKind::HFR, items);
  EXPECT_NEAR(r.metric("mrr"), 0.5, 1e-12);
  EXPECT_NEAR(r.metric("hr@3"), 1.0, 1e-12);
  EXPECT_NEAR(r.metric("ndcg"), 0.6309, 1e-4);
}

TEST(Evaluate, AllFailuresScoreZero) {
  HashedEmbeddingProvider emb;
  for (auto k : kAllKinds) {
    ScenarioExample ex = make(k, "x");
    if (k == ScenarioKind::APQ) ex = apq("x", "A");
    ex.reference = ex.reference.empty() ? "参考答案" : ex.reference;
    ex.gold_items = {"人参"};
    std::vector<EvalItem> items{{ex, {"<think>只有思考</think>"}}, {ex, {"   "}}};
    const auto r = evaluate_scenario(k, items, &emb);
    EXPECT_DOUBLE_EQ(r.parse_failure_rate, 1.0) << to_string(k);
    for (const auto& [name, v] : r.metrics) EXPECT_EQ(v, 0.0) << to_string(k) << " " << name;
  }
}

TEST(Evaluate, GoldFedBackIsPerfect) {
  HashedEmbeddingProvider emb;
  std::vector<EvalItem> apq_items{{apq("1", "B"), {"B"}}};
  EXPECT_DOUBLE_EQ(evaluate_scenario(ScenarioKind::APQ, apq_items).metric("accuracy"), 1.0);

  auto cd = with_ref(ScenarioKind::TCMCD, "c", "肝郁脾虚");
  std::vector<EvalItem> cd_items{{cd, {cd.reference}}};
  EXPECT_DOUBLE_EQ(evaluate_scenario(ScenarioKind::TCMCD, cd_items).metric("accuracy"), 1.0);

  auto ee = with_gold(ScenarioKind::TCMEE, "e", {"人参", "黄芪"});
  std::vector<EvalItem> ee_items{{ee, {"黄芪、人参"}}};
  EXPECT_DOUBLE_EQ(evaluate_scenario(ScenarioKind::TCMEE, ee_items).metric("f1"), 1.0);

  auto apr = with_gold(ScenarioKind::APR, "p", {"足三里", "合谷"});
  std::vector<EvalItem> apr_items{{apr, {"足三里、合谷"}}};
  const auto ar = evaluate_scenario(ScenarioKind::APR, apr_items);
  EXPECT_DOUBLE_EQ(ar.metric("mrr"), 1.0);
  EXPECT_DOUBLE_EQ(ar.metric("ndcg"), 1.0);
  EXPECT_DOUBLE_EQ(ar.metric("accuracy"), 1.0);

  auto gen = with_ref(ScenarioKind::TCMKQA, "g", "人参大补元气，复脉固脱，补脾益肺。");
  std::vector<EvalItem> gen_items{{gen, {gen.reference}}};
  const auto gr = evaluate_scenario(ScenarioKind::TCMKQA, gen_items, &emb);
  for (const auto& [name, v] : gr.metrics) {
    // A single chunk still carries the fragmentation penalty gamma / m^beta.
    const double m = static_cast<double>(tcmbench::metrics::tokenize(gen.reference).size());
    const double expected = name == "meteor" ? 1.0 - 0.5 / (m * m * m) : 1.0;
    EXPECT_NEAR(v, expected, 1e-9) << name;
  }
  EXPECT_DOUBLE_EQ(gr.parse_failure_rate, 0.0);
}

TEST(Evaluate, LabelNoPartialCredit) {
  auto cd = with_ref(ScenarioKind::TCMCD, "c", "肝郁脾虚");
  std::vector<EvalItem> items{{cd, {"肝郁"}}};
  EXPECT_DOUBLE_EQ(evaluate_scenario(ScenarioKind::TCMCD, items).metric("accuracy"), 0.0);
}

TEST(Evaluate, AprAccuracyIsTopOneHit) {
  auto apr = with_gold(ScenarioKind::APR, "p", {"合谷"});
  std::vector<EvalItem> items{{apr, {"足三里、合谷"}}};
  const auto r = evaluate_scenario(ScenarioKind::APR, items);
  EXPECT_DOUBLE_EQ(r.metric("accuracy"), 0.0);
  EXPECT_DOUBLE_EQ(r.metric("hr@3"), 1.0);
}

TEST(Evaluate, Errors) {
  std::vector<EvalItem> mixed{{apq("1", "A"), {"A"}},
                              {with_ref(ScenarioKind::TCMCD, "2", "x"), {"x"}}};
  EXPECT_THROW(evaluate_scenario(ScenarioKind::APQ, mixed), ValidationError);
  std::vector<EvalItem> gen{{with_ref(ScenarioKind::TLAW, "t", "摘要"), {"摘要"}}};
  EXPECT_THROW(evaluate_scenario(ScenarioKind::TLAW, gen, nullptr), ValidationError);
}

TEST(Evaluate, EmptyBatchReportsZeros) {
  const auto r = evaluate_scenario(ScenarioKind::HFR, {});
  EXPECT_EQ(r.item_count, 0u);
  EXPECT_EQ(r.metrics.size(), 5u);
}

TEST(Evaluate, BertscoreFromFixture) {
  FixtureEmbeddingProvider emb(std::string(TCMBENCH_FIXTURES) + "/embeddings/hand_case.json");
  auto ex = with_ref(ScenarioKind::TCMKQA, "g", "补气");
  std::vector<EvalItem> items{{ex, {"补血"}}};
  const auto r = evaluate_scenario(ScenarioKind::TCMKQA, items, &emb);
  EXPECT_NEAR(r.metric("bertscore"), 0.85355, 1e-4);
}

TEST(Embedding, HashedIsDeterministicAndAligned) {
  HashedEmbeddingProvider a, b;
  const std::vector<std::string> texts{"人参补气", "ginseng root"};
  const auto x = a.embed(texts);
  const auto y = b.embed(texts);
  ASSERT_EQ(x.size(), 2u);
  EXPECT_EQ(x[0].rows(), 4u);
  EXPECT_EQ(x[1].rows(), 2u);
  EXPECT_EQ(x[0].row(0)[0], y[0].row(0)[0]);
}

TEST(Embedding, FixtureMissingTextThrows) {
  FixtureEmbeddingProvider emb(std::string(TCMBENCH_FIXTURES) + "/embeddings/hand_case.json");
  const std::vector<std::string> texts{"不存在"};
  EXPECT_THROW(emb.embed(texts), ValidationError);
}
