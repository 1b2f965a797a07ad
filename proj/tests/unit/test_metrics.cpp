#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support/oracles.hpp"
#include "tcmbench/metrics.hpp"

using namespace tcmbench::metrics;
using tcmbench::ValidationError;

namespace {

TokenSequence seq(std::initializer_list<std::string> t) { return TokenSequence(t); }
TokenSequence seq(const oracle::Tokens& t) { return TokenSequence(t); }

}  // namespace

// --- tokenize -------------------------------------------------------------

TEST(Tokenize, CjkCharactersAndLatinWords) {
  EXPECT_EQ(tokenize("人参与Panax ginseng"),
            seq({"人", "参", "与", "panax", "ginseng"}));
}

TEST(Tokenize, EmptyText) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, PunctuationSplitsOnlyInDefaultMode) {
  EXPECT_EQ(tokenize("A,B", TokenizeMode::Whitespace), seq({"a,b"}));
  EXPECT_EQ(tokenize("A,B"), seq({"a", "b"}));
}

TEST(Tokenize, DropsPunctuationOnlyTokens) {
  EXPECT_EQ(tokenize("甘草，补气。"), seq({"甘", "草", "补", "气"}));
  EXPECT_EQ(tokenize("a -- b ...", TokenizeMode::Whitespace), seq({"a", "b"}));
  EXPECT_EQ(tokenize("ＡＢＣ ok"), seq({"abc", "ok"}));
  EXPECT_EQ(tokenize("15g人参"), seq({"15g", "人", "参"}));
}

TEST(TokenSequence, RejectsEmptyOrWhitespaceTokens) {
  EXPECT_THROW(TokenSequence({""}), std::invalid_argument);
  EXPECT_THROW(TokenSequence({"a b"}), std::invalid_argument);
}

// --- n-grams --------------------------------------------------------------

TEST(NGrams, SlidingWindow) {
  auto bag = ngrams(seq({"a", "b", "c"}), 2);
  EXPECT_EQ(bag.counts.size(), 2u);
  EXPECT_EQ(bag.count({"a", "b"}), 1u);
  EXPECT_EQ(bag.count({"b", "c"}), 1u);
}

TEST(NGrams, RepeatedUnigrams) {
  auto bag = ngrams(seq({"a", "a", "a"}), 1);
  EXPECT_EQ(bag.count({"a"}), 3u);
  EXPECT_EQ(bag.total(), 3u);
}

TEST(NGrams, WindowLongerThanSequence) {
  EXPECT_TRUE(ngrams(seq({"a", "b"}), 3).counts.empty());
  EXPECT_THROW(ngrams(seq({"a"}), 0), std::invalid_argument);
}

TEST(NGrams, TotalMatchesWindowCount) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    auto t = oracle::random_tokens(rng, 10);
    for (std::size_t n = 1; n <= 4; ++n) {
      auto bag = ngrams(seq(t), n);
      EXPECT_EQ(bag.total(), t.size() >= n ? t.size() - n + 1 : 0u);
      for (const auto& [g, c] : bag.counts) EXPECT_EQ(g.size(), n);
    }
  }
}

// --- classification -------------------------------------------------------

TEST(Accuracy, Basic) {
  std::vector<LabelPair> p{{"A", "A"}, {"B", "C"}};
  EXPECT_DOUBLE_EQ(accuracy(p), 0.5);
  std::vector<LabelPair> same{{"A", "A"}, {"D", "D"}};
  EXPECT_DOUBLE_EQ(accuracy(same), 1.0);
}

TEST(Accuracy, SevenOfTen) {
  std::vector<LabelPair> p{{"A", "A"}, {"B", "B"}, {"C", "C"}, {"D", "D"}, {"E", "E"},
                           {"A", "A"}, {"B", "B"}, {"C", "A"}, {"D", "B"}, {"E", "A"}};
  EXPECT_DOUBLE_EQ(accuracy(p), 0.7);
}

TEST(Accuracy, EmptyIsAnError) {
  std::vector<LabelPair> none;
  EXPECT_THROW(accuracy(none), ValidationError);
  EXPECT_THROW(accuracy(ConfusionCounts{}), ValidationError);
  EXPECT_DOUBLE_EQ(accuracy(ConfusionCounts{3, 4, 2, 1}), 0.7);
}

TEST(PrfSets, WorkedExample) {
  auto r = prf_sets({"人参", "黄芪", "甘草"}, {"人参", "甘草"});
  EXPECT_NEAR(r.precision, 2.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(r.recall, 1.0);
  EXPECT_NEAR(r.f1, 0.8, 1e-12);
}

TEST(PrfSets, IdentityAndEmptyPredicted) {
  auto id = prf_sets({"a", "b"}, {"a", "b"});
  EXPECT_DOUBLE_EQ(id.precision, 1.0);
  EXPECT_DOUBLE_EQ(id.recall, 1.0);
  EXPECT_DOUBLE_EQ(id.f1, 1.0);
  auto none = prf_sets({}, {"a"});
  EXPECT_EQ(none.precision, 0.0);
  EXPECT_EQ(none.recall, 0.0);
  EXPECT_EQ(none.f1, 0.0);
}

// --- BLEU / METEOR / ROUGE worked examples --------------------------------

TEST(Bleu, Identity) {
  auto s = seq({"a", "b", "c", "d", "e"});
  EXPECT_DOUBLE_EQ(bleu(s, s).value, 1.0);
}

TEST(Bleu, BrevityPenaltyUnigram) {
  auto r = bleu(seq({"the", "cat"}), seq({"the", "cat", "sat"}), BleuParams::uniform(1));
  EXPECT_NEAR(r.value, std::exp(1.0 - 1.5), 1e-12);
  EXPECT_NEAR(r.value, 0.6065, 1e-4);
}

TEST(Bleu, DisjointIsNearZero) {
  auto r = bleu(seq({"a", "b", "c", "d", "e"}), seq({"v", "w", "x", "y", "z"}));
  EXPECT_NEAR(r.value, 1e-9, 1e-15);
  EXPECT_FALSE(r.degenerate);
  // 4-grams absent on both sides count as vacuous: floor^(3/4)
  auto s = bleu(seq({"a", "b", "c"}), seq({"x", "y", "z"}));
  EXPECT_NEAR(s.value, std::pow(1e-9, 0.75), 1e-15);
}

TEST(Bleu, EmptyCandidateIsDegenerate) {
  auto r = bleu(TokenSequence{}, seq({"a"}));
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.degenerate);
}

TEST(Bleu, RejectsBadParams) {
  BleuParams p{{0.5, 0.4}, 1e-9};
  EXPECT_THROW(bleu(seq({"a"}), seq({"a"}), p), std::invalid_argument);
  BleuParams q{{1.0}, 0.0};
  EXPECT_THROW(bleu(seq({"a"}), seq({"a"}), q), std::invalid_argument);
}

TEST(Meteor, WorkedExamples) {
  MeteorParams p{0.9, 3.0, 0.5};
  EXPECT_NEAR(meteor(seq({"a", "b", "c"}), seq({"a", "b", "d"}), p).value, 0.625, 1e-12);
  EXPECT_NEAR(meteor(seq({"a", "b", "c"}), seq({"a", "b", "c"}), p).value,
              1.0 - 0.5 / 27.0, 1e-12);
  EXPECT_EQ(meteor(seq({"a"}), seq({"b"}), p).value, 0.0);
  EXPECT_TRUE(meteor(TokenSequence{}, seq({"b"}), p).degenerate);
}

TEST(Meteor, AlignmentPrefersFewerChunks) {
  // greedy left-to-right matching would split "a b" across two chunks
  auto a = meteor_alignment(seq({"a", "x", "a", "b"}), seq({"a", "b"}));
  ASSERT_EQ(a.size(), 2u);
  EXPECT_EQ(count_chunks(a), 1u);
  EXPECT_EQ(a[0].first, 2u);
}

TEST(Meteor, LongInputsStayBounded) {
  std::mt19937_64 rng(3);
  auto c = oracle::random_tokens(rng, 300, 20, 300);
  auto r = oracle::random_tokens(rng, 300, 20, 300);
  auto s = meteor(seq(c), seq(r));
  EXPECT_GT(s.value, 0.0);
  EXPECT_LE(s.value, 1.0);
}

TEST(Rouge, WorkedExamples) {
  auto c = seq({"a", "b", "c"});
  auto r = seq({"a", "b", "d"});
  EXPECT_NEAR(rouge_n(c, r, 1).value, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(rouge_n(c, r, 2).value, 0.5, 1e-12);
  EXPECT_NEAR(rouge_l(c, r).value, 4.0 / 6.0, 1e-12);
  EXPECT_DOUBLE_EQ(rouge_n(c, c, 3).value, 1.0);
  EXPECT_EQ(rouge_n(TokenSequence{}, r, 1).value, 0.0);
  EXPECT_EQ(rouge_l(seq({"x"}), seq({"y"})).value, 0.0);
}

TEST(Rouge, DegenerateReferences) {
  EXPECT_TRUE(rouge_n(seq({"a"}), seq({"a"}), 2).degenerate);
  EXPECT_TRUE(rouge_l(TokenSequence{}, TokenSequence{}).degenerate);
  EXPECT_THROW(rouge_l(seq({"a"}), seq({"a"}), RougeLBeta{0.0}), std::invalid_argument);
}

TEST(Rouge, PrintedDenominatorOrientation) {
  // reference length 2, candidate length 4, LCS 2, beta 2:
  // (1+4)*2 / (2 + 4*4) = 10/18
  auto v = rouge_l(seq({"a", "b", "c", "d"}), seq({"a", "b"}), RougeLBeta{2.0}).value;
  EXPECT_NEAR(v, 10.0 / 18.0, 1e-12);
}

// --- ranking ---------------------------------------------------------------

TEST(Ranking, Mrr) {
  std::vector<RankingQuery> one{{RankedList{"a", "b"}, RelevanceSet{"a"}}};
  EXPECT_DOUBLE_EQ(mrr(one), 1.0);
  std::vector<RankingQuery> third{{RankedList{"a", "b", "c"}, RelevanceSet{"c"}}};
  EXPECT_NEAR(mrr(third), 1.0 / 3.0, 1e-15);
  std::vector<RankingQuery> two{{RankedList{"a", "b"}, RelevanceSet{"a"}},
                                {RankedList{"a", "b"}, RelevanceSet{"b"}}};
  EXPECT_DOUBLE_EQ(mrr(two), 0.75);
  std::vector<RankingQuery> none;
  EXPECT_THROW(mrr(none), ValidationError);
  std::vector<RankingQuery> miss{{RankedList{"a"}, RelevanceSet{"z"}}};
  EXPECT_EQ(mrr(miss), 0.0);
}

TEST(Ranking, TopK) {
  RankingQuery q{RankedList{"a", "b", "c", "d"}, RelevanceSet{"a", "c", "x", "y"}};
  auto t = topk_metrics(q, 3);
  EXPECT_NEAR(t.precision, 2.0 / 3.0, 1e-15);
  EXPECT_DOUBLE_EQ(t.recall, 0.5);
  EXPECT_DOUBLE_EQ(t.hit_rate, 1.0);

  RankingQuery all{RankedList{"a", "b", "c"}, RelevanceSet{"a", "b", "c"}};
  auto p = topk_metrics(all, 3);
  EXPECT_DOUBLE_EQ(p.precision, 1.0);
  EXPECT_DOUBLE_EQ(p.recall, 1.0);
  EXPECT_DOUBLE_EQ(p.hit_rate, 1.0);

  std::vector<RankingQuery> four{{RankedList{"a"}, RelevanceSet{"a"}},
                                 {RankedList{"b"}, RelevanceSet{"a"}},
                                 {RankedList{"c", "a"}, RelevanceSet{"a"}},
                                 {RankedList{"d"}, RelevanceSet{"a"}}};
  EXPECT_DOUBLE_EQ(topk_metrics(four, 3).hit_rate, 0.5);

  RankingQuery empty_gold{RankedList{"a"}, RelevanceSet{}};
  EXPECT_THROW(topk_metrics(empty_gold, 3), ValidationError);
}

TEST(Ranking, Ndcg) {
  EXPECT_DOUBLE_EQ(ndcg(RankingQuery{RankedList{"a", "b", "c"}, RelevanceSet{"a", "b"}}), 1.0);
  EXPECT_NEAR(ndcg(RankingQuery{RankedList{"a", "b", "c"}, RelevanceSet{"b"}}),
              1.0 / std::log2(3.0), 1e-15);
  EXPECT_NEAR(ndcg(RankingQuery{RankedList{"a", "b", "c"}, RelevanceSet{"b"}}), 0.6309, 1e-4);
  EXPECT_EQ(ndcg(RankingQuery{RankedList{"a", "b"}, RelevanceSet{"z"}}), 0.0);
  EXPECT_THROW(ndcg(RankingQuery{RankedList{"a"}, RelevanceSet{}}), ValidationError);
  EXPECT_EQ(ndcg(RankingQuery{RankedList{}, RelevanceSet{"a"}}), 0.0);
}

TEST(Ranking, RankedListRejectsDuplicates) {
  EXPECT_THROW(RankedList({"a", "a"}), std::invalid_argument);
}

TEST(Ranking, MovingGoldEarlierNeverHurts) {
  std::mt19937_64 rng(11);
  std::vector<std::string> base{"a", "b", "c", "d", "e", "f"};
  for (int trial = 0; trial < 500; ++trial) {
    auto list = base;
    std::shuffle(list.begin(), list.end(), rng);
    std::set<std::string> gold;
    for (const auto& s : base)
      if (rng() % 3 == 0) gold.insert(s);
    if (gold.empty()) gold.insert("c");
    for (std::size_t i = 1; i < list.size(); ++i) {
      if (!gold.count(list[i])) continue;
      auto moved = list;
      std::swap(moved[i], moved[i - 1]);
      RankingQuery before{RankedList(list), RelevanceSet(gold)};
      RankingQuery after{RankedList(moved), RelevanceSet(gold)};
      EXPECT_GE(reciprocal_rank(after), reciprocal_rank(before));
      EXPECT_GE(ndcg(after) + 1e-15, ndcg(before));
    }
  }
}

// --- BERTScore -------------------------------------------------------------

TEST(BertScore, HandCase) {
  const double h = 0.7071;
  EmbeddingMatrix cand({{1, 0}, {0, 1}});
  EmbeddingMatrix ref({{1, 0}, {h, h}});
  auto s = bert_score(cand, ref);
  const double expected = (1.0 + 1.0 / std::sqrt(2.0)) / 2.0;
  EXPECT_NEAR(s.precision, expected, 1e-9);
  EXPECT_NEAR(s.recall, expected, 1e-9);
  EXPECT_NEAR(s.f1, 0.85355, 1e-4);
}

TEST(BertScore, IdentityOrthogonalAndErrors) {
  EmbeddingMatrix m({{0.3, -1.2, 2.0}, {1.0, 1.0, 0.5}});
  auto id = bert_score(m, m);
  EXPECT_NEAR(id.f1, 1.0, 1e-9);
  EmbeddingMatrix a({{1, 0, 0}});
  EmbeddingMatrix b({{0, 1, 0}, {0, 0, 1}});
  EXPECT_EQ(bert_score(a, b).f1, 0.0);
  EmbeddingMatrix c({{1, 0}});
  EXPECT_THROW(bert_score(a, c), ValidationError);
  EXPECT_THROW(EmbeddingMatrix({{0.0, 0.0}}), std::invalid_argument);
}

TEST(BertScore, SwapExchangesPrecisionAndRecall) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto make = [&](std::size_t rows) {
      std::vector<std::vector<double>> m(rows, std::vector<double>(4));
      for (auto& r : m)
        for (auto& v : r) v = n(rng) + 0.01;
      return EmbeddingMatrix(m);
    };
    auto x = make(1 + rng() % 5), y = make(1 + rng() % 5);
    auto xy = bert_score(x, y), yx = bert_score(y, x);
    EXPECT_EQ(xy.precision, yx.recall);
    EXPECT_EQ(xy.recall, yx.precision);
  }
}

// --- properties against brute-force oracles ---------------------------------

TEST(Oracle, GenerationMetricsMatchBruteForce) {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = oracle::random_tokens(rng, 8);
    auto r = oracle::random_tokens(rng, 8);
    auto cs = seq(c), rs = seq(r);
    for (std::size_t n = 1; n <= 2; ++n)
      EXPECT_NEAR(rouge_n(cs, rs, n).value, oracle::rouge_n(c, r, n), 1e-9);
    for (double beta : {0.5, 1.0, 2.0})
      EXPECT_NEAR(rouge_l(cs, rs, {beta}).value, oracle::rouge_l(c, r, beta), 1e-9);
    EXPECT_NEAR(bleu(cs, rs, BleuParams::uniform(1)).value, oracle::bleu(c, r, 1), 1e-9);
    EXPECT_NEAR(bleu(cs, rs).value, oracle::bleu(c, r, 4), 1e-9);
    EXPECT_NEAR(meteor(cs, rs).value, oracle::meteor(c, r), 1e-9)
        << "trial " << trial;
  }
}

TEST(Oracle, AllScoresInUnitInterval) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    auto c = seq(oracle::random_tokens(rng, 12, 4));
    auto r = seq(oracle::random_tokens(rng, 12, 4));
    for (double v : {bleu(c, r).value, meteor(c, r).value, rouge_n(c, r, 1).value,
                     rouge_n(c, r, 2).value, rouge_l(c, r, {3.0}).value,
                     rouge_l(c, r, {0.2}).value}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Oracle, IdentityOnNonEmptySequences) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    auto s = seq(oracle::random_tokens(rng, 10, 5, 1));
    EXPECT_NEAR(bleu(s, s).value, 1.0, 1e-12);
    EXPECT_NEAR(rouge_l(s, s, {1.7}).value, 1.0, 1e-12);
    for (std::size_t n = 1; n <= s.size() && n <= 4; ++n)
      EXPECT_DOUBLE_EQ(rouge_n(s, s, n).value, 1.0);
  }
}

TEST(Oracle, Deterministic) {
  std::mt19937_64 rng(8);
  auto c = seq(oracle::random_tokens(rng, 30, 6, 10));
  auto r = seq(oracle::random_tokens(rng, 30, 6, 10));
  EXPECT_EQ(meteor(c, r).value, meteor(c, r).value);
  EXPECT_EQ(bleu(c, r).value, bleu(c, r).value);
}
