#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <memory>
#include <random>
#include <set>
#include <sstream>

#include "support/mock_server.hpp"
#include "support/scripted_model.hpp"
#include "support/tempdir.hpp"
#include "support/tree.hpp"
#include "tcmbench/runner.hpp"

using namespace tcmbench;
using namespace tcmbench::runner;
using scenarios::ScenarioKind;
using testsupport::MockServer;
using testsupport::ScriptedModel;
using testsupport::TempDir;

namespace {

/// Mock server driven by a ScriptedModel, counting successful replies.
struct ScriptedServer {
  std::shared_ptr<ScriptedModel> model = std::make_shared<ScriptedModel>();
  std::shared_ptr<std::atomic<int>> ok = std::make_shared<std::atomic<int>>(0);
  MockServer server{[m = model, ok = ok](const nlohmann::json& body, int i) {
    auto r = (*m)(body, i);
    if (r.status == 200) ++*ok;
    return r;
  }};
};

std::vector<std::string> csv_models(const std::string& csv) {
  std::istringstream in(csv);
  std::vector<std::string> out;
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) out.push_back(line.substr(0, line.find(',')));
  return out;
}

}  // namespace

// ---------------------------------------------------------------- config

TEST(RunConfig, ParsesAndResolvesRelativePaths) {
  TempDir dir;
  const auto j = nlohmann::json::parse(R"({
    "endpoints": [{"model_id": "m1", "base_url": "http://127.0.0.1:9"}],
    "scenarios": {"APQ": "data/apq.jsonl"},
    "cache_dir": "cache", "output_dir": "out", "seed": 7, "concurrency": 2,
    "decode": {"temperature": 0.5, "max_tokens": 64},
    "retry": {"max_attempts": 3, "base_delay_ms": 10},
    "templates": {"APQ": {"user": "Q: {question}\n{options}"}}
  })");
  const auto c = config_from_json(j, dir.path());
  EXPECT_EQ(c.scenarios.at(ScenarioKind::APQ), dir.path() / "data/apq.jsonl");
  EXPECT_EQ(c.cache_dir, dir.path() / "cache");
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.concurrency, 2);
  EXPECT_DOUBLE_EQ(c.decode.temperature, 0.5);
  EXPECT_EQ(c.decode.max_tokens, 64);
  EXPECT_EQ(c.retry.max_attempts, 3);
  EXPECT_EQ(c.templates.at(ScenarioKind::APQ).user, "Q: {question}\n{options}");
  EXPECT_FALSE(c.templates.at(ScenarioKind::APQ).system.empty());
}

TEST(RunConfig, RejectsInvalidConfigs) {
  auto base = [] {
    return nlohmann::json::parse(R"({
      "endpoints": [{"model_id": "m1", "base_url": "http://127.0.0.1:9"}],
      "scenarios": {"APQ": "a.jsonl"}, "cache_dir": "c", "output_dir": "o"})");
  };
  EXPECT_NO_THROW(config_from_json(base()));

  auto j = base();
  j["scenarios"] = nlohmann::json::object();
  EXPECT_THROW(config_from_json(j), ValidationError);

  j = base();
  j["endpoints"] = nlohmann::json::array();
  EXPECT_THROW(config_from_json(j), ValidationError);

  j = base();
  j["output_dir"] = "c";
  EXPECT_THROW(config_from_json(j), ValidationError);

  j = base();
  j["scenarios"]["XYZ"] = "x.jsonl";
  EXPECT_THROW(config_from_json(j), ConfigError);

  j = base();
  j["scenarios"]["TLAW"] = "t.jsonl";  // bertscore without an embedder
  EXPECT_THROW(config_from_json(j), ValidationError);
  j["embedder"] = {{"kind", "hashed"}};
  EXPECT_NO_THROW(config_from_json(j));

  j = base();
  j["endpoints"].push_back({{"model_id", "m1"}, {"base_url", "http://127.0.0.1:9"}});
  EXPECT_THROW(config_from_json(j), ValidationError);

  j = base();
  j["endpoints"][0]["kind"] = "remote-api";  // needs credential_env
  EXPECT_THROW(config_from_json(j), ConfigError);
}

TEST(RunConfig, LoadConfigReportsMalformedJson) {
  TempDir dir;
  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_THROW(load_config(dir / "bad.json"), ConfigError);
}

// ---------------------------------------------------------------- plan

TEST(PlanRuns, EnumeratesEveryPairAsPending) {
  TempDir dir;
  auto c = testsupport::fixture_config({"a", "b"}, "http://127.0.0.1:9", dir.path());
  c.scenarios = {{ScenarioKind::APQ, testsupport::scenario_fixture(ScenarioKind::APQ)},
                 {ScenarioKind::HFR, testsupport::scenario_fixture(ScenarioKind::HFR)}};
  const auto m = plan_runs(c);
  ASSERT_EQ(m.pairs.size(), 4u);
  for (const auto& p : m.pairs) EXPECT_EQ(p.status, PairStatus::Pending);
  EXPECT_EQ(m.pairs[0].model_id, "a");
  EXPECT_EQ(m.pairs[3].model_id, "b");
  EXPECT_EQ(m.run_id, "run-" + m.config_digest.substr(0, 12));
  EXPECT_EQ(m.dataset_digests.size(), 2u);
}

TEST(PlanRuns, DigestIsDeterministicAndPinsInputs) {
  TempDir dir;
  auto c = testsupport::fixture_config({"a"}, "http://127.0.0.1:9", dir.path());
  const auto d1 = plan_runs(c).config_digest;
  EXPECT_EQ(plan_runs(c).config_digest, d1);

  auto moved = c;
  moved.endpoints[0].base_url = "http://127.0.0.1:10";
  moved.concurrency = 1;
  EXPECT_EQ(plan_runs(moved).config_digest, d1);

  auto decode = c;
  decode.decode.max_tokens = 128;
  EXPECT_NE(plan_runs(decode).config_digest, d1);

  auto tpl = c;
  tpl.templates.merge_json({{"APQ", {{"exemplar", "other"}}}});
  EXPECT_NE(plan_runs(tpl).config_digest, d1);

  // Same records, different bytes on disk.
  auto data = c;
  const auto copy = dir / "apq.jsonl";
  std::ofstream(copy) << fsutil::read_file(testsupport::scenario_fixture(ScenarioKind::APQ)) << "\n";
  data.scenarios[ScenarioKind::APQ] = copy;
  EXPECT_NE(plan_runs(data).config_digest, d1);
}

TEST(PlanRuns, UnloadableDatasetFailsBeforeAnyRequest) {
  TempDir dir;
  ScriptedServer s;
  auto c = testsupport::fixture_config({"a"}, s.server.url(), dir.path());
  c.scenarios[ScenarioKind::APQ] = dir / "missing.jsonl";
  EXPECT_THROW(plan_runs(c), Error);

  std::ofstream(dir / "bad.jsonl") << "{\"id\": \"x\"}\n";
  c.scenarios[ScenarioKind::APQ] = dir / "bad.jsonl";
  EXPECT_THROW(plan_runs(c), ValidationError);

  c.scenarios[ScenarioKind::APQ] = testsupport::scenario_fixture(ScenarioKind::TCMCD);
  EXPECT_THROW(plan_runs(c), ValidationError);
  EXPECT_EQ(s.server.calls(), 0);
}

TEST(RunManifest, JsonRoundTrip) {
  TempDir dir;
  auto c = testsupport::fixture_config({"a", "b"}, "http://127.0.0.1:9", dir.path());
  auto m = plan_runs(c);
  m.pairs[1].status = PairStatus::Failed;
  m.pairs[1].error = "boom";
  m.pairs[1].failed_requests = 3;
  m.pairs[2].status = PairStatus::Complete;
  const auto back = manifest_from_json(nlohmann::json::parse(to_json(m).dump()));
  EXPECT_EQ(to_json(back).dump(), to_json(m).dump());
}

// ---------------------------------------------------------------- leaderboard

TEST(Leaderboard, PublishedApqAccuraciesKeepTheirOrder) {
  const ModelMetrics apq{{"Deepseek-R1", {{"accuracy", 0.836}}},
                         {"TianHui", {{"accuracy", 0.811}}},
                         {"other-1", {{"accuracy", 0.792}}},
                         {"other-2", {{"accuracy", 0.705}}}};
  const auto lb = leaderboard(apq, {"accuracy"});
  ASSERT_EQ(lb.rows.size(), 4u);
  EXPECT_EQ(lb.rows[0].model_id, "Deepseek-R1");
  EXPECT_EQ(lb.rows[0].ranks[0], 1);
  EXPECT_EQ(lb.rows[1].model_id, "TianHui");
  EXPECT_EQ(lb.rows[1].ranks[0], 2);
  EXPECT_TRUE(lb.rows[2].top3[0]);
  EXPECT_FALSE(lb.rows[3].top3[0]);
}

TEST(Leaderboard, SingleModelIsRankOneAndFlagged) {
  const auto lb = leaderboard({{"only", {{"f1", 0.1}}}}, {"f1"});
  EXPECT_EQ(lb.rows[0].ranks[0], 1);
  EXPECT_TRUE(lb.rows[0].top3[0]);
}

TEST(Leaderboard, TiesShareRankDensely) {
  const auto lb = leaderboard({{"b", {{"m", 0.5}}}, {"a", {{"m", 0.5}}}, {"c", {{"m", 0.4}}}}, {"m"});
  EXPECT_EQ(lb.rows[0].model_id, "a");
  EXPECT_EQ(lb.rows[1].model_id, "b");
  EXPECT_EQ(lb.rows[0].ranks[0], 1);
  EXPECT_EQ(lb.rows[1].ranks[0], 1);
  EXPECT_EQ(lb.rows[2].ranks[0], 2);
}

TEST(Leaderboard, MissingValuesRankLastUnflagged) {
  const auto lb = leaderboard({{"a", {{"m", 0.1}}}, {"b", {}}, {"c", {{"m", std::nan("")}}}}, {"m"});
  EXPECT_EQ(lb.rows[0].model_id, "a");
  EXPECT_EQ(lb.rows[1].ranks[0], 2);
  EXPECT_EQ(lb.rows[2].ranks[0], 2);
  EXPECT_FALSE(lb.rows[1].top3[0]);
  EXPECT_FALSE(lb.rows[2].top3[0]);
  EXPECT_NE(to_csv(lb).find("b,,2,0"), std::string::npos);
}

TEST(Leaderboard, EmptyInputIsAnError) {
  EXPECT_THROW(leaderboard({}, {"m"}), ValidationError);
  EXPECT_THROW(leaderboard({{"a", {}}}, {}), ValidationError);
}

TEST(Leaderboard, RanksAreDenseAndFlagsMatchRanks) {
  std::mt19937 rng(11);
  std::uniform_int_distribution<int> val(0, 5), count(1, 9);
  for (int trial = 0; trial < 200; ++trial) {
    ModelMetrics mm;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) {
      auto& row = mm["m" + std::to_string(i)];
      for (const char* metric : {"x", "y"})
        if (val(rng) != 0) row[metric] = val(rng) / 5.0;
    }
    const auto lb = leaderboard(mm, {"x", "y"});
    for (std::size_t c = 0; c < 2; ++c) {
      std::set<double> distinct;
      for (const auto& r : lb.rows)
        if (r.values[c]) distinct.insert(*r.values[c]);
      for (const auto& r : lb.rows) {
        if (r.values[c]) {
          int higher = 0;
          for (double d : distinct) higher += d > *r.values[c];
          EXPECT_EQ(r.ranks[c], higher + 1);
        } else {
          EXPECT_EQ(r.ranks[c], static_cast<int>(distinct.size()) + 1);
        }
        EXPECT_EQ(r.top3[c], r.values[c].has_value() && r.ranks[c] <= 3);
      }
    }
    for (std::size_t i = 1; i < lb.rows.size(); ++i) {
      const auto& a = lb.rows[i - 1];
      const auto& b = lb.rows[i];
      EXPECT_TRUE(a.ranks[0] < b.ranks[0] || (a.ranks[0] == b.ranks[0] && a.model_id < b.model_id));
    }
  }
}

// ---------------------------------------------------------------- ablation

TEST(Ablation, DefaultBaselineGivesTwelveRuns) {
  const auto plan = ablation_grid(TrainingConfig{128, 256, 0.2, 4, 2048});
  std::vector<std::string> labels;
  for (const auto& r : plan.runs) labels.push_back(r.label);
  const std::vector<std::string> expected{
      "baseline",     "lora_rank=8,lora_alpha=16", "lora_rank=16,lora_alpha=32",
      "lora_rank=32,lora_alpha=64", "lora_rank=64,lora_alpha=128", "epoch=2",
      "epoch=6",      "dropout=0",   "dropout=0.4",
      "max_length=256", "max_length=512", "max_length=1024"};
  EXPECT_EQ(labels, expected);
  for (const auto& r : plan.runs) {
    EXPECT_EQ(r.config.lora_alpha, 2 * r.config.lora_rank);
    const auto diff = differing_axes(plan.baseline, r.config);
    if (r.axis == "baseline") {
      EXPECT_TRUE(diff.empty());
    } else {
      ASSERT_EQ(diff.size(), 1u) << r.label;
      EXPECT_EQ(diff[0], r.axis);
    }
  }
}

TEST(Ablation, AxesReducedToBaselineGiveOneRun) {
  AblationAxes axes;
  axes.lora_rank = {128};
  axes.lora_alpha = {256};
  axes.dropout = {0.2};
  axes.epoch = {4};
  axes.max_length = {2048};
  const auto plan = ablation_grid(TrainingConfig{}, axes);
  ASSERT_EQ(plan.runs.size(), 1u);
  EXPECT_EQ(plan.runs[0].label, "baseline");
}

TEST(Ablation, RejectsBaselineOffAxis) {
  EXPECT_THROW(ablation_grid(TrainingConfig{100, 200, 0.2, 4, 2048}), ValidationError);
  EXPECT_THROW(ablation_grid(TrainingConfig{128, 256, 0.3, 4, 2048}), ValidationError);
  EXPECT_THROW(ablation_grid(TrainingConfig{128, 256, 0.2, 5, 2048}), ValidationError);
  EXPECT_THROW(ablation_grid(TrainingConfig{128, 256, 0.2, 4, 4096}), ValidationError);
  EXPECT_THROW(ablation_grid(TrainingConfig{128, 128, 0.2, 4, 2048}), ValidationError);
}

TEST(Ablation, BaselineFromJson) {
  const auto [c, axes] = baseline_from_json(nlohmann::json::parse(
      R"({"lora_rank": 64, "lora_alpha": 128, "axes": {"epoch": [4]}})"));
  EXPECT_EQ(c.lora_rank, 64);
  const auto plan = ablation_grid(c, axes);
  EXPECT_EQ(plan.runs.size(), 10u);  // 1 + 4 lora + 2 dropout + 3 max_length
  EXPECT_EQ(to_json(plan)["runs"][1]["label"], "lora_rank=8,lora_alpha=16");
}

// ---------------------------------------------------------------- execute

TEST(ExecuteRuns, CompletesAllPairsAndWritesReports) {
  TempDir dir;
  ScriptedServer s;
  s.model->degraded = {"weak"};
  const auto c = testsupport::fixture_config({"strong", "weak"}, s.server.url(), dir.path());
  const auto result = execute_runs(plan_runs(c), c);

  EXPECT_EQ(result.manifest.count(PairStatus::Complete), 24u);
  EXPECT_FALSE(result.any_failed());
  EXPECT_EQ(result.reports.size(), 24u);
  EXPECT_EQ(s.server.calls(), 240);

  const auto& apq = result.reports.at({"strong", ScenarioKind::APQ});
  EXPECT_DOUBLE_EQ(apq.metric("accuracy"), 1.0);
  EXPECT_DOUBLE_EQ(result.reports.at({"weak", ScenarioKind::APQ}).metric("accuracy"), 0.5);
  EXPECT_DOUBLE_EQ(result.reports.at({"strong", ScenarioKind::HFR}).metric("mrr"), 1.0);
  EXPECT_DOUBLE_EQ(result.reports.at({"strong", ScenarioKind::TCMEE}).metric("f1"), 1.0);
  EXPECT_NEAR(result.reports.at({"strong", ScenarioKind::TLAW}).metric("bleu-1"), 1.0, 1e-12);
  EXPECT_NEAR(result.reports.at({"strong", ScenarioKind::TLAW}).metric("bertscore"), 1.0, 1e-9);

  for (auto k : scenarios::kAllKinds) {
    for (const char* m : {"strong", "weak"}) {
      EXPECT_TRUE(fs::exists(pair_report_path(c.output_dir, m, k)));
      EXPECT_TRUE(fs::exists(pair_items_path(c.output_dir, m, k)));
    }
    const auto csv = fsutil::read_file(leaderboard_path(c.output_dir, k));
    EXPECT_EQ(csv_models(csv), (std::vector<std::string>{"strong", "weak"})) << scenarios::to_string(k);
  }

  const auto report = nlohmann::json::parse(
      fsutil::read_file(pair_report_path(c.output_dir, "strong", ScenarioKind::APQ)));
  EXPECT_EQ(report["model"], "strong");
  EXPECT_EQ(report["scenario"], "APQ");
  EXPECT_EQ(report["items"], 10);
  EXPECT_TRUE(report.contains("parse_failure_rate"));
  EXPECT_TRUE(report["metrics"].contains("accuracy"));

  const auto summary = nlohmann::json::parse(fsutil::read_file(summary_path(c.output_dir)));
  EXPECT_EQ(summary["complete"], 24);
  EXPECT_EQ(summary["pairs"].size(), 24u);

  const auto on_disk = load_manifest(c.output_dir);
  EXPECT_EQ(on_disk.count(PairStatus::Complete), 24u);
  for (const auto& p : on_disk.pairs) EXPECT_FALSE(p.finished_at.empty());
}

TEST(ExecuteRuns, ReportTreeIsByteIdenticalAcrossRuns) {
  TempDir a, b;
  ScriptedServer s;
  s.model->degraded = {"weak"};
  const auto ca = testsupport::fixture_config({"strong", "weak"}, s.server.url(), a.path());
  const auto cb = testsupport::fixture_config({"strong", "weak"}, s.server.url(), b.path());
  execute_runs(plan_runs(ca), ca);
  execute_runs(plan_runs(cb), cb);
  const auto ta = testsupport::snapshot_tree(reports_dir(ca.output_dir));
  const auto tb = testsupport::snapshot_tree(reports_dir(cb.output_dir));
  EXPECT_EQ(ta.size(), 2u * 12 * 2 + 12 + 1);
  EXPECT_EQ(ta, tb);

  regenerate_reports(ca.output_dir);
  EXPECT_EQ(testsupport::snapshot_tree(reports_dir(ca.output_dir)), ta);
}

TEST(ExecuteRuns, ResumeRerunsOnlyTheDeletedPairFromCache) {
  TempDir dir;
  ScriptedServer s;
  const auto c = testsupport::fixture_config({"a", "b"}, s.server.url(), dir.path());
  execute_runs(plan_runs(c), c);
  const auto before = testsupport::snapshot_tree(reports_dir(c.output_dir));
  const int calls = s.server.calls();

  fs::remove(pair_report_path(c.output_dir, "b", ScenarioKind::HFR));
  auto planned = plan_runs(c);
  adopt_statuses(planned, load_manifest(c.output_dir));
  const auto result = execute_runs(planned, c);

  EXPECT_EQ(result.executed, 1u);
  EXPECT_EQ(s.server.calls(), calls);
  EXPECT_EQ(testsupport::snapshot_tree(reports_dir(c.output_dir)), before);
}

TEST(ExecuteRuns, FailingPairDoesNotStopOthers) {
  TempDir dir;
  ScriptedServer s;
  s.model->broken_kinds = {{"b", ScenarioKind::TCMCD}};
  const auto c = testsupport::fixture_config({"a", "b"}, s.server.url(), dir.path());
  const auto result = execute_runs(plan_runs(c), c);

  EXPECT_TRUE(result.any_failed());
  EXPECT_EQ(result.manifest.count(PairStatus::Failed), 1u);
  EXPECT_EQ(result.manifest.count(PairStatus::Complete), 23u);
  auto m = result.manifest;
  const auto& failed = m.pair("b", ScenarioKind::TCMCD);
  EXPECT_EQ(failed.status, PairStatus::Failed);
  EXPECT_EQ(failed.failed_requests, 10u);
  EXPECT_NE(failed.error.find("HTTP 400"), std::string::npos);
  EXPECT_FALSE(fs::exists(pair_report_path(c.output_dir, "b", ScenarioKind::TCMCD)));

  const auto csv = fsutil::read_file(leaderboard_path(c.output_dir, ScenarioKind::TCMCD));
  EXPECT_NE(csv.find("b,,2,0"), std::string::npos);
}

TEST(ExecuteRuns, NetworkCallsAcrossResumeEqualDistinctTriples) {
  TempDir dir;
  ScriptedServer s;
  s.model->broken_kinds = {{"b", ScenarioKind::APQ}};
  const auto c = testsupport::fixture_config({"a", "b"}, s.server.url(), dir.path());
  execute_runs(plan_runs(c), c);

  s.model->broken_kinds.clear();
  auto planned = plan_runs(c);
  adopt_statuses(planned, load_manifest(c.output_dir));
  const auto result = execute_runs(planned, c);
  EXPECT_EQ(result.executed, 1u);
  EXPECT_FALSE(result.any_failed());
  EXPECT_EQ(s.ok->load(), 2 * 12 * 10);
}

TEST(ExecuteRuns, ChangedDatasetBlocksResume) {
  TempDir dir;
  ScriptedServer s;
  auto c = testsupport::fixture_config({"a"}, s.server.url(), dir.path());
  const auto copy = dir / "apq.jsonl";
  fs::copy_file(testsupport::scenario_fixture(ScenarioKind::APQ), copy);
  c.scenarios = {{ScenarioKind::APQ, copy}};
  const auto planned = plan_runs(c);
  std::ofstream(copy, std::ios::app) << "\n";
  EXPECT_THROW(execute_runs(planned, c), ValidationError);
  EXPECT_EQ(s.server.calls(), 0);

  auto other = plan_runs(c);
  other.config_digest = "different";
  EXPECT_THROW(adopt_statuses(other, planned), ValidationError);
}

TEST(ExecuteRuns, MissingCredentialIsARunLevelError) {
  TempDir dir;
  ScriptedServer s;
  auto c = testsupport::fixture_config({"a"}, s.server.url(), dir.path());
  c.endpoints[0].credential_env = "TCMBENCH_TEST_UNSET_CREDENTIAL";
  ::unsetenv("TCMBENCH_TEST_UNSET_CREDENTIAL");
  EXPECT_THROW(execute_runs(plan_runs(c), c), ConfigError);
  EXPECT_EQ(s.server.calls(), 0);
}

TEST(ExecuteRuns, CredentialNeverReachesDisk) {
  TempDir dir;
  ScriptedServer s;
  auto c = testsupport::fixture_config({"a"}, s.server.url(), dir.path());
  c.scenarios = {{ScenarioKind::APQ, testsupport::scenario_fixture(ScenarioKind::APQ)}};
  c.endpoints[0].credential_env = "TCMBENCH_TEST_RUNNER_KEY";
  ::setenv("TCMBENCH_TEST_RUNNER_KEY", "sk-very-secret-value", 1);
  execute_runs(plan_runs(c), c);
  ::unsetenv("TCMBENCH_TEST_RUNNER_KEY");
  EXPECT_EQ(s.server.auth_headers().front(), "Bearer sk-very-secret-value");
  for (const auto& [path, content] : testsupport::snapshot_tree(dir.path()))
    EXPECT_EQ(content.find("sk-very-secret-value"), std::string::npos) << path;
}
