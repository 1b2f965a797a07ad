#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "tcmbench/corpus.hpp"
#include "tcmbench/datasets.hpp"
#include "tcmbench/modelclient.hpp"
#include "tcmbench/runner.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/fs.hpp"
#include "tcmbench/util/log.hpp"

namespace fs = std::filesystem;
using namespace tcmbench;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kPartial = 2;

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump(2) << "\n"; }

// ------------------------------------------------------------------- eval

struct EvalRunArgs {
  std::string config;
  std::vector<std::string> models;
  std::vector<std::string> scenarios;
  bool resume = false;
};

int eval_run(const EvalRunArgs& a) {
  auto config = runner::load_config(a.config);
  if (!a.models.empty()) {
    std::vector<modelclient::ModelEndpoint> keep;
    for (const auto& id : a.models) {
      auto it = std::find_if(config.endpoints.begin(), config.endpoints.end(),
                             [&](const auto& e) { return e.model_id == id; });
      if (it == config.endpoints.end()) throw ValidationError("--model " + id + " is not in the config");
      keep.push_back(*it);
    }
    config.endpoints = std::move(keep);
  }
  if (!a.scenarios.empty()) {
    std::map<scenarios::ScenarioKind, fs::path> keep;
    for (const auto& s : a.scenarios) {
      const auto k = scenarios::parse_kind(s);
      auto it = config.scenarios.find(k);
      if (it == config.scenarios.end()) throw ValidationError("--scenario " + s + " is not in the config");
      keep.insert(*it);
    }
    config.scenarios = std::move(keep);
  }

  auto manifest = runner::plan_runs(config);
  if (a.resume && fs::exists(runner::manifest_file(config.output_dir))) {
    runner::adopt_statuses(manifest, runner::load_manifest(config.output_dir));
    log::info("resuming " + manifest.run_id + ": " +
              std::to_string(manifest.count(runner::PairStatus::Complete)) + " of " +
              std::to_string(manifest.pairs.size()) + " pairs already complete");
  }
  const auto result = runner::execute_runs(std::move(manifest), config);

  std::cout << result.manifest.run_id << ": " << result.manifest.count(runner::PairStatus::Complete)
            << " complete, " << result.manifest.count(runner::PairStatus::Failed) << " failed ("
            << result.executed << " executed)\n";
  for (const auto& p : result.manifest.pairs)
    if (p.status == runner::PairStatus::Failed)
      std::cout << "  failed " << p.model_id << "/" << scenarios::to_string(p.kind) << ": " << p.error << "\n";
  std::cout << "reports: " << runner::reports_dir(config.output_dir).string() << "\n";
  return result.any_failed() ? kPartial : kOk;
}

int eval_report(const std::string& run_dir) {
  const auto written = runner::regenerate_reports(run_dir);
  for (const auto& p : written)
    if (p.extension() == ".csv" || p.filename() == "summary.json") std::cout << p.string() << "\n";
  const auto m = runner::load_manifest(run_dir);
  return m.count(runner::PairStatus::Complete) == m.pairs.size() ? kOk : kPartial;
}

// ---------------------------------------------------------------- dataset

int dataset_validate(const std::string& file, bool write_manifest) {
  const auto ds = datasets::load_dataset(file);
  const auto stats = datasets::dataset_stats(ds);
  nlohmann::ordered_json j;
  j["file"] = file;
  j["kind"] = ds.kind ? nlohmann::ordered_json(std::string(scenarios::to_string(*ds.kind))) : nullptr;
  j["records"] = stats.records;
  j["total_chars"] = stats.total_chars;
  j["per_source"] = stats.per_source;
  j["digest"] = ds.manifest.digest;
  j["manifest"] = ds.declared ? "matches" : "absent";
  if (write_manifest) {
    fsutil::write_atomic(datasets::manifest_path(file), datasets::to_json(ds.manifest).dump(2) + "\n");
    j["manifest"] = "written";
  }
  print_json(j);
  return kOk;
}

int dataset_split(const std::string& file, std::uint64_t seed, std::size_t test_count,
                  const std::string& out_dir, double threshold) {
  const auto ds = datasets::load_dataset(file);
  datasets::dataset_stats(ds);
  const auto split = datasets::split_sample(ds.records, {seed, test_count});
  const fs::path src(file);
  const fs::path dir = out_dir.empty() ? src.parent_path() : fs::path(out_dir);
  auto stem = src.filename().string();
  if (stem.size() > 6 && stem.ends_with(".jsonl")) stem.resize(stem.size() - 6);
  const auto train_path = dir / (stem + ".train.jsonl");
  const auto test_path = dir / (stem + ".test.jsonl");
  datasets::save_dataset(train_path, split.train);
  datasets::save_dataset(test_path, split.test);

  auto texts = [](const std::vector<scenarios::ScenarioExample>& rs) {
    std::vector<datasets::TextRecord> out;
    for (const auto& r : rs) out.push_back({r.id, r.question});
    return out;
  };
  const auto leak = datasets::leakage_check(texts(split.train), texts(split.test), threshold);
  nlohmann::ordered_json j;
  j["train"] = {{"path", train_path.string()}, {"records", split.train.size()}};
  j["test"] = {{"path", test_path.string()}, {"records", split.test.size()}};
  j["seed"] = seed;
  j["leakage"] = {{"threshold", threshold},
                  {"exact_matches", leak.exact_matches.size()},
                  {"near_matches", leak.near_matches.size()}};
  print_json(j);
  if (!leak.exact_matches.empty() || !leak.near_matches.empty())
    log::warn("train/test overlap found: " + std::to_string(leak.exact_matches.size()) + " exact, " +
              std::to_string(leak.near_matches.size()) + " near");
  return kOk;
}

// ----------------------------------------------------------------- corpus

corpus::SourceTag source_or_default(const std::string& s) {
  if (s.empty()) return corpus::SourceTag::PublicDataset;
  if (auto t = corpus::try_parse_source(s)) return *t;
  throw ValidationError("unknown source tag: " + s);
}

int corpus_dedup(const std::string& dir, const std::string& out, double threshold,
                 const std::string& blocklist, const std::string& source) {
  auto docs = corpus::load_documents(dir, source_or_default(source));
  const auto total = docs.size();
  corpus::DedupOptions opt;
  opt.threshold = threshold;
  if (!blocklist.empty()) opt.blocklist = corpus::load_blocklist(blocklist);
  const auto r = corpus::dedup_corpus(std::move(docs), opt);

  std::map<std::string, std::size_t> by_stage;
  for (const auto& d : r.drops) ++by_stage[d.stage];
  nlohmann::ordered_json j;
  j["documents"] = total;
  j["kept"] = r.kept.size();
  j["dropped"] = by_stage;
  j["near_pairs"] = r.near.size();
  j["manifest"] = corpus::corpus_manifest(r.kept, {}).to_json();
  if (!out.empty()) {
    const fs::path o(out);
    for (const auto& d : r.kept) fsutil::write_atomic(o / "docs" / d.id, d.normalized);
    fsutil::write_atomic(o / "drops.jsonl",
                         corpus::to_jsonl(r.drops, [](const auto& d) { return corpus::to_json(d); }));
    fsutil::write_atomic(o / "near.jsonl",
                         corpus::to_jsonl(r.near, [](const auto& n) { return corpus::to_json(n); }));
    fsutil::write_atomic(o / "manifest.json", j["manifest"].dump(2) + "\n");
    j["out"] = out;
  }
  print_json(j);
  return kOk;
}

std::vector<nlohmann::json> read_record_dir(const fs::path& dir) {
  std::vector<fs::path> files;
  if (fs::is_regular_file(dir)) {
    files.push_back(dir);
  } else {
    if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    for (const auto& e : fs::recursive_directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".jsonl") files.push_back(e.path());
    std::sort(files.begin(), files.end());
  }
  std::vector<nlohmann::json> out;
  for (const auto& f : files) {
    auto part = corpus::read_jsonl(f);
    out.insert(out.end(), part.begin(), part.end());
  }
  return out;
}

struct BuildSftArgs {
  std::string dir;
  std::string strategy;
  std::string out;
  std::vector<std::string> templates;
  std::string endpoint;
  std::string cache;
  std::string rewrite_prompt;
  std::string source;
};

int corpus_build_sft(const BuildSftArgs& a) {
  const auto strategy = corpus::parse_strategy(a.strategy);
  corpus::BuildResult built;
  std::vector<corpus::CorpusDocument> docs;

  if (strategy == corpus::Strategy::Linguisticise) {
    if (a.endpoint.empty()) throw ConfigError("strategy A needs --endpoint <file>");
    auto endpoint = modelclient::endpoint_from_json(nlohmann::json::parse(fsutil::read_file(a.endpoint)));
    modelclient::HttpChatClient client(endpoint);
    std::optional<modelclient::ResponseCache> cache;
    if (!a.cache.empty()) cache.emplace(a.cache);
    corpus::RewritePrompt prompt;
    if (!a.rewrite_prompt.empty()) {
      const auto j = nlohmann::json::parse(fsutil::read_file(a.rewrite_prompt));
      prompt.system = j.value("system", prompt.system);
      prompt.instruction = j.value("instruction", prompt.instruction);
    }
    corpus::RewriteFn rewrite = [&](const std::string& system, const std::string& text) {
      modelclient::ChatRequest req;
      req.messages = {{modelclient::Role::System, system}, {modelclient::Role::User, text}};
      return (cache ? modelclient::cached_complete(client, req, *cache) : client.complete(req)).text;
    };
    docs = corpus::dedup_exact(corpus::load_documents(a.dir, source_or_default(a.source))).kept;
    built = corpus::build_linguisticised(docs, rewrite, prompt);
  } else if (strategy == corpus::Strategy::Structured) {
    if (a.templates.empty()) throw ValidationError("strategy B needs at least one --template 'instruction/output'");
    std::vector<corpus::QaTemplate> tpls;
    for (const auto& t : a.templates) tpls.push_back(corpus::parse_qa_template(t));
    built = corpus::build_structured(read_record_dir(a.dir), tpls);
  } else {
    built = corpus::build_refined(read_record_dir(a.dir));
  }

  const auto lines = corpus::to_jsonl(built.records, [](const auto& r) { return corpus::to_json(r); });
  nlohmann::ordered_json j;
  j["strategy"] = std::string(corpus::to_string(strategy));
  j["records"] = built.records.size();
  j["skipped"] = built.skipped.size();
  j["dropped_empty"] = built.dropped_empty;
  j["dropped_duplicate"] = built.dropped_duplicate;
  const auto manifest = corpus::corpus_manifest(docs, built.records).to_json();
  if (a.out.empty()) {
    std::cout << lines;
    std::cerr << j.dump() << "\n";
    return built.skipped.empty() ? kOk : kPartial;
  }
  fsutil::write_atomic(a.out, lines);
  fsutil::write_atomic(a.out + ".drops.jsonl", corpus::to_jsonl(built.skipped, [](const auto& d) {
                         nlohmann::ordered_json e;
                         e["id"] = d.id;
                         e["reason"] = d.reason;
                         return e;
                       }));
  fsutil::write_atomic(a.out + ".manifest.json", manifest.dump(2) + "\n");
  j["out"] = a.out;
  j["manifest"] = manifest;
  print_json(j);
  return built.skipped.empty() ? kOk : kPartial;
}

// --------------------------------------------------------------- ablation

int ablation_plan(const std::string& baseline_file, const std::string& out) {
  nlohmann::json j = nlohmann::json::object();
  if (!baseline_file.empty()) {
    try {
      j = nlohmann::json::parse(fsutil::read_file(baseline_file));
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(baseline_file + ": " + e.what());
    }
  }
  const auto [baseline, axes] = runner::baseline_from_json(j);
  const auto plan = runner::ablation_grid(baseline, axes);
  const auto text = runner::to_json(plan).dump(2) + "\n";
  if (out.empty())
    std::cout << text;
  else
    fsutil::write_atomic(out, text);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for TCM language models"};
  app.require_subcommand(1);
  bool verbose = false, quiet = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");
  app.add_flag("-q,--quiet", quiet, "Warnings and errors only");

  int code = kOk;
  auto* eval = app.add_subcommand("eval", "Run benchmarks and build reports");
  eval->require_subcommand(1);
  EvalRunArgs run_args;
  auto* run = eval->add_subcommand("run", "Evaluate models over scenario datasets");
  run->add_option("--config", run_args.config, "Run config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--model", run_args.models, "Only these model ids");
  run->add_option("--scenario", run_args.scenarios, "Only these scenario kinds");
  run->add_flag("--resume", run_args.resume, "Skip pairs already complete in the output dir");
  run->callback([&] { code = eval_run(run_args); });

  std::string run_dir;
  auto* report = eval->add_subcommand("report", "Rebuild leaderboards and summary from a run dir");
  report->add_option("--run", run_dir, "Output dir of a run")->required()->check(CLI::ExistingDirectory);
  report->callback([&] { code = eval_report(run_dir); });

  auto* dataset = app.add_subcommand("dataset", "Inspect and split scenario datasets");
  dataset->require_subcommand(1);
  std::string ds_file;
  bool write_manifest = false;
  auto* validate = dataset->add_subcommand("validate", "Check a dataset file and its manifest");
  validate->add_option("file", ds_file, "Dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  validate->add_flag("--write-manifest", write_manifest, "Write the sidecar manifest");
  validate->callback([&] { code = dataset_validate(ds_file, write_manifest); });

  std::uint64_t seed = 0;
  std::size_t test_count = 0;
  std::string split_out;
  double leak_threshold = 0.8;
  auto* split = dataset->add_subcommand("split", "Seeded train/test split with a leakage check");
  split->add_option("file", ds_file, "Dataset (.jsonl)")->required()->check(CLI::ExistingFile);
  split->add_option("--seed", seed, "Shuffle seed")->required();
  split->add_option("--test-count", test_count, "Records in the test split")->required();
  split->add_option("--out-dir", split_out, "Where to write the splits (default: next to the input)");
  split->add_option("--leak-threshold", leak_threshold, "Near-match Jaccard threshold")->capture_default_str();
  split->callback([&] { code = dataset_split(ds_file, seed, test_count, split_out, leak_threshold); });

  auto* corpus_cmd = app.add_subcommand("corpus", "Corpus cleaning and instruction data");
  corpus_cmd->require_subcommand(1);
  std::string corpus_dir, dedup_out, blocklist, source;
  double threshold = 0.9;
  auto* dedup = corpus_cmd->add_subcommand("dedup", "Exact and near-duplicate removal");
  dedup->add_option("dir", corpus_dir, "Directory of text files")->required()->check(CLI::ExistingDirectory);
  dedup->add_option("--out", dedup_out, "Write kept documents, drop log and manifest here");
  dedup->add_option("--threshold", threshold, "Near-duplicate Jaccard threshold")->capture_default_str();
  dedup->add_option("--blocklist", blocklist, "Blocklist file")->check(CLI::ExistingFile);
  dedup->add_option("--source", source, "Source tag for files outside a tagged directory");
  dedup->callback([&] { code = corpus_dedup(corpus_dir, dedup_out, threshold, blocklist, source); });

  BuildSftArgs sft;
  auto* build = corpus_cmd->add_subcommand("build-sft", "Build instruction records");
  build->add_option("dir", sft.dir, "Input directory (text files for A, .jsonl records for B and C)")
      ->required()
      ->check(CLI::ExistingPath);
  build->add_option("--strategy", sft.strategy, "A, B or C")->required();
  build->add_option("--out", sft.out, "Output .jsonl (default: stdout)");
  build->add_option("--template", sft.templates, "Strategy B template 'instruction/output', fields written as 〈name〉");
  build->add_option("--endpoint", sft.endpoint, "Strategy A rewrite endpoint (JSON)")->check(CLI::ExistingFile);
  build->add_option("--cache", sft.cache, "Strategy A response cache dir");
  build->add_option("--rewrite-prompt", sft.rewrite_prompt, "Strategy A prompt (JSON with system, instruction)")
      ->check(CLI::ExistingFile);
  build->add_option("--source", sft.source, "Source tag for untagged files");
  build->callback([&] { code = corpus_build_sft(sft); });

  auto* ablation = app.add_subcommand("ablation", "Ablation planning");
  ablation->require_subcommand(1);
  std::string baseline_file, plan_out;
  auto* plan = ablation->add_subcommand("plan", "Emit the one-axis-at-a-time ablation grid");
  plan->add_option("--baseline", baseline_file, "Baseline config (JSON)")->check(CLI::ExistingFile);
  plan->add_option("--out", plan_out, "Write the plan here instead of stdout");
  plan->callback([&] { code = ablation_plan(baseline_file, plan_out); });

  app.parse_complete_callback([&] {
    if (verbose) log::set_level(log::Level::Debug);
    if (quiet) log::set_level(log::Level::Warn);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInvalid;
  }
  return code;
}
