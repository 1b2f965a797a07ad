#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcmbench/runner/plan.hpp"
#include "tcmbench/scenarios/evaluate.hpp"
#include "tcmbench/util/errors.hpp"
#include "tcmbench/util/fs.hpp"
#include "tcmbench/util/log.hpp"

namespace tcmbench::runner {

using scenarios::MetricReport;

// ---------------------------------------------------------------- leaderboard

struct LeaderboardRow {
  std::string model_id;
  std::vector<std::optional<double>> values;  // one per metric; nullopt = missing
  std::vector<int> ranks;
  std::vector<bool> top3;
};

struct Leaderboard {
  std::vector<std::string> metrics;
  std::vector<LeaderboardRow> rows;  // ordered by the first metric
};

/// model id -> metric name -> value
using ModelMetrics = std::map<std::string, std::map<std::string, double>>;

/// Dense ranking per metric, higher is better. Missing or NaN values rank
/// after every present value and are never flagged top-3. Rows are ordered
/// by the first metric's rank, then model id.
inline Leaderboard leaderboard(const ModelMetrics& reports, const std::vector<std::string>& metrics) {
  if (reports.empty()) throw ValidationError("leaderboard needs at least one model");
  if (metrics.empty()) throw ValidationError("leaderboard needs at least one metric");
  Leaderboard lb;
  lb.metrics = metrics;
  for (const auto& [model, values] : reports) {
    LeaderboardRow row;
    row.model_id = model;
    for (const auto& m : metrics) {
      auto it = values.find(m);
      if (it != values.end() && !std::isnan(it->second))
        row.values.emplace_back(it->second);
      else
        row.values.emplace_back(std::nullopt);
    }
    row.ranks.assign(metrics.size(), 0);
    row.top3.assign(metrics.size(), false);
    lb.rows.push_back(std::move(row));
  }
  for (std::size_t c = 0; c < metrics.size(); ++c) {
    std::vector<double> distinct;
    for (const auto& r : lb.rows)
      if (r.values[c]) distinct.push_back(*r.values[c]);
    std::sort(distinct.begin(), distinct.end(), std::greater<>());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    for (auto& r : lb.rows) {
      if (!r.values[c]) {
        r.ranks[c] = static_cast<int>(distinct.size()) + 1;
        continue;
      }
      const auto pos = std::find(distinct.begin(), distinct.end(), *r.values[c]) - distinct.begin();
      r.ranks[c] = static_cast<int>(pos) + 1;
      r.top3[c] = r.ranks[c] <= 3;
    }
  }
  std::sort(lb.rows.begin(), lb.rows.end(), [](const auto& a, const auto& b) {
    return a.ranks[0] != b.ranks[0] ? a.ranks[0] < b.ranks[0] : a.model_id < b.model_id;
  });
  return lb;
}

inline std::string format_fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

/// Columns: model, then value/rank/top3 for each metric. Missing values
/// are empty cells.
inline std::string to_csv(const Leaderboard& lb) {
  auto quote = [](const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
      if (ch == '"') out += '"';
      out += ch;
    }
    return out + "\"";
  };
  std::ostringstream out;
  out << "model";
  for (const auto& m : lb.metrics)
    out << ',' << quote(m) << ',' << quote(m + "_rank") << ',' << quote(m + "_top3");
  out << '\n';
  for (const auto& r : lb.rows) {
    out << quote(r.model_id);
    for (std::size_t c = 0; c < lb.metrics.size(); ++c)
      out << ',' << (r.values[c] ? format_fixed(*r.values[c]) : std::string()) << ',' << r.ranks[c]
          << ',' << (r.top3[c] ? 1 : 0);
    out << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------- report tree

inline fs::path reports_dir(const fs::path& output_dir) { return output_dir / "reports"; }

inline fs::path pair_report_path(const fs::path& output_dir, const std::string& model, ScenarioKind k) {
  return reports_dir(output_dir) / "models" / fsutil::safe_component(model) /
         (std::string(scenarios::to_string(k)) + ".json");
}

inline fs::path pair_items_path(const fs::path& output_dir, const std::string& model, ScenarioKind k) {
  return reports_dir(output_dir) / "models" / fsutil::safe_component(model) /
         (std::string(scenarios::to_string(k)) + ".items.jsonl");
}

inline fs::path leaderboard_path(const fs::path& output_dir, ScenarioKind k) {
  return reports_dir(output_dir) / "leaderboards" / (std::string(scenarios::to_string(k)) + ".csv");
}

inline fs::path summary_path(const fs::path& output_dir) { return reports_dir(output_dir) / "summary.json"; }

/// Writes `<model>/<KIND>.items.jsonl` first and `<model>/<KIND>.json` last,
/// so an existing report file implies complete item scores.
inline void write_pair_report(const fs::path& output_dir, const std::string& model,
                              const MetricReport& r) {
  std::string lines;
  for (const auto& item : r.items) lines += scenarios::to_json(item).dump() + "\n";
  fsutil::write_atomic(pair_items_path(output_dir, model, r.kind), lines);
  nlohmann::ordered_json j;
  j["model"] = model;
  const auto body = scenarios::to_json(r);
  for (const auto& [k, v] : body.items()) j[k] = v;
  fsutil::write_atomic(pair_report_path(output_dir, model, r.kind), j.dump(2) + "\n");
}

/// Reads a pair report back; nullopt when either file is missing.
inline std::optional<MetricReport> read_pair_report(const fs::path& output_dir, const std::string& model,
                                                    ScenarioKind k) {
  const auto rp = pair_report_path(output_dir, model, k);
  const auto ip = pair_items_path(output_dir, model, k);
  if (!fs::exists(rp) || !fs::exists(ip)) return std::nullopt;
  try {
    // ordered_json keeps metric order as written.
    const auto j = nlohmann::ordered_json::parse(fsutil::read_file(rp));
    MetricReport r;
    r.kind = scenarios::parse_kind(j.at("scenario").get<std::string>());
    if (r.kind != k || j.at("model").get<std::string>() != model)
      throw ValidationError("report does not match its path");
    r.item_count = j.at("items").get<std::size_t>();
    r.parse_failures = j.at("parse_failures").get<std::size_t>();
    r.parse_failure_rate = j.at("parse_failure_rate").get<double>();
    for (const auto& [name, v] : j.at("metrics").items()) r.metrics.emplace_back(name, v.get<double>());
    std::istringstream lines(fsutil::read_file(ip));
    for (std::string line; std::getline(lines, line);) {
      if (line.empty()) continue;
      const auto item = nlohmann::ordered_json::parse(line);
      scenarios::ItemScore s;
      s.id = item.at("id").get<std::string>();
      s.parse_rule = item.at("parse_rule").get<std::string>();
      s.parse_failed = item.at("parse_failed").get<bool>();
      for (const auto& [name, v] : item.at("metrics").items()) s.metrics.emplace_back(name, v.get<double>());
      r.items.push_back(std::move(s));
    }
    if (r.items.size() != r.item_count) throw ValidationError("item count does not match items file");
    return r;
  } catch (const std::exception& e) {
    log::warn("ignoring unreadable report " + rp.string() + ": " + e.what());
    return std::nullopt;
  }
}

using PairKey = std::pair<std::string, ScenarioKind>;  // (model id, scenario)
using PairReports = std::map<PairKey, MetricReport>;

/// Leaderboard for one scenario over every model in the manifest; models
/// without a report get empty values.
inline Leaderboard scenario_leaderboard(const PairReports& reports, const RunManifest& manifest,
                                        ScenarioKind k) {
  ModelMetrics mm;
  for (const auto& p : manifest.pairs) {
    if (p.kind != k) continue;
    auto& row = mm[p.model_id];
    auto it = reports.find({p.model_id, k});
    if (it != reports.end())
      for (const auto& [name, v] : it->second.metrics) row[name] = v;
  }
  return leaderboard(mm, scenarios::metric_suite_for(k));
}

/// Writes the full report tree under `<output_dir>/reports`. The tree holds
/// no timestamps, so identical inputs give identical bytes.
inline std::vector<fs::path> emit_reports(const PairReports& reports, const RunManifest& manifest,
                                          const fs::path& output_dir) {
  std::vector<fs::path> written;
  for (const auto& [key, r] : reports) {
    write_pair_report(output_dir, key.first, r);
    written.push_back(pair_items_path(output_dir, key.first, r.kind));
    written.push_back(pair_report_path(output_dir, key.first, r.kind));
  }

  std::vector<std::string> models;
  std::vector<ScenarioKind> kinds;
  for (const auto& p : manifest.pairs) {
    if (std::find(models.begin(), models.end(), p.model_id) == models.end()) models.push_back(p.model_id);
    if (std::find(kinds.begin(), kinds.end(), p.kind) == kinds.end()) kinds.push_back(p.kind);
  }
  std::sort(kinds.begin(), kinds.end());

  for (auto k : kinds) {
    const auto path = leaderboard_path(output_dir, k);
    fsutil::write_atomic(path, to_csv(scenario_leaderboard(reports, manifest, k)));
    written.push_back(path);
  }

  nlohmann::ordered_json s;
  s["run_id"] = manifest.run_id;
  s["config_digest"] = manifest.config_digest;
  s["decode"] = {{"temperature", manifest.decode.temperature}, {"max_tokens", manifest.decode.max_tokens}};
  s["models"] = models;
  auto& sk = s["scenarios"] = nlohmann::ordered_json::array();
  for (auto k : kinds) sk.push_back(std::string(scenarios::to_string(k)));
  s["complete"] = manifest.count(PairStatus::Complete);
  s["failed"] = manifest.count(PairStatus::Failed);
  s["pending"] = manifest.count(PairStatus::Pending);
  auto& pairs = s["pairs"] = nlohmann::ordered_json::array();
  for (const auto& p : manifest.pairs) {
    nlohmann::ordered_json e;
    e["model"] = p.model_id;
    e["scenario"] = std::string(scenarios::to_string(p.kind));
    e["status"] = std::string(to_string(p.status));
    auto it = reports.find({p.model_id, p.kind});
    if (it != reports.end()) {
      e["items"] = it->second.item_count;
      e["parse_failure_rate"] = it->second.parse_failure_rate;
      e["metrics"] = scenarios::metrics_to_json(it->second.metrics);
    }
    pairs.push_back(std::move(e));
  }
  fsutil::write_atomic(summary_path(output_dir), s.dump(2) + "\n");
  written.push_back(summary_path(output_dir));
  return written;
}

/// Rebuilds leaderboards and the summary from the reports on disk.
inline std::vector<fs::path> regenerate_reports(const fs::path& output_dir) {
  const auto manifest = load_manifest(output_dir);
  PairReports reports;
  for (const auto& p : manifest.pairs) {
    if (p.status != PairStatus::Complete) continue;
    if (auto r = read_pair_report(output_dir, p.model_id, p.kind))
      reports.emplace(PairKey{p.model_id, p.kind}, std::move(*r));
  }
  return emit_reports(reports, manifest, output_dir);
}

}  // namespace tcmbench::runner
