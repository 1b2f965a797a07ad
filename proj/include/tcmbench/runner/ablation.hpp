#pragma once

#include <algorithm>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "tcmbench/util/errors.hpp"

namespace tcmbench::runner {

/// One fine-tuning configuration. The harness does not train; these are
/// run descriptors for an external trainer and labels for scoring buckets.
struct TrainingConfig {
  int lora_rank = 128;
  int lora_alpha = 256;
  double dropout = 0.2;
  int epoch = 4;
  int max_length = 2048;

  friend bool operator==(const TrainingConfig&, const TrainingConfig&) = default;
};

struct AblationAxes {
  std::vector<int> lora_rank{8, 16, 32, 64, 128};
  std::vector<int> lora_alpha{16, 32, 64, 128, 256};
  std::vector<double> dropout{0.0, 0.2, 0.4};
  std::vector<int> epoch{2, 4, 6};
  std::vector<int> max_length{256, 512, 1024, 2048};
  int alpha_per_rank = 2;  // rank and alpha move together
};

struct AblationRun {
  std::string label;
  std::string axis;  // "baseline", "lora", "epoch", "dropout" or "max_length"
  TrainingConfig config;
};

struct AblationPlan {
  std::string baseline_label = "baseline";
  TrainingConfig baseline;
  AblationAxes axes;
  std::vector<AblationRun> runs;  // baseline first
};

namespace detail {

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

template <class T>
bool contains(const std::vector<T>& axis, T v) {
  return std::find(axis.begin(), axis.end(), v) != axis.end();
}

}  // namespace detail

/// Axes on which two configs differ, with rank and alpha counted as the
/// single coupled axis "lora".
inline std::vector<std::string> differing_axes(const TrainingConfig& a, const TrainingConfig& b) {
  std::vector<std::string> out;
  if (a.lora_rank != b.lora_rank || a.lora_alpha != b.lora_alpha) out.push_back("lora");
  if (a.epoch != b.epoch) out.push_back("epoch");
  if (a.dropout != b.dropout) out.push_back("dropout");
  if (a.max_length != b.max_length) out.push_back("max_length");
  return out;
}

/// The baseline plus one run per non-baseline value on each axis, changing
/// only that axis. Rank variants carry alpha = rank * alpha_per_rank.
inline AblationPlan ablation_grid(const TrainingConfig& baseline, const AblationAxes& axes = {}) {
  using detail::contains;
  auto outside = [](const std::string& axis, const std::string& v) {
    return ValidationError("baseline " + axis + "=" + v + " is not on its axis");
  };
  if (axes.alpha_per_rank <= 0) throw ValidationError("alpha_per_rank must be positive");
  if (!contains(axes.lora_rank, baseline.lora_rank))
    throw outside("lora_rank", std::to_string(baseline.lora_rank));
  if (!contains(axes.lora_alpha, baseline.lora_alpha))
    throw outside("lora_alpha", std::to_string(baseline.lora_alpha));
  if (baseline.lora_alpha != baseline.lora_rank * axes.alpha_per_rank)
    throw ValidationError("baseline lora_alpha must be " + std::to_string(axes.alpha_per_rank) +
                          " x lora_rank");
  if (!contains(axes.dropout, baseline.dropout))
    throw outside("dropout", detail::format_number(baseline.dropout));
  if (!contains(axes.epoch, baseline.epoch)) throw outside("epoch", std::to_string(baseline.epoch));
  if (!contains(axes.max_length, baseline.max_length))
    throw outside("max_length", std::to_string(baseline.max_length));

  AblationPlan plan;
  plan.baseline = baseline;
  plan.axes = axes;
  plan.runs.push_back({plan.baseline_label, "baseline", baseline});

  for (int rank : axes.lora_rank) {
    if (rank == baseline.lora_rank) continue;
    const int alpha = rank * axes.alpha_per_rank;
    if (!contains(axes.lora_alpha, alpha))
      throw ValidationError("lora_alpha=" + std::to_string(alpha) + " for lora_rank=" +
                            std::to_string(rank) + " is not on the alpha axis");
    auto c = baseline;
    c.lora_rank = rank;
    c.lora_alpha = alpha;
    plan.runs.push_back(
        {"lora_rank=" + std::to_string(rank) + ",lora_alpha=" + std::to_string(alpha), "lora", c});
  }
  for (int e : axes.epoch) {
    if (e == baseline.epoch) continue;
    auto c = baseline;
    c.epoch = e;
    plan.runs.push_back({"epoch=" + std::to_string(e), "epoch", c});
  }
  for (double d : axes.dropout) {
    if (d == baseline.dropout) continue;
    auto c = baseline;
    c.dropout = d;
    plan.runs.push_back({"dropout=" + detail::format_number(d), "dropout", c});
  }
  for (int len : axes.max_length) {
    if (len == baseline.max_length) continue;
    auto c = baseline;
    c.max_length = len;
    plan.runs.push_back({"max_length=" + std::to_string(len), "max_length", c});
  }
  return plan;
}

inline nlohmann::ordered_json to_json(const TrainingConfig& c) {
  nlohmann::ordered_json j;
  j["lora_rank"] = c.lora_rank;
  j["lora_alpha"] = c.lora_alpha;
  j["dropout"] = c.dropout;
  j["epoch"] = c.epoch;
  j["max_length"] = c.max_length;
  return j;
}

inline nlohmann::ordered_json to_json(const AblationPlan& p) {
  nlohmann::ordered_json j;
  j["baseline"] = to_json(p.baseline);
  auto& runs = j["runs"] = nlohmann::ordered_json::array();
  for (const auto& r : p.runs) {
    nlohmann::ordered_json e;
    e["label"] = r.label;
    e["axis"] = r.axis;
    e["config"] = to_json(r.config);
    runs.push_back(std::move(e));
  }
  return j;
}

/// Reads {"lora_rank", "lora_alpha", "dropout", "epoch", "max_length",
/// "axes": {...}}; absent keys keep their defaults.
inline std::pair<TrainingConfig, AblationAxes> baseline_from_json(const nlohmann::json& j) {
  TrainingConfig c;
  AblationAxes a;
  try {
    c.lora_rank = j.value("lora_rank", c.lora_rank);
    c.lora_alpha = j.value("lora_alpha", c.lora_alpha);
    c.dropout = j.value("dropout", c.dropout);
    c.epoch = j.value("epoch", c.epoch);
    c.max_length = j.value("max_length", c.max_length);
    if (j.contains("axes")) {
      const auto& x = j.at("axes");
      a.lora_rank = x.value("lora_rank", a.lora_rank);
      a.lora_alpha = x.value("lora_alpha", a.lora_alpha);
      a.dropout = x.value("dropout", a.dropout);
      a.epoch = x.value("epoch", a.epoch);
      a.max_length = x.value("max_length", a.max_length);
      a.alpha_per_rank = x.value("alpha_per_rank", a.alpha_per_rank);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("ablation baseline: ") + e.what());
  }
  return {c, a};
}

}  // namespace tcmbench::runner
