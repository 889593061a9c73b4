#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "flowgnn/error.hpp"
#include "flowgnn/flow.hpp"
#include "flowgnn/text.hpp"

namespace flowgnn {

/// Confusion matrix (rows = true class) with per-class recall and the
/// support-weighted average recall. Classes without support have no recall.
struct MetricsReport {
  std::vector<std::vector<std::uint64_t>> confusion;
  std::vector<std::optional<double>> per_class_recall;
  std::vector<std::uint64_t> supports;
  double weighted_average = 0.0;

  int classes() const { return static_cast<int>(supports.size()); }
};

inline MetricsReport evaluate(std::span<const int> predictions, std::span<const int> truths,
                              int classes = kNumAttackTypes) {
  if (predictions.size() != truths.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(predictions.size()) + " predictions vs " +
                                               std::to_string(truths.size()) + " truths");
  }
  MetricsReport r;
  const auto n = static_cast<std::size_t>(classes);
  r.confusion.assign(n, std::vector<std::uint64_t>(n, 0));
  r.supports.assign(n, 0);
  r.per_class_recall.assign(n, std::nullopt);
  for (std::size_t i = 0; i < truths.size(); ++i) {
    const int t = truths[i];
    const int p = predictions[i];
    if (t < 0 || t >= classes || p < 0 || p >= classes) {
      throw Error(ErrorCode::UnknownClass, "class index out of range at position " + std::to_string(i));
    }
    ++r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    ++r.supports[static_cast<std::size_t>(t)];
  }
  double weighted = 0.0;
  std::uint64_t total = 0;
  for (std::size_t c = 0; c < n; ++c) {
    if (r.supports[c] == 0) continue;
    const double recall = static_cast<double>(r.confusion[c][c]) / static_cast<double>(r.supports[c]);
    r.per_class_recall[c] = recall;
    weighted += static_cast<double>(r.supports[c]) * recall;
    total += r.supports[c];
  }
  r.weighted_average = total ? weighted / static_cast<double>(total) : 0.0;
  return r;
}

/// Support-weighted mean of externally supplied per-class recalls.
/// Classes with zero support or no recall are skipped.
inline double weighted_average(std::span<const std::optional<double>> recalls, std::span<const std::uint64_t> supports) {
  if (recalls.size() != supports.size()) throw Error(ErrorCode::LengthMismatch, "recall/support length");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t c = 0; c < recalls.size(); ++c) {
    if (!recalls[c] || supports[c] == 0) continue;
    num += static_cast<double>(supports[c]) * *recalls[c];
    den += static_cast<double>(supports[c]);
  }
  return den > 0 ? num / den : 0.0;
}

inline std::string class_name(int c, int classes) {
  if (classes == kNumAttackTypes) return std::string(kAttackTypeNames[static_cast<std::size_t>(c)]);
  return "class" + std::to_string(c);
}

inline nlohmann::ordered_json to_json(const MetricsReport& r) {
  nlohmann::ordered_json j;
  j["classes"] = nlohmann::ordered_json::array();
  for (int c = 0; c < r.classes(); ++c) j["classes"].push_back(class_name(c, r.classes()));
  j["supports"] = r.supports;
  auto recall = nlohmann::ordered_json::array();
  for (const auto& v : r.per_class_recall) {
    if (v) {
      recall.push_back(*v);
    } else {
      recall.push_back(nullptr);
    }
  }
  j["per_class_recall"] = recall;
  j["weighted_average"] = r.weighted_average;
  j["confusion"] = r.confusion;
  return j;
}

/// One row per class and a final "Weighted Average" row; "-" marks classes
/// without support.
inline void write_metrics_csv(std::ostream& out, const MetricsReport& r) {
  out << "class,recall\n";
  for (int c = 0; c < r.classes(); ++c) {
    out << class_name(c, r.classes()) << ',';
    const auto& v = r.per_class_recall[static_cast<std::size_t>(c)];
    out << (v ? text::format_double(*v) : std::string("-")) << '\n';
  }
  out << "Weighted Average," << text::format_double(r.weighted_average) << '\n';
}

}  // namespace flowgnn
