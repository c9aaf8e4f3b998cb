#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "surfcomp/metrics/metrics.hpp"

namespace surfcomp {

struct EvaluationPair {
  std::filesystem::path pred_path;
  std::filesystem::path gt_path;
  std::string model_id;
};

/// Reads a pairing file: CSV with header pred_path,gt_path,model_id, or a JSON
/// array of objects with those keys. Relative paths resolve against the
/// pairing file's directory.
std::vector<EvaluationPair> read_pairing_file(const std::filesystem::path& path);

struct PairResult {
  EvaluationPair pair;
  std::optional<MetricsReport> report;
  std::string error;  ///< set when the pair could not be evaluated
};

struct BatchResult {
  std::vector<PairResult> pairs;
  std::optional<MetricsReport> mean;  ///< over successful pairs
  std::size_t failures = 0;
};

BatchResult evaluate_batch(const std::vector<EvaluationPair>& pairs, const MetricsConfig& config,
                           std::size_t workers = 0);

nlohmann::json report_to_json(const MetricsReport& r);
nlohmann::json batch_to_json(const BatchResult& batch, const MetricsConfig& config);

/// Table columns: model_id, L1-CD (x1e-3), L2-CD (x1e-3), Precision, Recall,
/// F-score, AUC; a final "mean" row.
std::string batch_to_csv(const BatchResult& batch);

}  // namespace surfcomp
