#include "surfcomp/metrics/batch.hpp"

#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "surfcomp/geometry/mesh_io.hpp"
#include "surfcomp/util/error.hpp"
#include "surfcomp/util/parallel.hpp"

namespace surfcomp {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  return out;
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

}  // namespace

std::vector<EvaluationPair> read_pairing_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pairing file '" + path.string() + "'");
  const fs::path base = path.parent_path();
  std::vector<EvaluationPair> pairs;

  if (path.extension() == ".json") {
    try {
      const json list = json::parse(in);
      for (const auto& e : list) {
        pairs.push_back({resolve(base, e.at("pred_path").get<std::string>()),
                         resolve(base, e.at("gt_path").get<std::string>()),
                         e.value("model_id", std::to_string(pairs.size()))});
      }
    } catch (const json::exception& e) {
      throw ParseError(std::string("pairing file: ") + e.what(), 0, ParseError::Unit::kByteOffset);
    }
    return pairs;
  }

  std::string line;
  std::size_t line_no = 0;
  int pred_col = -1, gt_col = -1, id_col = -1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_row(line);
    if (pred_col < 0) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "pred_path") pred_col = static_cast<int>(i);
        if (cells[i] == "gt_path") gt_col = static_cast<int>(i);
        if (cells[i] == "model_id") id_col = static_cast<int>(i);
      }
      if (pred_col < 0 || gt_col < 0) {
        throw ParseError("pairing CSV header must name pred_path and gt_path", line_no, ParseError::Unit::kLine);
      }
      continue;
    }
    const auto need = static_cast<std::size_t>(std::max({pred_col, gt_col, id_col}) + 1);
    if (cells.size() < need) throw ParseError("pairing CSV row has too few cells", line_no, ParseError::Unit::kLine);
    pairs.push_back({resolve(base, cells[static_cast<std::size_t>(pred_col)]),
                     resolve(base, cells[static_cast<std::size_t>(gt_col)]),
                     id_col >= 0 ? cells[static_cast<std::size_t>(id_col)] : std::to_string(pairs.size())});
  }
  if (pred_col < 0) throw ParseError("pairing CSV is empty", line_no, ParseError::Unit::kLine);
  return pairs;
}

BatchResult evaluate_batch(const std::vector<EvaluationPair>& pairs, const MetricsConfig& config,
                           std::size_t workers) {
  config.validate();
  BatchResult out;
  out.pairs.resize(pairs.size());
  parallel_for(pairs.size(), workers, [&](std::size_t i) {
    PairResult& r = out.pairs[i];
    r.pair = pairs[i];
    try {
      r.report = evaluate(load_point_cloud(pairs[i].pred_path), load_point_cloud(pairs[i].gt_path), config);
    } catch (const Error& e) {
      r.error = e.what();
    }
  });

  MetricsReport sum;
  std::size_t ok = 0;
  for (const PairResult& r : out.pairs) {
    if (!r.report) {
      ++out.failures;
      continue;
    }
    ++ok;
    sum.l1_cd += r.report->l1_cd;
    sum.l2_cd += r.report->l2_cd;
    sum.precision += r.report->precision;
    sum.recall += r.report->recall;
    sum.fscore += r.report->fscore;
    sum.auc += r.report->auc;
    sum.pred_size += r.report->pred_size;
    sum.gt_size += r.report->gt_size;
  }
  if (ok > 0) {
    const double n = static_cast<double>(ok);
    sum.l1_cd /= n;
    sum.l2_cd /= n;
    sum.precision /= n;
    sum.recall /= n;
    sum.fscore /= n;
    sum.auc /= n;
    sum.pred_size /= ok;
    sum.gt_size /= ok;
    sum.tau = config.tau;
    out.mean = sum;
  }
  return out;
}

json report_to_json(const MetricsReport& r) {
  return {{"l1_cd", r.l1_cd},         {"l2_cd", r.l2_cd}, {"precision", r.precision},
          {"recall", r.recall},       {"fscore", r.fscore}, {"auc", r.auc},
          {"tau", r.tau},             {"pred_size", r.pred_size}, {"gt_size", r.gt_size}};
}

json batch_to_json(const BatchResult& batch, const MetricsConfig& config) {
  json pairs = json::array();
  for (const PairResult& r : batch.pairs) {
    json e{{"model_id", r.pair.model_id},
           {"pred_path", r.pair.pred_path.string()},
           {"gt_path", r.pair.gt_path.string()}};
    if (r.report) e["report"] = report_to_json(*r.report);
    else e["error"] = r.error;
    pairs.push_back(std::move(e));
  }
  return {{"config",
           {{"tau", config.tau},
            {"auc_range", {config.auc_min, config.auc_max}},
            {"auc_samples", config.auc_samples},
            {"l2_convention", config.l2_convention == L2Convention::kSquared ? "squared" : "literal-norm"}}},
          {"pairs", pairs},
          {"mean", batch.mean ? report_to_json(*batch.mean) : json(nullptr)},
          {"failures", batch.failures}};
}

std::string batch_to_csv(const BatchResult& batch) {
  std::string out = "model_id,L1-CD(x1e-3),L2-CD(x1e-3),Precision,Recall,F-score,AUC\n";
  auto row = [&](const std::string& id, const MetricsReport& r) {
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f},{:.6f}\n", id, r.l1_cd * 1e3, r.l2_cd * 1e3,
                       r.precision, r.recall, r.fscore, r.auc);
  };
  for (const PairResult& r : batch.pairs) {
    if (r.report) row(r.pair.model_id, *r.report);
  }
  if (batch.mean) row("mean", *batch.mean);
  return out;
}

}  // namespace surfcomp
