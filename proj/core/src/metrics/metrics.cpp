#include "surfcomp/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "surfcomp/util/error.hpp"

namespace surfcomp {

void MetricsConfig::validate() const {
  if (!(tau > 0.0)) throw PreconditionError("tau must be positive");
  if (!(auc_min > 0.0 && auc_min < auc_max)) throw PreconditionError("AUC range must satisfy 0 < min < max");
  if (auc_samples < 2) throw PreconditionError("auc_samples must be >= 2");
}

namespace {

void require_clouds(const PointCloud& pred, const PointCloud& gt) {
  if (pred.empty()) throw PreconditionError("predicted cloud is empty");
  if (gt.empty()) throw PreconditionError("ground-truth cloud is empty");
}

double pairwise_sum_impl(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum_impl(v, half) + pairwise_sum_impl(v + half, n - half);
}

double mean(std::span<const double> v) { return pairwise_sum(v) / static_cast<double>(v.size()); }

std::vector<double> squared(std::vector<double> v) {
  for (double& d : v) d *= d;
  return v;
}

/// Fraction of sorted distances strictly below tau.
double fraction_below(const std::vector<double>& sorted, double tau) {
  const auto it = std::lower_bound(sorted.begin(), sorted.end(), tau);
  return static_cast<double>(it - sorted.begin()) / static_cast<double>(sorted.size());
}

double auc_from_sorted(const std::vector<double>& pred_sorted, const std::vector<double>& gt_sorted,
                       const MetricsConfig& config) {
  const auto taus = auc_thresholds(config);
  std::vector<double> f(taus.size());
  for (std::size_t k = 0; k < taus.size(); ++k) {
    f[k] = fscore(fraction_below(pred_sorted, taus[k]), fraction_below(gt_sorted, taus[k]));
  }
  // Equal spacing in ln(tau): the normalized trapezoid is the mean of
  // adjacent-pair averages.
  double area = 0.0;
  for (std::size_t k = 0; k + 1 < f.size(); ++k) area += 0.5 * (f[k] + f[k + 1]);
  return area / static_cast<double>(f.size() - 1);
}

std::vector<double> sorted_copy(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

double pairwise_sum(std::span<const double> values) { return pairwise_sum_impl(values.data(), values.size()); }

double point_set_distance(const Vec3& p, const NnIndex& index, Norm norm) { return index.distance(p, norm); }

std::vector<double> nearest_distances(const PointCloud& from, const NnIndex& to, Norm norm) {
  std::vector<double> out(from.size());
  for (std::size_t i = 0; i < from.size(); ++i) out[i] = to.distance(from[i], norm);
  return out;
}

double chamfer(const PointCloud& pred, const PointCloud& gt, Norm norm, const MetricsConfig& config) {
  require_clouds(pred, gt);
  const NnIndex pred_index(pred);
  const NnIndex gt_index(gt);
  std::vector<double> pq = nearest_distances(pred, gt_index, norm);
  std::vector<double> qp = nearest_distances(gt, pred_index, norm);
  if (norm == Norm::kL2 && config.l2_convention == L2Convention::kSquared) {
    pq = squared(std::move(pq));
    qp = squared(std::move(qp));
  }
  return 0.5 * mean(pq) + 0.5 * mean(qp);
}

std::pair<double, double> precision_recall(const PointCloud& pred, const PointCloud& gt, double tau) {
  require_clouds(pred, gt);
  if (!(tau > 0.0)) throw PreconditionError("tau must be positive");
  const NnIndex pred_index(pred);
  const NnIndex gt_index(gt);
  const auto pq = sorted_copy(nearest_distances(pred, gt_index, Norm::kL2));
  const auto qp = sorted_copy(nearest_distances(gt, pred_index, Norm::kL2));
  return {fraction_below(pq, tau), fraction_below(qp, tau)};
}

double fscore(double precision, double recall) {
  const double sum = precision + recall;
  return sum > 0.0 ? 2.0 * precision * recall / sum : 0.0;
}

std::vector<double> auc_thresholds(const MetricsConfig& config) {
  config.validate();
  const std::size_t k = config.auc_samples;
  const double lo = std::log(config.auc_min);
  const double hi = std::log(config.auc_max);
  std::vector<double> taus(k);
  for (std::size_t i = 0; i < k; ++i) {
    taus[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1));
  }
  taus.front() = config.auc_min;
  taus.back() = config.auc_max;
  return taus;
}

double auc(const PointCloud& pred, const PointCloud& gt, const MetricsConfig& config) {
  require_clouds(pred, gt);
  config.validate();
  const NnIndex pred_index(pred);
  const NnIndex gt_index(gt);
  return auc_from_sorted(sorted_copy(nearest_distances(pred, gt_index, Norm::kL2)),
                         sorted_copy(nearest_distances(gt, pred_index, Norm::kL2)), config);
}

MetricsReport evaluate(const PointCloud& pred, const PointCloud& gt, const MetricsConfig& config) {
  require_clouds(pred, gt);
  config.validate();
  const NnIndex pred_index(pred);
  const NnIndex gt_index(gt);

  MetricsReport r;
  r.tau = config.tau;
  r.pred_size = pred.size();
  r.gt_size = gt.size();

  const auto pq1 = nearest_distances(pred, gt_index, Norm::kL1);
  const auto qp1 = nearest_distances(gt, pred_index, Norm::kL1);
  r.l1_cd = 0.5 * mean(pq1) + 0.5 * mean(qp1);

  const auto pq2 = nearest_distances(pred, gt_index, Norm::kL2);
  const auto qp2 = nearest_distances(gt, pred_index, Norm::kL2);
  if (config.l2_convention == L2Convention::kSquared) {
    r.l2_cd = 0.5 * mean(squared(pq2)) + 0.5 * mean(squared(qp2));
  } else {
    r.l2_cd = 0.5 * mean(pq2) + 0.5 * mean(qp2);
  }

  const auto pq_sorted = sorted_copy(pq2);
  const auto qp_sorted = sorted_copy(qp2);
  r.precision = fraction_below(pq_sorted, config.tau);
  r.recall = fraction_below(qp_sorted, config.tau);
  r.fscore = fscore(r.precision, r.recall);
  r.auc = auc_from_sorted(pq_sorted, qp_sorted, config);
  return r;
}

}  // namespace surfcomp
