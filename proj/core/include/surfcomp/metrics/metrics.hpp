#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "surfcomp/geometry/nn_index.hpp"
#include "surfcomp/geometry/types.hpp"

namespace surfcomp {

/// How the L2 Chamfer variant aggregates distances: the literal mean of
/// Euclidean norms, or the mean of squared norms used by many completion
/// benchmarks.
enum class L2Convention { kLiteralNorm, kSquared };

struct MetricsConfig {
  double tau = 0.001;
  double auc_min = 0.0001;
  double auc_max = 0.01;
  std::size_t auc_samples = 64;
  L2Convention l2_convention = L2Convention::kLiteralNorm;

  /// Throws PreconditionError unless 0 < auc_min < auc_max, tau > 0 and
  /// auc_samples >= 2.
  void validate() const;
};

struct MetricsReport {
  double l1_cd = 0;
  double l2_cd = 0;
  double precision = 0;
  double recall = 0;
  double fscore = 0;
  double auc = 0;
  double tau = 0;
  std::size_t pred_size = 0;
  std::size_t gt_size = 0;
};

/// min over the indexed set of ||p - q|| under `norm`.
double point_set_distance(const Vec3& p, const NnIndex& index, Norm norm);

/// Distance of every point of `from` to the set indexed by `to`.
std::vector<double> nearest_distances(const PointCloud& from, const NnIndex& to, Norm norm);

/// (1/2|P|) sum dist(p, Q) + (1/2|Q|) sum dist(q, P). With norm kL2 and the
/// squared convention, each term is squared.
double chamfer(const PointCloud& pred, const PointCloud& gt, Norm norm, const MetricsConfig& config = {});

/// Fraction of predicted points within strictly less than tau of the ground
/// truth, and vice versa (Euclidean distance).
std::pair<double, double> precision_recall(const PointCloud& pred, const PointCloud& gt, double tau);

/// Harmonic mean; 0 when both are 0.
double fscore(double precision, double recall);

/// Log-uniform thresholds on [auc_min, auc_max], endpoints included.
std::vector<double> auc_thresholds(const MetricsConfig& config);

/// Trapezoidal integral of F(tau) over ln(tau), divided by ln(auc_max/auc_min).
double auc(const PointCloud& pred, const PointCloud& gt, const MetricsConfig& config = {});

/// All report fields; each nearest-neighbor distance is computed once.
MetricsReport evaluate(const PointCloud& pred, const PointCloud& gt, const MetricsConfig& config = {});

/// Pairwise (cascade) summation; results independent of thread count.
double pairwise_sum(std::span<const double> values);

}  // namespace surfcomp
