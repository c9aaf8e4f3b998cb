#include "oracles.hpp"

#include <cmath>
#include <limits>

namespace surfcomp::testing {

Neighbor brute_nearest(const std::vector<Vec3>& points, const Vec3& q, Norm norm) {
  Neighbor best{0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const Vec3 d = points[i] - q;
    const double key = norm == Norm::kL2 ? d.squaredNorm() : d.cwiseAbs().sum();
    if (key < best.key) best = {i, key};
  }
  return best;
}

Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0 && d2 <= 0) return a;
  const Vec3 bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0 && d4 <= d3) return b;
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0 && d1 >= 0 && d3 <= 0) return a + ab * (d1 / (d1 - d3));
  const Vec3 cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0 && d5 <= d6) return c;
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0 && d2 >= 0 && d6 <= 0) return a + ac * (d2 / (d2 - d6));
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0 && (d4 - d3) >= 0 && (d5 - d6) >= 0) return b + (c - b) * ((d4 - d3) / ((d4 - d3) + (d5 - d6)));
  const double denom = 1.0 / (va + vb + vc);
  return a + ab * (vb * denom) + ac * (vc * denom);
}

double point_mesh_distance(const Vec3& p, const TriangleMesh& mesh) {
  double best = std::numeric_limits<double>::infinity();
  const auto& v = mesh.vertices();
  for (const auto& t : mesh.triangles()) {
    best = std::min(best, (p - closest_point_on_triangle(p, v[t[0]], v[t[1]], v[t[2]])).norm());
  }
  return best;
}

std::optional<double> ray_triangle(const Vec3& origin, const Vec3& dir, const Vec3& a, const Vec3& b, const Vec3& c) {
  const Vec3 e1 = b - a, e2 = c - a;
  const Vec3 h = dir.cross(e2);
  const double det = e1.dot(h);
  if (std::abs(det) < 1e-14) return std::nullopt;
  const double inv = 1.0 / det;
  const Vec3 s = origin - a;
  const double u = inv * s.dot(h);
  if (u < 0 || u > 1) return std::nullopt;
  const Vec3 q = s.cross(e1);
  const double v = inv * dir.dot(q);
  if (v < 0 || u + v > 1) return std::nullopt;
  const double t = inv * e2.dot(q);
  if (t <= 0) return std::nullopt;
  return t;
}

std::optional<double> ray_cast_depth(const TriangleMesh& mesh, const CameraIntrinsics& k, const CameraPose& pose,
                                     int u, int v) {
  // Camera-frame direction with unit Z, so the ray parameter is the depth.
  const Vec3 dir_cam((u + 0.5 - k.cx) / k.fx, (v + 0.5 - k.cy) / k.fy, 1.0);
  const Vec3 dir = pose.rotation() * dir_cam;
  std::optional<double> best;
  const auto& vs = mesh.vertices();
  for (const auto& t : mesh.triangles()) {
    const auto hit = ray_triangle(pose.position(), dir, vs[t[0]], vs[t[1]], vs[t[2]]);
    if (hit && (!best || *hit < *best)) best = hit;
  }
  return best;
}

MetricsReport reference_evaluate(const PointCloud& pred, const PointCloud& gt, const MetricsConfig& config) {
  auto min_dist = [](const Vec3& p, const PointCloud& set, bool l1) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : set.points()) {
      const Vec3 d = p - q;
      best = std::min(best, l1 ? d.cwiseAbs().sum() : d.norm());
    }
    return best;
  };
  std::vector<double> l1_pq, l1_qp, l2_pq, l2_qp;
  for (const auto& p : pred.points()) {
    l1_pq.push_back(min_dist(p, gt, true));
    l2_pq.push_back(min_dist(p, gt, false));
  }
  for (const auto& q : gt.points()) {
    l1_qp.push_back(min_dist(q, pred, true));
    l2_qp.push_back(min_dist(q, pred, false));
  }
  const bool squared = config.l2_convention == L2Convention::kSquared;
  auto mean = [](const std::vector<double>& xs, bool square) {
    double s = 0;
    for (double x : xs) s += square ? x * x : x;
    return s / static_cast<double>(xs.size());
  };
  auto fraction_below = [](const std::vector<double>& xs, double tau) {
    std::size_t n = 0;
    for (double x : xs) n += x < tau;
    return static_cast<double>(n) / static_cast<double>(xs.size());
  };
  auto f_at = [&](double tau) {
    const double p = fraction_below(l2_pq, tau), r = fraction_below(l2_qp, tau);
    return p + r > 0 ? 2 * p * r / (p + r) : 0.0;
  };

  MetricsReport r;
  r.l1_cd = 0.5 * mean(l1_pq, false) + 0.5 * mean(l1_qp, false);
  r.l2_cd = 0.5 * mean(l2_pq, squared) + 0.5 * mean(l2_qp, squared);
  r.precision = fraction_below(l2_pq, config.tau);
  r.recall = fraction_below(l2_qp, config.tau);
  r.fscore = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
  const std::size_t k = config.auc_samples;
  const double lo = std::log(config.auc_min), hi = std::log(config.auc_max);
  double area = 0;
  double prev_f = f_at(config.auc_min), prev_x = lo;
  for (std::size_t i = 1; i < k; ++i) {
    const double x = i + 1 == k ? hi : lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(k - 1);
    const double tau = i + 1 == k ? config.auc_max : std::exp(x);
    const double f = f_at(tau);
    area += 0.5 * (prev_f + f) * (x - prev_x);
    prev_f = f;
    prev_x = x;
  }
  r.auc = area / (hi - lo);
  r.tau = config.tau;
  r.pred_size = pred.size();
  r.gt_size = gt.size();
  return r;
}

}  // namespace surfcomp::testing
