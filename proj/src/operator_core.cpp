#include "pjinv/operator_core.hpp"

#include <stdexcept>

namespace pjinv {

void HullSet::validate() const {
  if (vertices.empty()) throw std::invalid_argument("HullSet: no vertices");
  if (!(radius >= 0.0)) throw std::invalid_argument("HullSet: negative radius");
  const auto d = vertices.front().size();
  for (const auto& v : vertices) {
    if (v.size() != d) throw std::invalid_argument("HullSet: mixed vertex dimensions");
    if (!v.allFinite()) throw std::invalid_argument("HullSet: non-finite vertex");
  }
}

namespace {

// Minimizes |sum_i mu_i q_i| subject to sum_i mu_i = 1 over the corral.
Eigen::VectorXd affine_min_norm(const std::vector<const Vector*>& corral) {
  const auto k = static_cast<Eigen::Index>(corral.size());
  Eigen::VectorXd mu(k);
  if (k == 1) {
    mu(0) = 1.0;
    return mu;
  }
  const Vector& base = *corral.front();
  Eigen::MatrixXd diffs(base.size(), k - 1);
  for (Eigen::Index i = 1; i < k; ++i) diffs.col(i - 1) = *corral[static_cast<std::size_t>(i)] - base;
  const Eigen::VectorXd z = diffs.completeOrthogonalDecomposition().solve(-base);
  mu(0) = 1.0 - z.sum();
  mu.tail(k - 1) = z;
  return mu;
}

}  // namespace

HullProjection project_to_hull(const Vector& p, const std::vector<Vector>& vertices,
                               const HullOptions& options) {
  if (vertices.empty()) throw std::invalid_argument("project_to_hull: no vertices");
  const std::size_t count = vertices.size();
  std::vector<Vector> shifted;
  shifted.reserve(count);
  double scale = 0.0;
  std::size_t start = 0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < count; ++j) {
    if (vertices[j].size() != p.size())
      throw std::invalid_argument("project_to_hull: dimension mismatch");
    shifted.push_back(vertices[j] - p);
    const double n2 = shifted.back().squaredNorm();
    scale = std::max(scale, n2);
    if (n2 < best) {
      best = n2;
      start = j;
    }
  }
  const double gap_threshold = options.gap_tol * std::max(scale, 1e-300);
  constexpr double kDrop = 1e-14;

  std::vector<std::size_t> corral{start};
  std::vector<double> weights{1.0};
  Vector x = shifted[start];
  HullProjection out;

  for (int iter = 0; iter < options.max_iter; ++iter) {
    out.iterations = iter + 1;
    std::size_t entering = 0;
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < count; ++j) {
      const double s = x.dot(shifted[j]);
      if (s < lowest) {
        lowest = s;
        entering = j;
      }
    }
    out.gap = x.squaredNorm() - lowest;
    if (out.gap <= gap_threshold) break;
    if (std::find(corral.begin(), corral.end(), entering) != corral.end()) break;
    corral.push_back(entering);
    weights.push_back(0.0);

    // Minor cycle: move toward the affine minimizer while staying convex.
    for (std::size_t guard = 0; guard <= count + 1; ++guard) {
      std::vector<const Vector*> pts;
      pts.reserve(corral.size());
      for (auto idx : corral) pts.push_back(&shifted[idx]);
      const Eigen::VectorXd mu = affine_min_norm(pts);
      if ((mu.array() > kDrop).all()) {
        for (std::size_t i = 0; i < corral.size(); ++i) weights[i] = mu(static_cast<Eigen::Index>(i));
        break;
      }
      double theta = 1.0;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        const double m = mu(static_cast<Eigen::Index>(i));
        if (m <= kDrop) {
          const double denom = weights[i] - m;
          if (denom > 0.0) theta = std::min(theta, weights[i] / denom);
        }
      }
      for (std::size_t i = 0; i < corral.size(); ++i)
        weights[i] = theta * mu(static_cast<Eigen::Index>(i)) + (1.0 - theta) * weights[i];
      std::vector<std::size_t> keep_idx;
      std::vector<double> keep_w;
      for (std::size_t i = 0; i < corral.size(); ++i) {
        if (weights[i] > kDrop) {
          keep_idx.push_back(corral[i]);
          keep_w.push_back(weights[i]);
        }
      }
      if (keep_idx.empty()) {
        // Degenerate cycle; fall back to the entering vertex alone.
        keep_idx.push_back(entering);
        keep_w.push_back(1.0);
      }
      const double total = std::accumulate(keep_w.begin(), keep_w.end(), 0.0);
      for (auto& w : keep_w) w /= total;
      corral = std::move(keep_idx);
      weights = std::move(keep_w);
    }
    Vector next = Vector::Zero(p.size());
    for (std::size_t i = 0; i < corral.size(); ++i) next += weights[i] * shifted[corral[i]];
    const bool stalled = next.squaredNorm() >= x.squaredNorm();
    x = std::move(next);
    // No further progress is possible at working precision.
    if (stalled) break;
  }

  out.weights.assign(count, 0.0);
  for (std::size_t i = 0; i < corral.size(); ++i) out.weights[corral[i]] += weights[i];
  out.point = x + p;
  out.distance = x.norm();
  return out;
}

double dist_to_hull(const Vector& p, const HullSet& hull, const HullOptions& options) {
  hull.validate();
  const double d = project_to_hull(p, hull.vertices, options).distance;
  return std::max(d - hull.radius, 0.0);
}

}  // namespace pjinv
