#include "pjinv/property_checks.hpp"

#include "pjinv/operator_core.hpp"

#include <algorithm>
#include <limits>
#include <utility>
#include <vector>

namespace pjinv {

namespace {

struct SegmentPoint {
  double s;
  std::vector<Vector> images;
  double radius;
};

// Largest distance from an image at one end of a cell to the images at the other.
double image_gap(const SegmentPoint& a, const SegmentPoint& b) {
  double gap = 0.0;
  for (const auto& x : a.images) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& y : b.images) best = std::min(best, (x - y).norm());
    gap = std::max(gap, best);
  }
  return gap;
}

}  // namespace

CheckResult mvt_check(const MapModel& m, const ProviderSpec& provider, const Vector& u, const Vector& v,
                      int segment_samples, double tol, std::uint64_t seed, int refinement_budget) {
  if (segment_samples < 2) throw std::invalid_argument("mvt_check: segment_samples < 2");
  const Vector step = v - u;
  std::uint64_t draws = 0;
  const auto sample = [&](double s) {
    const PseudoJacobianSet j = pseudo_jacobian(m, Vector(u + s * step), provider, seed + draws++);
    SegmentPoint p{s, {}, j.radius};
    for (const auto& t : j.vertices) p.images.push_back(t * step);
    return p;
  };
  std::vector<SegmentPoint> points;
  for (int k = 0; k < segment_samples; ++k) points.push_back(sample(static_cast<double>(k) / (segment_samples - 1)));

  const Vector diff = evaluate(m, v) - evaluate(m, u);
  const auto distance = [&]() {
    HullSet hull;
    for (const auto& p : points) {
      hull.radius = std::max(hull.radius, p.radius);
      hull.vertices.insert(hull.vertices.end(), p.images.begin(), p.images.end());
    }
    // Duplicates do not change the hull; dropping them keeps the projection cheap.
    const auto less = [](const Vector& a, const Vector& b) {
      return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
    };
    std::sort(hull.vertices.begin(), hull.vertices.end(), less);
    hull.vertices.erase(std::unique(hull.vertices.begin(), hull.vertices.end(),
                                    [](const Vector& a, const Vector& b) { return a == b; }),
                        hull.vertices.end());
    hull.radius *= step.norm();
    return dist_to_hull(diff, hull);
  };

  CheckResult out;
  out.distance = distance();
  // The uniform grid can step over short pieces of a piecewise-smooth map.
  // Bisect the cells whose end images differ most until the inclusion is
  // resolved or the budget is spent; extra points only enlarge the hull.
  int spent = 0;
  while (out.distance > tol && spent < refinement_budget) {
    std::vector<std::pair<double, std::size_t>> cells;
    for (std::size_t k = 0; k + 1 < points.size(); ++k) {
      if (points[k + 1].s - points[k].s < 1e-12) continue;
      const double gap = std::max(image_gap(points[k], points[k + 1]), image_gap(points[k + 1], points[k]));
      if (gap > 1e-12 * (1.0 + diff.norm())) cells.emplace_back(gap, k);
    }
    if (cells.empty()) break;
    std::stable_sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    const std::size_t take = std::min<std::size_t>(
        {cells.size(), static_cast<std::size_t>(segment_samples), static_cast<std::size_t>(refinement_budget - spent)});
    std::vector<SegmentPoint> added;
    for (std::size_t c = 0; c < take; ++c) {
      const std::size_t k = cells[c].second;
      added.push_back(sample(0.5 * (points[k].s + points[k + 1].s)));
    }
    spent += static_cast<int>(take);
    points.insert(points.end(), added.begin(), added.end());
    std::sort(points.begin(), points.end(), [](const SegmentPoint& a, const SegmentPoint& b) { return a.s < b.s; });
    out.distance = distance();
  }
  out.pass = out.distance <= tol;
  return out;
}

CheckResult optimality_check(const MapModel& phi, const ProviderSpec& provider, const Vector& x0,
                             double tol, std::uint64_t seed) {
  if (phi.dim_out != 1) throw std::invalid_argument("optimality_check: needs a scalar function");
  const PseudoJacobianSet j = pseudo_jacobian(phi, x0, provider, seed);
  HullSet hull;
  hull.radius = j.radius;
  for (const auto& t : j.vertices) hull.vertices.push_back(t.row(0).transpose());
  CheckResult out;
  out.distance = dist_to_hull(Vector::Zero(phi.dim_in), hull);
  out.pass = out.distance <= tol;
  return out;
}

ValidityReport chain_rule_check(const MapModel& inner, const MapModel& outer, const ProviderSpec& provider_inner,
                                const Vector& x, const ValidityOptions& options) {
  if (outer.dim_in != inner.dim_out) throw std::invalid_argument("chain_rule_check: dimension mismatch");
  const Vector fx = evaluate(inner, x);
  Operator outer_derivative;
  if (outer.jacobian) outer_derivative = (*outer.jacobian)(fx);
  else if (outer.smooth_part) outer_derivative = outer.smooth_part->jacobian(fx);
  else throw std::invalid_argument("chain_rule_check: outer map exposes no derivative");
  const PseudoJacobianSet jf = pseudo_jacobian(inner, x, provider_inner, options.seed);
  const PseudoJacobianSet composed = pj_compose_left(outer_derivative, jf);
  return validity_check(compose(outer, inner), x, composed, options);
}

}  // namespace pjinv
