#include "pjinv/indices.hpp"

#include "pjinv/operator_core.hpp"
#include "pjinv/sampling.hpp"

#include <cmath>

namespace pjinv {

namespace {

double max_pairwise_distance(const std::vector<Operator>& vs) {
  double diam = 0.0;
  for (std::size_t i = 0; i < vs.size(); ++i)
    for (std::size_t j = i + 1; j < vs.size(); ++j) diam = std::max(diam, spectral_norm(vs[i] - vs[j]));
  return diam;
}

// conorm(T - r u v^T) <= conorm(T) - r along the minimal singular pair.
Operator shrink_along_min_pair(const Operator& t, double r) {
  if (r == 0.0) return t;
  const auto triple = min_singular_triple(t);
  const double step = std::min(r, triple.sigma);
  return t - step * triple.u * triple.v.transpose();
}

double binomial(std::size_t n, std::size_t k) {
  double out = 1.0;
  for (std::size_t i = 1; i <= k; ++i) out = out * static_cast<double>(n - k + i) / static_cast<double>(i);
  return out;
}

// Enumerates all lambda with lambda_i = counts_i / steps, sum counts_i = steps.
template <typename Visit>
void enumerate_grid(std::vector<std::size_t>& counts, std::size_t pos, std::size_t remaining,
                    Visit& visit) {
  if (pos + 1 == counts.size()) {
    counts[pos] = remaining;
    visit(counts);
    return;
  }
  for (std::size_t c = 0; c <= remaining; ++c) {
    counts[pos] = c;
    enumerate_grid(counts, pos + 1, remaining - c, visit);
  }
}

template <typename Visit>
void for_each_grid_point(std::size_t k, std::size_t steps, Visit&& visit) {
  std::vector<std::size_t> counts(k, 0);
  enumerate_grid(counts, 0, steps, visit);
}

}  // namespace

double default_net(const PseudoJacobianSet& j) {
  return std::max(1e-3 * max_pairwise_distance(j.vertices), 1e-9);
}

ConormBounds set_conorm_bounds(const PseudoJacobianSet& jset, double net, const ConormOptions& options) {
  if (!(net > 0.0)) throw std::invalid_argument("set_conorm_bounds: net must be positive");
  jset.validate();
  double scale = 0.0;
  for (const auto& v : jset.vertices) scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
  const PseudoJacobianSet j = dedupe_vertices(jset, 1e-12 * (1.0 + scale));
  const double r = j.radius;
  ConormBounds out;

  if (j.vertices.size() == 1) {
    const double c = conorm(j.vertices.front());
    out.lower = out.upper = std::max(c - r, 0.0);
    out.certified = true;
    out.net_resolution = 0.0;
    out.witness = shrink_along_min_pair(j.vertices.front(), r);
    return out;
  }

  const std::size_t k = j.vertices.size();
  if (k <= options.max_certified_vertices) {
    const double diam = max_pairwise_distance(j.vertices);
    auto steps = static_cast<std::size_t>(std::ceil(static_cast<double>(k) * diam / (2.0 * net)));
    steps = std::max<std::size_t>(steps, 1);
    while (steps > 1 && binomial(steps + k - 1, k - 1) > static_cast<double>(options.max_net_points)) {
      steps = static_cast<std::size_t>(std::floor(static_cast<double>(steps) * 0.9));
    }
    double best = std::numeric_limits<double>::infinity();
    Operator argmin;
    for_each_grid_point(k, steps, [&](const std::vector<std::size_t>& counts) {
      Operator t = Operator::Zero(j.rows(), j.cols());
      for (std::size_t i = 0; i < k; ++i)
        if (counts[i]) t += (static_cast<double>(counts[i]) / static_cast<double>(steps)) * j.vertices[i];
      const double c = conorm(t);
      if (c < best) {
        best = c;
        argmin = std::move(t);
      }
    });
    out.net_resolution = static_cast<double>(k) * diam / (2.0 * static_cast<double>(steps));
    out.lower = std::max(best - out.net_resolution - r, 0.0);
    out.upper = std::max(best - r, 0.0);
    out.certified = true;
    out.witness = shrink_along_min_pair(argmin, r);
    return out;
  }

  // Sampled: vertices, centroid and random convex combinations for the upper
  // bound; a one-point net at the centroid for a (coarse) lower bound.
  Operator centroid = Operator::Zero(j.rows(), j.cols());
  for (const auto& v : j.vertices) centroid += v;
  centroid /= static_cast<double>(k);
  double spread = 0.0;
  for (const auto& v : j.vertices) spread = std::max(spread, spectral_norm(v - centroid));
  double best = conorm(centroid);
  Operator argmin = centroid;
  const double centroid_conorm = best;
  for (const auto& v : j.vertices) {
    const double c = conorm(v);
    if (c < best) {
      best = c;
      argmin = v;
    }
  }
  Rng rng = make_rng(options.seed, 0xb0d);
  std::exponential_distribution<double> expo(1.0);
  for (int s = 0; s < options.sampled_points; ++s) {
    Operator t = Operator::Zero(j.rows(), j.cols());
    double total = 0.0;
    for (const auto& v : j.vertices) {
      const double w = expo(rng);
      total += w;
      t += w * v;
    }
    t /= total;
    const double c = conorm(t);
    if (c < best) {
      best = c;
      argmin = std::move(t);
    }
  }
  out.net_resolution = spread;
  out.lower = std::max(centroid_conorm - spread - r, 0.0);
  out.upper = std::max(best - r, 0.0);
  out.certified = false;
  out.witness = shrink_along_min_pair(argmin, r);
  return out;
}

RegularityReport regularity_index(const MapModel& m, const ProviderSpec& provider, const Vector& x,
                                  const RegularityOptions& options) {
  RegularityReport report;
  const auto net_for = [&](const PseudoJacobianSet& j) {
    return options.net > 0.0 ? options.net : default_net(j);
  };

  if (options.use_usc_shortcut && m.usc) {
    const PseudoJacobianSet j = pseudo_jacobian(m, x, provider, options.seed);
    const double net = net_for(j);
    const ConormBounds b = set_conorm_bounds(j, net, ConormOptions{.seed = options.seed});
    report.alpha = b.lower;
    report.bound_kind = b.certified ? RegularityReport::BoundKind::certified : RegularityReport::BoundKind::sampled;
    report.witness = b.witness;
    report.radius_used = 0.0;
    report.regular = b.lower > 10.0 * net;
    return report;
  }

  std::vector<double> radii = options.radii;
  if (radii.empty()) {
    const double s = 1.0 + x.norm();
    radii = {s, 0.1 * s, 0.01 * s};
  }
  Rng rng = make_rng(options.seed, 0x4e6);
  bool first = true;
  double margin = 0.0;
  for (std::size_t ri = 0; ri < radii.size(); ++ri) {
    const double r = radii[ri];
    PseudoJacobianSet pooled = pseudo_jacobian(m, x, provider, options.seed);
    for (int s = 0; s < options.samples_per_radius; ++s) {
      const Vector z = random_in_ball(rng, x, r);
      const PseudoJacobianSet jz = pseudo_jacobian(m, z, provider, options.seed + 1 + static_cast<std::uint64_t>(s));
      pooled.radius = std::max(pooled.radius, jz.radius);
      pooled.vertices.insert(pooled.vertices.end(), jz.vertices.begin(), jz.vertices.end());
    }
    double scale = 0.0;
    for (const auto& v : pooled.vertices) scale = std::max(scale, v.lpNorm<Eigen::Infinity>());
    pooled = dedupe_vertices(pooled, 1e-12 * (1.0 + scale));
    const double net = net_for(pooled);
    const ConormBounds b = set_conorm_bounds(pooled, net, ConormOptions{.seed = options.seed});
    if (first || b.lower > report.alpha) {
      report.alpha = b.lower;
      report.bound_kind = b.certified ? RegularityReport::BoundKind::certified : RegularityReport::BoundKind::sampled;
      report.witness = b.witness;
      report.radius_used = r;
      margin = 10.0 * net;
      first = false;
    }
  }
  report.regular = report.alpha > margin;
  return report;
}

const char* to_string(RegularityReport::BoundKind kind) {
  return kind == RegularityReport::BoundKind::certified ? "certified" : "sampled";
}

}  // namespace pjinv
