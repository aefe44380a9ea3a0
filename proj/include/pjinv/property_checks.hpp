#pragma once

#include "pjinv/map_models.hpp"
#include "pjinv/pseudojacobian.hpp"

#include <cstdint>

namespace pjinv {

struct CheckResult {
  double distance = 0.0;
  bool pass = false;
};

/// Mean value inclusion f(v) - f(u) in co(Jf([u, v])(v - u)), with the
/// segment sampled on a uniform grid of `segment_samples` points. When that
/// grid misses, up to `refinement_budget` extra points are placed by
/// bisecting the cells where the sampled sets change.
CheckResult mvt_check(const MapModel& m, const ProviderSpec& provider, const Vector& u, const Vector& v,
                      int segment_samples, double tol, std::uint64_t seed = 0, int refinement_budget = 256);

/// 0 in co(J phi(x0)) for a scalar phi.
CheckResult optimality_check(const MapModel& phi, const ProviderSpec& provider, const Vector& x0,
                             double tol, std::uint64_t seed = 0);

/// Builds g'(f(x)) o Jf(x) and runs validity_check for g o f at x. The outer
/// map must be smooth (analytic derivative or smooth part without h).
ValidityReport chain_rule_check(const MapModel& inner, const MapModel& outer, const ProviderSpec& provider_inner,
                                const Vector& x, const ValidityOptions& options = {});

}  // namespace pjinv
