#pragma once

#include "pjinv/map_models.hpp"
#include "pjinv/types.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace pjinv {

/// co(vertices) + radius * (closed unit ball of operators in spectral norm).
struct PseudoJacobianSet {
  std::vector<Operator> vertices;
  double radius = 0.0;

  static PseudoJacobianSet singleton(Operator op, double radius = 0.0);

  Eigen::Index rows() const { return vertices.front().rows(); }
  Eigen::Index cols() const { return vertices.front().cols(); }
  void validate() const;
};

/// Which construction produces the pseudo-Jacobian at a point.
///
/// String grammar: "exact", "ball:r=<float>,m=<int>", "sum",
/// "clarke:delta=<float>,m=<int>,eps=<float>". Omitted keys keep defaults.
struct ProviderSpec {
  enum class Kind { exact, ball, sum, clarke };
  Kind kind = Kind::exact;
  // ball (and sum without an analytic Lipschitz oracle)
  double lip_radius = 1e-3;
  int lip_samples = 2000;
  // clarke
  double delta = 1e-4;
  int samples = 64;
  double eps = 0.0;

  static ProviderSpec parse(std::string_view text);
  std::string to_string() const;
  void validate() const;
};

/// {f'(x)}, radius 0.
PseudoJacobianSet exact_singleton(const MapModel& m, const Vector& x);
/// {0} + Lip f(x) * ball, with the Lipschitz constant estimated on B(x, spec.lip_radius).
PseudoJacobianSet lipschitz_ball(const MapModel& m, const Vector& x, const ProviderSpec& spec,
                                 std::uint64_t seed = 0);
/// {g'(x)} + Lip h(x) * ball for a decomposition f = g + h.
PseudoJacobianSet sum_rule(const MapModel& m, const Vector& x, const ProviderSpec& spec = {},
                           std::uint64_t seed = 0);
/// Jacobians at spec.samples differentiability points drawn in B(x, spec.delta),
/// radius spec.eps. Kinks are avoided by re-drawing (at most 16 times per point).
PseudoJacobianSet sampled_clarke(const MapModel& m, const Vector& x, const ProviderSpec& spec,
                                 std::uint64_t seed = 0);

/// Dispatches on spec.kind.
PseudoJacobianSet pseudo_jacobian(const MapModel& m, const Vector& x, const ProviderSpec& spec,
                                  std::uint64_t seed = 0);

/// sup { <ystar, T v> : T in J }.
double support_function(const PseudoJacobianSet& j, const Vector& ystar, const Vector& v);

/// alpha * J1 + J2 (Minkowski).
PseudoJacobianSet pj_combine(double alpha, const PseudoJacobianSet& j1, const PseudoJacobianSet& j2);

/// outer * J: each vertex composed on the left, radius scaled by |outer|_2.
PseudoJacobianSet pj_compose_left(const Operator& outer, const PseudoJacobianSet& j);

/// Drops vertices within tol (max-entry norm) of an earlier vertex.
PseudoJacobianSet dedupe_vertices(const PseudoJacobianSet& j, double tol = 1e-12);

struct ValidityOptions {
  int trials = 1000;
  /// Negative means 1e-3 plus the finite-difference noise bound.
  double tol = -1.0;
  DiniGrid grid{1e-5, 0.5, 12};
  std::uint64_t seed = 0;
};

struct ValidityReport {
  double pass_rate = 0.0;
  int passed = 0;
  int trials = 0;
  double worst_excess = 0.0;  // largest violation of either Dini inequality
  double tol = 0.0;
};

/// Checks upper Dini <= support and lower Dini >= -support(-ystar) on random
/// unit (ystar, v) pairs.
ValidityReport validity_check(const MapModel& m, const Vector& x, const PseudoJacobianSet& j,
                              const ValidityOptions& options = {});

}  // namespace pjinv
