#pragma once

#include "pjinv/types.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pjinv {

using EvalFn = std::function<Vector(const Vector&)>;
using JacobianFn = std::function<Operator(const Vector&)>;
/// (x, r) -> upper bound for the Lipschitz constant of h on B(x, r).
using LipschitzFn = std::function<double(const Vector&, double)>;
using ScalarFn = std::function<double(const Vector&)>;

/// Smooth part g of a decomposition f = g + h with h locally Lipschitz.
struct SmoothPart {
  EvalFn eval;
  JacobianFn jacobian;
};

/// Closed-form t -> inf_{|x| <= t} alpha(x) around the origin, with a flag
/// telling whether its integral over [0, inf) is known to diverge.
struct AnalyticBeta {
  std::function<double(double)> beta;
  bool divergent = false;
};

/// Continuous map R^n -> R^m given by an evaluation oracle.
struct MapModel {
  std::string name;
  Eigen::Index dim_in = 1;
  Eigen::Index dim_out = 1;
  EvalFn eval;
  /// Derivative of f where it exists; numeric differentiation is used otherwise.
  std::optional<JacobianFn> jacobian;
  std::optional<SmoothPart> smooth_part;
  std::optional<LipschitzFn> lip_part;
  /// Whether the natural pseudo-Jacobian mapping of f is upper semicontinuous.
  bool usc = true;
  /// Known regularity profile around 0 for the map's natural provider
  /// (sum rule for perturbed identities, exact derivative for smooth maps).
  std::optional<AnalyticBeta> analytic_beta;
  double box_lo = -1e6;
  double box_hi = 1e6;

  bool has_decomposition() const { return smooth_part.has_value(); }
};

/// theta(t) for the perturbed-identity maps x_i + theta(|x_{i+1}|).
struct Theta {
  enum class Kind { linear, identity, log_damped };
  Kind kind = Kind::identity;
  double c = 1.0;

  double operator()(double t) const;
  /// Right derivative at t >= 0.
  double derivative(double t) const;
};

// --- construction -------------------------------------------------------

MapModel make_identity(Eigen::Index n);
MapModel make_linear(const Operator& a, std::string name = "linear");
/// (f(x))_i = x_i + theta(|x_{i+1}|) for i < n, (f(x))_n = x_n.
MapModel make_theta_map(Eigen::Index n, Theta theta);
/// f(x) = e^x on R.
MapModel make_exp1d();
/// z -> z^2 on C identified with R^2.
MapModel make_complexsq();
/// f(x) = x + 0.5 |x| on R.
MapModel make_abs_shift();
/// phi(x) = |x| on R.
MapModel make_abs();
/// phi(x) = |x - a|^2.
MapModel make_sqdist(const Vector& a);
/// phi(y) = |y - y0|, smooth away from y0.
MapModel make_distance(const Vector& y0);
/// phi(x) = max(x^2, (x - 1)^2) on R, minimized at x = 1/2 with a kink there.
MapModel make_pwquad();
/// outer o inner; the decomposition is not propagated.
MapModel compose(const MapModel& outer, const MapModel& inner);

/// Exact inverse of a theta map by back-substitution from the last coordinate.
Vector theta_back_substitute(const Vector& y, Theta theta);

/// Reads a dense matrix: one row per line, entries separated by whitespace or
/// commas, '#' starts a comment.
Operator read_matrix_file(const std::string& path);

/// Resolves a catalog identifier (see catalog_listing()).
MapModel make_map(std::string_view id);

struct CatalogEntry {
  std::string id;
  std::string dims;
  std::string description;
};
/// All catalog identifiers in a fixed order.
std::vector<CatalogEntry> catalog_listing();

// --- operations ---------------------------------------------------------

/// f(x); throws DomainError for wrong dimension or x outside the domain box.
Vector evaluate(const MapModel& m, const Vector& x);

double default_step(const Vector& x);

/// Central-difference Jacobian. Throws DifferentiationError on non-finite entries.
Operator numeric_jacobian(const MapModel& m, const Vector& x, double step);
inline Operator numeric_jacobian(const MapModel& m, const Vector& x) {
  return numeric_jacobian(m, x, default_step(x));
}

/// Central-difference Jacobian that also compares one-sided quotients and
/// returns nullopt when they disagree, i.e. the stencil straddles a kink.
std::optional<Operator> try_numeric_jacobian(const MapModel& m, const Vector& x, double step,
                                             double kink_tol = 1e-4);

/// Derivative of f at x: the analytic oracle when present, else central differences.
Operator derivative(const MapModel& m, const Vector& x);

struct LipschitzEstimate {
  double value = 0.0;
  double radius = 0.0;
};

/// Sampled lower estimate of sup |f(u)-f(v)|/|u-v| over u, v in B(x, r).
LipschitzEstimate local_lipschitz_estimate(const MapModel& m, const Vector& x, double r,
                                           int samples, std::uint64_t seed = 0);

struct DiniGrid {
  double t0 = 1e-2;
  double rho = 0.5;
  int k = 20;
};

struct DiniEstimate {
  double upper = 0.0;
  double lower = 0.0;
};

/// Max and min of (phi(x + t v) - phi(x)) / t over t = t0 rho^j, j < k.
DiniEstimate dini_derivatives(const ScalarFn& phi, const Vector& x, const Vector& v,
                              const DiniGrid& grid = {});

/// Estimate of liminf_{z -> x} |f(z) - f(x)| / |z - x|: minimum over random
/// directions of the quotient at radii t0 rho^j.
double lower_scalar_dini(const MapModel& m, const Vector& x, int directions,
                         const DiniGrid& grid = {}, std::uint64_t seed = 0);

}  // namespace pjinv
