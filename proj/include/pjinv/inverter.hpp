#pragma once

#include "pjinv/map_models.hpp"
#include "pjinv/pseudojacobian.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pjinv {

enum class InversionMethod { newton, path, ekeland };
/// `stationary`: the descent stopped at a lambda-stationary point (no
/// admissible move and 0 within eps of the dual set).
enum class InversionStatus { converged, diverged, step_underflow, max_iter, stationary };

const char* to_string(InversionMethod method);
const char* to_string(InversionStatus status);
InversionMethod parse_method(std::string_view text);

struct InversionTrace {
  InversionMethod method = InversionMethod::newton;
  /// Homotopy parameters of accepted points (path); iteration index otherwise.
  std::vector<double> t_grid;
  std::vector<Vector> iterates;
  std::vector<double> residuals;
  InversionStatus status = InversionStatus::max_iter;
  Vector final_x;
  /// Residual against the final target (differs from residuals.back() for
  /// an unfinished path lift).
  double final_residual = 0.0;
  bool used_pseudo_inverse = false;
  std::optional<Vector> witness;
  std::string note;

  bool converged() const { return status == InversionStatus::converged; }
};

struct InverterOptions {
  double tol = 1e-10;
  int max_iter = 100;
  double backtrack = 0.5;
  double armijo = 1e-4;
  int max_halvings = 40;
  double divergence_norm = 1e8;
  double min_step = 1e-12;
  /// Newton iterations allowed per corrector solve in path lifting.
  int corrector_iter = 50;
  /// Elements with conorm below this (relative to their norm) count as singular.
  double singular_tol = 1e-12;
  std::uint64_t seed = 0;
};

/// x_{k+1} = x_k - s_k T_k^{-1} (f(x_k) - y), T_k the best-conditioned vertex
/// of the pseudo-Jacobian at x_k, s_k by backtracking on |f(x) - y|.
InversionTrace semismooth_newton(const MapModel& m, const ProviderSpec& provider, const Vector& y,
                                 const Vector& x0, const InverterOptions& options = {});

/// Lifts the segment p(t) = (1 - t) f(x0) + t y_target through f with Newton
/// correctors, halving the homotopy step on corrector failure.
InversionTrace path_lift_invert(const MapModel& m, const ProviderSpec& provider, const Vector& x0,
                                const Vector& y_target, int steps, const InverterOptions& options = {});

/// Descent on |f(x) - y| accepting only moves with
/// phi(x_new) < phi(x) - lambda |x_new - x|.
InversionTrace ekeland_descent(const MapModel& m, const ProviderSpec& provider, const Vector& y,
                               const Vector& x0, double lambda, double eps,
                               const InverterOptions& options = {});

/// Dispatch helper used by the certifiers and the CLI.
InversionTrace invert(const MapModel& m, const ProviderSpec& provider, InversionMethod method,
                      const Vector& y, const Vector& x0, const InverterOptions& options = {},
                      int path_steps = 16, double lambda = 1e-3, double eps = 1e-6);

/// max |x1 - x2| / |f(x1) - f(x2)| over sampled pairs in B(center, radius).
double inverse_lipschitz_probe(const MapModel& m, const Vector& center, double radius, int pairs,
                               std::uint64_t seed = 0);

}  // namespace pjinv
