#pragma once

#include "pjinv/indices.hpp"
#include "pjinv/inverter.hpp"
#include "pjinv/map_models.hpp"
#include "pjinv/pseudojacobian.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

namespace pjinv {

/// beta(t) = inf_{|x - center| <= t} alpha(x) on a grid, and
/// rho(t) = int_0^t beta by the trapezoid rule.
struct BetaProfile {
  enum class Mode { sampled, analytic };
  std::vector<double> grid;
  std::vector<double> beta;
  std::vector<double> rho;
  Mode mode = Mode::sampled;
  /// Caller's claim that int_0^inf beta diverges (analytic mode only).
  bool divergent = false;
  /// Every sampled regularity bound came from the certified net argument.
  bool all_certified = true;
  /// Points where the sampled running minimum was attained.
  std::vector<Vector> witnesses;

  double t_max() const { return grid.back(); }
  /// rho at any t in [0, t_max]: exact integral of the piecewise-linear beta.
  double rho_at(double t) const;
};

/// Cumulative trapezoid integral with out[0] = 0.
std::vector<double> cumulative_trapezoid(const std::vector<double>& grid, const std::vector<double>& values);

struct BetaOptions {
  int grid_n = 128;
  int samples_per_shell = 64;
  RegularityOptions regularity;
};

BetaProfile beta_profile(const MapModel& m, const ProviderSpec& provider, const Vector& center,
                         double t_max, const BetaOptions& options = {},
                         const std::optional<AnalyticBeta>& analytic = std::nullopt);

enum class HadamardVerdict { diverges_analytic, inconclusive_growing, inconclusive_flat, fails };
const char* to_string(HadamardVerdict verdict);

struct HadamardResult {
  HadamardVerdict verdict = HadamardVerdict::fails;
  double rho_at_tmax = 0.0;
  double beta_at_tmax = 0.0;
};

/// Divergence is only ever reported for analytic profiles tagged divergent.
HadamardResult hadamard_verdict(const BetaProfile& profile);

/// CSV with header `t,beta,rho`, 12 significant digits, LF line ends.
void write_profile_csv(std::ostream& out, const BetaProfile& profile);

struct BallInclusionOptions {
  double margin = 0.02;
  InversionMethod method = InversionMethod::path;
  ProviderSpec provider;
  InverterOptions inverter;
  int path_steps = 16;
  std::uint64_t seed = 0;
};

struct BallInclusionResult {
  double pass_rate = 0.0;
  int passed = 0;
  int samples = 0;
  double rho = 0.0;  // radius actually sampled
  std::vector<Vector> failures;
};

/// Samples targets in B(f(x0), rho(delta) (1 - margin)) and checks each one
/// has a preimage in B(x0, delta).
BallInclusionResult ball_inclusion_test(const MapModel& m, const Vector& x0, double delta,
                                        const BetaProfile& profile, int samples,
                                        const BallInclusionOptions& options = {});

struct CompactPreimageOptions {
  InversionMethod method = InversionMethod::path;
  InverterOptions inverter;
  int path_steps = 16;
  /// Start point of every inversion; empty means the origin.
  Vector start;
  RegularityOptions regularity;
};

/// inf { alpha(x) : f(x) in K } over the preimages of the finite set K.
/// Throws InversionFailure carrying the first target that cannot be inverted.
double compact_preimage_regularity(const MapModel& m, const ProviderSpec& provider,
                                   const std::vector<Vector>& targets,
                                   const CompactPreimageOptions& options = {});

}  // namespace pjinv
