#include "pjinv/hadamard.hpp"

#include "pjinv/sampling.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace pjinv {

std::vector<double> cumulative_trapezoid(const std::vector<double>& grid, const std::vector<double>& values) {
  std::vector<double> out(grid.size(), 0.0);
  for (std::size_t j = 1; j < grid.size(); ++j)
    out[j] = out[j - 1] + 0.5 * (grid[j] - grid[j - 1]) * (values[j] + values[j - 1]);
  return out;
}

double BetaProfile::rho_at(double t) const {
  if (t <= grid.front()) return 0.0;
  if (t >= grid.back()) return rho.back();
  const auto it = std::upper_bound(grid.begin(), grid.end(), t);
  const auto j = static_cast<std::size_t>(it - grid.begin()) - 1;
  const double h = grid[j + 1] - grid[j];
  const double s = (t - grid[j]) / h;
  const double beta_t = beta[j] + s * (beta[j + 1] - beta[j]);
  return rho[j] + 0.5 * (t - grid[j]) * (beta[j] + beta_t);
}

BetaProfile beta_profile(const MapModel& m, const ProviderSpec& provider, const Vector& center,
                         double t_max, const BetaOptions& options,
                         const std::optional<AnalyticBeta>& analytic) {
  if (!(t_max > 0.0) || options.grid_n < 2) throw std::invalid_argument("beta_profile: need t_max > 0, grid_n >= 2");
  BetaProfile p;
  const auto n = static_cast<std::size_t>(options.grid_n);
  p.grid.resize(n);
  for (std::size_t j = 0; j < n; ++j) p.grid[j] = t_max * static_cast<double>(j) / static_cast<double>(n - 1);
  p.beta.resize(n);

  if (analytic) {
    p.mode = BetaProfile::Mode::analytic;
    p.divergent = analytic->divergent;
    for (std::size_t j = 0; j < n; ++j) p.beta[j] = std::max(analytic->beta(p.grid[j]), 0.0);
  } else {
    p.mode = BetaProfile::Mode::sampled;
    double running = std::numeric_limits<double>::infinity();
    Vector argmin = center;
    std::uint64_t index = 1;
    for (std::size_t j = 0; j < n; ++j) {
      const auto consider = [&](const Vector& z) {
        const RegularityReport rep = regularity_index(m, provider, z, options.regularity);
        if (rep.bound_kind != RegularityReport::BoundKind::certified) p.all_certified = false;
        const double a = rep.alpha;
        if (a < running) {
          running = a;
          argmin = z;
        }
      };
      if (j == 0) {
        consider(center);
      } else {
        for (int s = 0; s < options.samples_per_shell; ++s)
          consider(halton_in_annulus(index++, center, p.grid[j - 1], p.grid[j]));
      }
      p.beta[j] = running;
      p.witnesses.push_back(argmin);
    }
  }
  for (std::size_t j = 1; j < n; ++j) p.beta[j] = std::min(p.beta[j], p.beta[j - 1]);
  p.rho = cumulative_trapezoid(p.grid, p.beta);
  return p;
}

const char* to_string(HadamardVerdict verdict) {
  switch (verdict) {
    case HadamardVerdict::diverges_analytic: return "diverges_analytic";
    case HadamardVerdict::inconclusive_growing: return "inconclusive_growing";
    case HadamardVerdict::inconclusive_flat: return "inconclusive_flat";
    case HadamardVerdict::fails: return "fails";
  }
  return "?";
}

HadamardResult hadamard_verdict(const BetaProfile& profile) {
  HadamardResult out;
  out.rho_at_tmax = profile.rho.back();
  out.beta_at_tmax = profile.beta.back();
  constexpr double kZero = 1e-12;
  if (profile.mode == BetaProfile::Mode::analytic && profile.divergent) {
    out.verdict = HadamardVerdict::diverges_analytic;
  } else if (out.beta_at_tmax <= kZero) {
    out.verdict = HadamardVerdict::fails;
  } else if (out.beta_at_tmax <= 1e-6 * std::max(profile.beta.front(), kZero)) {
    out.verdict = HadamardVerdict::inconclusive_flat;
  } else {
    out.verdict = HadamardVerdict::inconclusive_growing;
  }
  return out;
}

void write_profile_csv(std::ostream& out, const BetaProfile& profile) {
  out << "t,beta,rho\n";
  char buf[128];
  for (std::size_t j = 0; j < profile.grid.size(); ++j) {
    std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", profile.grid[j], profile.beta[j], profile.rho[j]);
    out << buf;
  }
}

BallInclusionResult ball_inclusion_test(const MapModel& m, const Vector& x0, double delta,
                                        const BetaProfile& profile, int samples,
                                        const BallInclusionOptions& options) {
  if (delta > profile.t_max() * (1.0 + 1e-12))
    throw std::invalid_argument("ball_inclusion_test: delta beyond the profile grid");
  BallInclusionResult out;
  out.samples = samples;
  out.rho = profile.rho_at(delta) * (1.0 - options.margin);
  const Vector y0 = evaluate(m, x0);
  Rng rng = make_rng(options.seed, 0xba11);
  for (int s = 0; s < samples; ++s) {
    const Vector y = random_in_ball(rng, y0, out.rho);
    bool ok = false;
    try {
      const InversionTrace trace =
          invert(m, options.provider, options.method, y, x0, options.inverter, options.path_steps);
      ok = trace.converged() && (trace.final_x - x0).norm() < delta &&
           trace.final_residual < options.inverter.tol * (1.0 + 1e-9);
    } catch (const Error&) {
      ok = false;
    }
    if (ok) ++out.passed;
    else out.failures.push_back(y);
  }
  out.pass_rate = samples > 0 ? static_cast<double>(out.passed) / samples : 0.0;
  return out;
}

double compact_preimage_regularity(const MapModel& m, const ProviderSpec& provider,
                                   const std::vector<Vector>& targets,
                                   const CompactPreimageOptions& options) {
  if (targets.empty()) throw std::invalid_argument("compact_preimage_regularity: empty K");
  const Vector start = options.start.size() ? options.start : Vector::Zero(m.dim_in);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& y : targets) {
    const InversionTrace trace = invert(m, provider, options.method, y, start, options.inverter, options.path_steps);
    if (!trace.converged()) throw InversionFailure("could not invert a target of K", y);
    best = std::min(best, regularity_index(m, provider, trace.final_x, options.regularity).alpha);
  }
  return best;
}

}  // namespace pjinv
