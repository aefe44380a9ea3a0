#include "pjinv/inverter.hpp"

#include "pjinv/operator_core.hpp"
#include "pjinv/sampling.hpp"

#include <cmath>

namespace pjinv {

const char* to_string(InversionMethod method) {
  switch (method) {
    case InversionMethod::newton: return "newton";
    case InversionMethod::path: return "path";
    case InversionMethod::ekeland: return "ekeland";
  }
  return "?";
}

const char* to_string(InversionStatus status) {
  switch (status) {
    case InversionStatus::converged: return "converged";
    case InversionStatus::diverged: return "diverged";
    case InversionStatus::step_underflow: return "step_underflow";
    case InversionStatus::max_iter: return "max_iter";
    case InversionStatus::stationary: return "stationary";
  }
  return "?";
}

InversionMethod parse_method(std::string_view text) {
  if (text == "newton") return InversionMethod::newton;
  if (text == "path") return InversionMethod::path;
  if (text == "ekeland") return InversionMethod::ekeland;
  throw ConfigError("unknown inversion method '" + std::string(text) + "'");
}

namespace {

std::optional<double> residual_at(const MapModel& m, const Vector& x, const Vector& y) {
  try {
    return (evaluate(m, x) - y).norm();
  } catch (const DomainError&) {
    return std::nullopt;
  }
}

struct NewtonStep {
  Vector direction;  // solves T d = r
  bool pseudo_inverse = false;
  bool singular = false;
};

NewtonStep newton_direction(const PseudoJacobianSet& j, const Vector& r, double singular_tol) {
  std::size_t best = 0;
  double best_conorm = -1.0;
  for (std::size_t i = 0; i < j.vertices.size(); ++i) {
    const double c = conorm(j.vertices[i]);
    if (c > best_conorm) {
      best_conorm = c;
      best = i;
    }
  }
  const Operator& t = j.vertices[best];
  NewtonStep step;
  const double scale = t.lpNorm<Eigen::Infinity>();
  if (t.rows() == t.cols() && best_conorm > singular_tol * std::max(scale, 1e-300)) {
    step.direction = t.partialPivLu().solve(r);
  } else {
    step.direction = t.completeOrthogonalDecomposition().solve(r);
    step.pseudo_inverse = true;
    step.singular = !(step.direction.norm() > 0.0) || !step.direction.allFinite();
  }
  return step;
}

}  // namespace

InversionTrace semismooth_newton(const MapModel& m, const ProviderSpec& provider, const Vector& y,
                                 const Vector& x0, const InverterOptions& options) {
  if (!(options.tol > 0.0)) throw std::invalid_argument("semismooth_newton: tol must be positive");
  InversionTrace trace;
  trace.method = InversionMethod::newton;
  Vector x = x0;
  Vector r = evaluate(m, x) - y;
  double res = r.norm();
  trace.iterates.push_back(x);
  trace.residuals.push_back(res);
  trace.t_grid.push_back(0.0);
  trace.status = InversionStatus::max_iter;

  for (int k = 0;; ++k) {
    if (res <= options.tol) {
      trace.status = InversionStatus::converged;
      break;
    }
    if (k >= options.max_iter) break;
    const PseudoJacobianSet j =
        pseudo_jacobian(m, x, provider, options.seed + static_cast<std::uint64_t>(k));
    const NewtonStep step = newton_direction(j, r, options.singular_tol);
    trace.used_pseudo_inverse = trace.used_pseudo_inverse || step.pseudo_inverse;
    if (step.singular) {
      trace.status = InversionStatus::diverged;
      trace.witness = x;
      trace.note = "no nonsingular pseudo-Jacobian element";
      break;
    }
    double s = 1.0;
    bool accepted = false;
    Vector next;
    double next_res = 0.0;
    for (int h = 0; h <= options.max_halvings; ++h, s *= options.backtrack) {
      next = x - s * step.direction;
      const auto nr = residual_at(m, next, y);
      if (nr && *nr <= (1.0 - options.armijo * s) * res) {
        next_res = *nr;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      trace.status = step.pseudo_inverse ? InversionStatus::diverged : InversionStatus::step_underflow;
      trace.witness = x;
      trace.note = "line search failed";
      break;
    }
    x = std::move(next);
    r = evaluate(m, x) - y;
    res = next_res;
    trace.iterates.push_back(x);
    trace.residuals.push_back(res);
    trace.t_grid.push_back(static_cast<double>(k + 1));
    if (x.norm() > options.divergence_norm) {
      trace.status = InversionStatus::diverged;
      trace.witness = x;
      trace.note = "iterate norm above divergence threshold";
      break;
    }
  }
  trace.final_x = x;
  trace.final_residual = res;
  return trace;
}

InversionTrace path_lift_invert(const MapModel& m, const ProviderSpec& provider, const Vector& x0,
                                const Vector& y_target, int steps, const InverterOptions& options) {
  if (steps < 1) throw std::invalid_argument("path_lift_invert: steps < 1");
  InversionTrace trace;
  trace.method = InversionMethod::path;
  const Vector y0 = evaluate(m, x0);
  Vector x = x0;
  double t = 0.0;
  const double nominal = 1.0 / steps;
  double dt = nominal;
  bool blowup = false;
  trace.t_grid.push_back(0.0);
  trace.iterates.push_back(x);
  trace.residuals.push_back(0.0);
  trace.status = InversionStatus::converged;

  InverterOptions corrector = options;
  corrector.max_iter = options.corrector_iter;
  while (t < 1.0) {
    double tn = t + std::min(dt, 1.0 - t);
    if (1.0 - tn < 1e-15) tn = 1.0;
    const Vector p = (1.0 - tn) * y0 + tn * y_target;
    InversionTrace solve = semismooth_newton(m, provider, p, x, corrector);
    trace.used_pseudo_inverse = trace.used_pseudo_inverse || solve.used_pseudo_inverse;
    if (solve.converged()) {
      t = tn;
      x = solve.final_x;
      trace.t_grid.push_back(t);
      trace.iterates.push_back(x);
      trace.residuals.push_back(solve.final_residual);
      if (x.norm() > options.divergence_norm) {
        trace.status = InversionStatus::diverged;
        trace.witness = x;
        break;
      }
      dt = std::min(2.0 * dt, nominal);
      continue;
    }
    for (const auto& it : solve.iterates)
      if (it.norm() > options.divergence_norm) blowup = true;
    if (solve.status == InversionStatus::diverged) blowup = true;
    dt *= 0.5;
    if (dt < options.min_step) {
      trace.status = blowup ? InversionStatus::diverged : InversionStatus::step_underflow;
      trace.witness = x;
      trace.note = "evidence that the segment cannot be lifted beyond t = " + std::to_string(t);
      break;
    }
  }
  trace.final_x = x;
  trace.final_residual = (evaluate(m, x) - y_target).norm();
  if (trace.status == InversionStatus::converged && trace.final_residual > options.tol)
    trace.status = InversionStatus::max_iter;
  return trace;
}

InversionTrace ekeland_descent(const MapModel& m, const ProviderSpec& provider, const Vector& y,
                               const Vector& x0, double lambda, double eps,
                               const InverterOptions& options) {
  if (!(lambda > 0.0) || !(eps > 0.0)) throw std::invalid_argument("ekeland_descent: lambda, eps > 0");
  InversionTrace trace;
  trace.method = InversionMethod::ekeland;
  Rng rng = make_rng(options.seed, 0xe4e);
  Vector x = x0;
  Vector r = evaluate(m, x) - y;
  double phi = r.norm();
  trace.iterates.push_back(x);
  trace.residuals.push_back(phi);
  trace.t_grid.push_back(0.0);
  trace.status = InversionStatus::max_iter;

  const auto admissible = [&](const Vector& cand) -> std::optional<double> {
    const auto pc = residual_at(m, cand, y);
    if (pc && *pc < phi - lambda * (cand - x).norm()) return pc;
    return std::nullopt;
  };

  for (int k = 0;; ++k) {
    if (phi <= options.tol) {
      trace.status = InversionStatus::converged;
      break;
    }
    if (k >= options.max_iter) break;
    const PseudoJacobianSet j =
        pseudo_jacobian(m, x, provider, options.seed + static_cast<std::uint64_t>(k));
    std::optional<Vector> next;
    double next_phi = 0.0;
    for (const auto& t : j.vertices) {
      const Vector d = t.completeOrthogonalDecomposition().solve(r);
      if (!d.allFinite() || d.norm() == 0.0) continue;
      double s = 1.0;
      for (int h = 0; h <= options.max_halvings && !next; ++h, s *= options.backtrack) {
        const Vector cand = x - s * d;
        if (auto pc = admissible(cand)) {
          next = cand;
          next_phi = *pc;
        }
      }
      if (next) break;
    }
    if (!next) {
      // Random probes: 2n unit directions at geometrically shrinking lengths.
      for (Eigen::Index p = 0; p < 2 * m.dim_in && !next; ++p) {
        const Vector u = random_unit(rng, m.dim_in);
        double len = phi;
        for (int h = 0; h <= options.max_halvings && !next; ++h, len *= options.backtrack) {
          const Vector cand = x + len * u;
          if (auto pc = admissible(cand)) {
            next = cand;
            next_phi = *pc;
          }
        }
      }
    }
    if (!next) {
      // lambda-stationarity: dist(0, ystar o co J(x) + lambda * ball) <= eps.
      const Vector ystar = r / phi;
      HullSet dual;
      for (const auto& t : j.vertices) dual.vertices.push_back(t.transpose() * ystar);
      dual.radius = j.radius + lambda;
      const double dist = dist_to_hull(Vector::Zero(m.dim_in), dual);
      trace.witness = x;
      if (dist <= eps) {
        trace.status = InversionStatus::stationary;
        trace.note = "lambda-stationary point";
      } else {
        trace.status = InversionStatus::step_underflow;
        trace.note = "no admissible move found";
      }
      break;
    }
    x = std::move(*next);
    r = evaluate(m, x) - y;
    phi = next_phi;
    trace.iterates.push_back(x);
    trace.residuals.push_back(phi);
    trace.t_grid.push_back(static_cast<double>(k + 1));
    if (x.norm() > options.divergence_norm) {
      trace.status = InversionStatus::diverged;
      trace.witness = x;
      break;
    }
  }
  trace.final_x = x;
  trace.final_residual = phi;
  return trace;
}

InversionTrace invert(const MapModel& m, const ProviderSpec& provider, InversionMethod method,
                      const Vector& y, const Vector& x0, const InverterOptions& options, int path_steps,
                      double lambda, double eps) {
  switch (method) {
    case InversionMethod::newton: return semismooth_newton(m, provider, y, x0, options);
    case InversionMethod::path: return path_lift_invert(m, provider, x0, y, path_steps, options);
    case InversionMethod::ekeland: return ekeland_descent(m, provider, y, x0, lambda, eps, options);
  }
  throw ConfigError("unknown inversion method");
}

double inverse_lipschitz_probe(const MapModel& m, const Vector& center, double radius, int pairs,
                               std::uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("inverse_lipschitz_probe: pairs < 1");
  Rng rng = make_rng(seed, 0x1e7);
  const double gap = 1e-6 * std::max(1.0, radius);
  double best = 0.0;
  int used = 0;
  for (int p = 0; p < pairs; ++p) {
    const Vector x1 = random_in_ball(rng, center, radius);
    // Alternate far pairs with near-coincident ones.
    const Vector x2 = p % 2 == 0 ? random_in_ball(rng, center, radius)
                                 : Vector(x1 + gap * random_unit(rng, m.dim_in));
    const double dy = (evaluate(m, x1) - evaluate(m, x2)).norm();
    const double dx = (x1 - x2).norm();
    if (!(dy > 0.0) || dx == 0.0) continue;
    ++used;
    best = std::max(best, dx / dy);
  }
  if (used == 0) throw Error("inverse_lipschitz_probe: all sampled pairs had coincident images");
  return best;
}

}  // namespace pjinv
