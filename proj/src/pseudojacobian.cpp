#include "pjinv/pseudojacobian.hpp"

#include "pjinv/operator_core.hpp"
#include "pjinv/sampling.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

namespace pjinv {

PseudoJacobianSet PseudoJacobianSet::singleton(Operator op, double radius) {
  PseudoJacobianSet j;
  j.vertices.push_back(std::move(op));
  j.radius = radius;
  return j;
}

void PseudoJacobianSet::validate() const {
  if (vertices.empty()) throw std::invalid_argument("PseudoJacobianSet: no vertices");
  if (!(radius >= 0.0)) throw std::invalid_argument("PseudoJacobianSet: negative radius");
  for (const auto& v : vertices) {
    if (v.rows() != rows() || v.cols() != cols())
      throw std::invalid_argument("PseudoJacobianSet: mixed vertex shapes");
  }
}

namespace {

double parse_number(std::string_view key, std::string_view text) {
  const std::string s(text);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
    throw ConfigError("provider: bad value for '" + std::string(key) + "'");
  return v;
}

int parse_count(std::string_view key, std::string_view text) {
  int v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
    throw ConfigError("provider: bad integer for '" + std::string(key) + "'");
  return v;
}

}  // namespace

ProviderSpec ProviderSpec::parse(std::string_view text) {
  ProviderSpec spec;
  const auto colon = text.find(':');
  const auto head = text.substr(0, colon);
  const auto params = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (head == "exact") spec.kind = Kind::exact;
  else if (head == "ball") spec.kind = Kind::ball;
  else if (head == "sum") spec.kind = Kind::sum;
  else if (head == "clarke") spec.kind = Kind::clarke;
  else throw ConfigError("unknown provider '" + std::string(text) + "'");
  if ((spec.kind == Kind::exact || spec.kind == Kind::sum) && colon != std::string_view::npos)
    throw ConfigError("provider '" + std::string(head) + "' takes no parameters");

  std::size_t pos = 0;
  while (pos < params.size()) {
    auto next = params.find(',', pos);
    if (next == std::string_view::npos) next = params.size();
    const auto item = params.substr(pos, next - pos);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("provider: expected key=value in '" + std::string(item) + "'");
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    if (spec.kind == Kind::ball && key == "r") spec.lip_radius = parse_number(key, value);
    else if (spec.kind == Kind::ball && key == "m") spec.lip_samples = parse_count(key, value);
    else if (spec.kind == Kind::clarke && key == "delta") spec.delta = parse_number(key, value);
    else if (spec.kind == Kind::clarke && key == "m") spec.samples = parse_count(key, value);
    else if (spec.kind == Kind::clarke && key == "eps") spec.eps = parse_number(key, value);
    else throw ConfigError("provider: unknown key '" + std::string(key) + "'");
    pos = next + 1;
  }
  spec.validate();
  return spec;
}

std::string ProviderSpec::to_string() const {
  std::ostringstream os;
  os.precision(12);
  switch (kind) {
    case Kind::exact: return "exact";
    case Kind::sum: return "sum";
    case Kind::ball: os << "ball:r=" << lip_radius << ",m=" << lip_samples; break;
    case Kind::clarke: os << "clarke:delta=" << delta << ",m=" << samples << ",eps=" << eps; break;
  }
  return os.str();
}

void ProviderSpec::validate() const {
  if (!(lip_radius > 0.0) || lip_samples < 2) throw ConfigError("provider: ball needs r > 0 and m >= 2");
  if (!(delta > 0.0) || samples < 1 || !(eps >= 0.0))
    throw ConfigError("provider: clarke needs delta > 0, m >= 1, eps >= 0");
}

PseudoJacobianSet exact_singleton(const MapModel& m, const Vector& x) {
  return PseudoJacobianSet::singleton(derivative(m, x));
}

PseudoJacobianSet lipschitz_ball(const MapModel& m, const Vector& x, const ProviderSpec& spec,
                                 std::uint64_t seed) {
  const auto lip = local_lipschitz_estimate(m, x, spec.lip_radius, spec.lip_samples, seed);
  return PseudoJacobianSet::singleton(Operator::Zero(m.dim_out, m.dim_in), lip.value);
}

PseudoJacobianSet sum_rule(const MapModel& m, const Vector& x, const ProviderSpec& spec,
                           std::uint64_t seed) {
  if (!m.smooth_part) throw ConfigError(m.name + ": sum provider needs a smooth part");
  const SmoothPart& g = *m.smooth_part;
  Operator gprime = g.jacobian(x);
  double lip = 0.0;
  if (m.lip_part) {
    lip = (*m.lip_part)(x, 0.0);
  } else {
    MapModel h;
    h.name = m.name + "-h";
    h.dim_in = m.dim_in;
    h.dim_out = m.dim_out;
    h.box_lo = m.box_lo;
    h.box_hi = m.box_hi;
    h.eval = [f = m.eval, ge = g.eval](const Vector& z) -> Vector { return f(z) - ge(z); };
    lip = local_lipschitz_estimate(h, x, spec.lip_radius, spec.lip_samples, seed).value;
  }
  return PseudoJacobianSet::singleton(std::move(gprime), lip);
}

PseudoJacobianSet sampled_clarke(const MapModel& m, const Vector& x, const ProviderSpec& spec,
                                 std::uint64_t seed) {
  constexpr int kRedraws = 16;
  Rng rng = make_rng(seed, 0xc1a);
  PseudoJacobianSet j;
  j.radius = spec.eps;
  j.vertices.reserve(static_cast<std::size_t>(spec.samples));
  for (int s = 0; s < spec.samples; ++s) {
    bool ok = false;
    for (int attempt = 0; attempt <= kRedraws && !ok; ++attempt) {
      const Vector z = random_in_ball(rng, x, spec.delta);
      if (m.jacobian) {
        j.vertices.push_back(derivative(m, z));
        ok = true;
      } else if (auto jac = try_numeric_jacobian(m, z, std::min(default_step(z), 0.1 * spec.delta))) {
        j.vertices.push_back(std::move(*jac));
        ok = true;
      }
    }
    if (!ok) throw DifferentiationError(m.name + ": no differentiability point found near sample");
  }
  return j;
}

PseudoJacobianSet pseudo_jacobian(const MapModel& m, const Vector& x, const ProviderSpec& spec,
                                  std::uint64_t seed) {
  switch (spec.kind) {
    case ProviderSpec::Kind::exact: return exact_singleton(m, x);
    case ProviderSpec::Kind::ball: return lipschitz_ball(m, x, spec, seed);
    case ProviderSpec::Kind::sum: return sum_rule(m, x, spec, seed);
    case ProviderSpec::Kind::clarke: return sampled_clarke(m, x, spec, seed);
  }
  throw ConfigError("unknown provider kind");
}

double support_function(const PseudoJacobianSet& j, const Vector& ystar, const Vector& v) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& op : j.vertices) best = std::max(best, ystar.dot(op * v));
  return best + j.radius * ystar.norm() * v.norm();
}

PseudoJacobianSet pj_combine(double alpha, const PseudoJacobianSet& j1, const PseudoJacobianSet& j2) {
  if (j1.rows() != j2.rows() || j1.cols() != j2.cols())
    throw std::invalid_argument("pj_combine: shape mismatch");
  PseudoJacobianSet out;
  out.vertices.reserve(j1.vertices.size() * j2.vertices.size());
  for (const auto& a : j1.vertices)
    for (const auto& b : j2.vertices) out.vertices.push_back(alpha * a + b);
  out.radius = std::abs(alpha) * j1.radius + j2.radius;
  return out;
}

PseudoJacobianSet pj_compose_left(const Operator& outer, const PseudoJacobianSet& j) {
  PseudoJacobianSet out;
  out.vertices.reserve(j.vertices.size());
  for (const auto& v : j.vertices) out.vertices.push_back(outer * v);
  out.radius = j.radius == 0.0 ? 0.0 : j.radius * spectral_norm(outer);
  return out;
}

PseudoJacobianSet dedupe_vertices(const PseudoJacobianSet& j, double tol) {
  PseudoJacobianSet out;
  out.radius = j.radius;
  for (const auto& v : j.vertices) {
    bool seen = false;
    for (const auto& u : out.vertices) {
      if ((u - v).lpNorm<Eigen::Infinity>() <= tol) {
        seen = true;
        break;
      }
    }
    if (!seen) out.vertices.push_back(v);
  }
  return out;
}

ValidityReport validity_check(const MapModel& m, const Vector& x, const PseudoJacobianSet& j,
                              const ValidityOptions& options) {
  if (options.trials < 1) throw std::invalid_argument("validity_check: trials < 1");
  j.validate();
  Rng rng = make_rng(options.seed, 0x7a1);
  const Vector fx = evaluate(m, x);
  ValidityReport report;
  report.trials = options.trials;
  if (options.tol >= 0.0) {
    report.tol = options.tol;
  } else {
    double tmin = options.grid.t0 * std::pow(options.grid.rho, options.grid.k - 1);
    report.tol = 1e-3 + 8.0 * std::numeric_limits<double>::epsilon() * (1.0 + fx.norm()) / tmin;
  }
  for (int trial = 0; trial < options.trials; ++trial) {
    const Vector ystar = random_unit(rng, m.dim_out);
    const Vector v = random_unit(rng, m.dim_in);
    const ScalarFn phi = [&](const Vector& z) { return ystar.dot(evaluate(m, z)); };
    const DiniEstimate dini = dini_derivatives(phi, x, v, options.grid);
    const double upper_excess = dini.upper - support_function(j, ystar, v);
    const double lower_excess = -support_function(j, -ystar, v) - dini.lower;
    const double excess = std::max(upper_excess, lower_excess);
    report.worst_excess = trial == 0 ? excess : std::max(report.worst_excess, excess);
    if (excess <= report.tol) ++report.passed;
  }
  report.pass_rate = static_cast<double>(report.passed) / options.trials;
  return report;
}

}  // namespace pjinv
