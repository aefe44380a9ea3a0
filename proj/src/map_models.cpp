#include "pjinv/map_models.hpp"

#include "pjinv/operator_core.hpp"
#include "pjinv/sampling.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace pjinv {

double Theta::operator()(double t) const {
  switch (kind) {
    case Kind::linear: return c * t;
    case Kind::identity: return t;
    case Kind::log_damped: return t - std::log1p(t);
  }
  return 0.0;
}

double Theta::derivative(double t) const {
  switch (kind) {
    case Kind::linear: return c;
    case Kind::identity: return 1.0;
    case Kind::log_damped: return t / (1.0 + t);
  }
  return 0.0;
}

namespace {

SmoothPart linear_part(const Operator& a) {
  return SmoothPart{[a](const Vector& x) -> Vector { return a * x; },
                    [a](const Vector&) -> Operator { return a; }};
}

LipschitzFn zero_lipschitz() {
  return [](const Vector&, double) { return 0.0; };
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    parts.push_back(s.substr(pos, next == std::string_view::npos ? next : next - pos));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return parts;
}

Eigen::Index parse_dim(std::string_view s, std::string_view id) {
  long value = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size() || value < 1)
    throw ConfigError("bad dimension in map id '" + std::string(id) + "'");
  return static_cast<Eigen::Index>(value);
}

double parse_real(std::string_view s, std::string_view id) {
  // from_chars for double is not available everywhere yet; strtod is exact enough.
  const std::string str(s);
  char* end = nullptr;
  const double value = std::strtod(str.c_str(), &end);
  if (str.empty() || end != str.c_str() + str.size() || !std::isfinite(value))
    throw ConfigError("bad number in map id '" + std::string(id) + "'");
  return value;
}

}  // namespace

MapModel make_identity(Eigen::Index n) {
  const Operator eye = Operator::Identity(n, n);
  MapModel m;
  m.name = n == 2 ? "identity" : "identity:" + std::to_string(n);
  m.dim_in = m.dim_out = n;
  m.eval = [](const Vector& x) -> Vector { return x; };
  m.jacobian = [eye](const Vector&) -> Operator { return eye; };
  m.smooth_part = linear_part(eye);
  m.lip_part = zero_lipschitz();
  m.analytic_beta = AnalyticBeta{[](double) { return 1.0; }, true};
  return m;
}

MapModel make_linear(const Operator& a, std::string name) {
  if (a.size() == 0 || !a.allFinite()) throw ConfigError("linear map needs a finite nonempty matrix");
  MapModel m;
  m.name = std::move(name);
  m.dim_in = a.cols();
  m.dim_out = a.rows();
  m.eval = [a](const Vector& x) -> Vector { return a * x; };
  m.jacobian = [a](const Vector&) -> Operator { return a; };
  m.smooth_part = linear_part(a);
  m.lip_part = zero_lipschitz();
  const double c = conorm(a);
  m.analytic_beta = AnalyticBeta{[c](double) { return c; }, c > 0.0};
  return m;
}

MapModel make_theta_map(Eigen::Index n, Theta theta) {
  if (n < 1) throw ConfigError("theta map needs n >= 1");
  if (theta.kind == Theta::Kind::linear && !std::isfinite(theta.c))
    throw ConfigError("theta map needs finite c");
  MapModel m;
  switch (theta.kind) {
    case Theta::Kind::linear: {
      std::ostringstream os;
      os << "theta-a:" << n << ":" << theta.c;
      m.name = os.str();
      break;
    }
    case Theta::Kind::identity: m.name = "theta-b:" + std::to_string(n); break;
    case Theta::Kind::log_damped: m.name = "theta-c:" + std::to_string(n); break;
  }
  m.dim_in = m.dim_out = n;
  m.eval = [theta](const Vector& x) -> Vector {
    Vector y = x;
    for (Eigen::Index i = 0; i + 1 < x.size(); ++i) y(i) += theta(std::abs(x(i + 1)));
    return y;
  };
  m.smooth_part = linear_part(Operator::Identity(n, n));
  m.lip_part = [theta, n](const Vector& x, double r) {
    if (n == 1) return 0.0;
    switch (theta.kind) {
      case Theta::Kind::linear: return std::abs(theta.c);
      case Theta::Kind::identity: return 1.0;
      case Theta::Kind::log_damped: {
        // theta' is increasing, and |u_j| <= |x_j| + r on B(x, r).
        const double reach = x.tail(n - 1).cwiseAbs().maxCoeff() + std::max(r, 0.0);
        return theta.derivative(reach);
      }
    }
    return 0.0;
  };
  switch (theta.kind) {
    case Theta::Kind::linear: {
      const double a = std::max(1.0 - std::abs(theta.c), 0.0);
      m.analytic_beta = AnalyticBeta{[a](double) { return a; }, a > 0.0};
      break;
    }
    case Theta::Kind::identity:
      m.analytic_beta = AnalyticBeta{[](double) { return 0.0; }, false};
      break;
    case Theta::Kind::log_damped:
      // 1 - sup_{|x| <= t} theta'(|x_j|) = 1 / (1 + t).
      m.analytic_beta = AnalyticBeta{[](double t) { return 1.0 / (1.0 + t); }, true};
      break;
  }
  return m;
}

MapModel make_exp1d() {
  MapModel m;
  m.name = "exp1d";
  m.eval = [](const Vector& x) -> Vector { return x.array().exp().matrix(); };
  m.jacobian = [](const Vector& x) -> Operator {
    Operator j(1, 1);
    j(0, 0) = std::exp(x(0));
    return j;
  };
  m.smooth_part = SmoothPart{m.eval, *m.jacobian};
  m.lip_part = zero_lipschitz();
  m.analytic_beta = AnalyticBeta{[](double t) { return std::exp(-t); }, false};
  return m;
}

MapModel make_complexsq() {
  MapModel m;
  m.name = "complexsq";
  m.dim_in = m.dim_out = 2;
  m.eval = [](const Vector& x) -> Vector {
    Vector y(2);
    y << x(0) * x(0) - x(1) * x(1), 2.0 * x(0) * x(1);
    return y;
  };
  m.jacobian = [](const Vector& x) -> Operator {
    Operator j(2, 2);
    j << 2.0 * x(0), -2.0 * x(1), 2.0 * x(1), 2.0 * x(0);
    return j;
  };
  m.smooth_part = SmoothPart{m.eval, *m.jacobian};
  m.lip_part = zero_lipschitz();
  m.analytic_beta = AnalyticBeta{[](double) { return 0.0; }, false};
  return m;
}

MapModel make_abs_shift() {
  MapModel m;
  m.name = "abs-shift";
  m.eval = [](const Vector& x) -> Vector {
    Vector y(1);
    y(0) = x(0) + 0.5 * std::abs(x(0));
    return y;
  };
  m.smooth_part = linear_part(Operator::Identity(1, 1));
  m.lip_part = [](const Vector&, double) { return 0.5; };
  m.analytic_beta = AnalyticBeta{[](double) { return 0.5; }, true};
  return m;
}

MapModel make_abs() {
  MapModel m;
  m.name = "abs";
  m.eval = [](const Vector& x) -> Vector {
    Vector y(1);
    y(0) = std::abs(x(0));
    return y;
  };
  m.smooth_part = linear_part(Operator::Zero(1, 1));
  m.lip_part = [](const Vector&, double) { return 1.0; };
  return m;
}

MapModel make_sqdist(const Vector& a) {
  MapModel m;
  std::ostringstream os;
  os << "sqdist:";
  for (Eigen::Index i = 0; i < a.size(); ++i) os << (i ? "," : "") << a(i);
  m.name = os.str();
  m.dim_in = a.size();
  m.dim_out = 1;
  m.eval = [a](const Vector& x) -> Vector {
    Vector y(1);
    y(0) = (x - a).squaredNorm();
    return y;
  };
  m.jacobian = [a](const Vector& x) -> Operator { return 2.0 * (x - a).transpose(); };
  m.smooth_part = SmoothPart{m.eval, *m.jacobian};
  m.lip_part = zero_lipschitz();
  return m;
}

MapModel make_distance(const Vector& y0) {
  MapModel m;
  m.name = "distance";
  m.dim_in = y0.size();
  m.dim_out = 1;
  m.eval = [y0](const Vector& y) -> Vector {
    Vector out(1);
    out(0) = (y - y0).norm();
    return out;
  };
  m.jacobian = [y0](const Vector& y) -> Operator {
    const Vector d = y - y0;
    const double n = d.norm();
    if (n == 0.0) throw DifferentiationError("distance: not differentiable at its center");
    return (d / n).transpose();
  };
  return m;
}

MapModel make_pwquad() {
  MapModel m;
  m.name = "pwquad";
  m.eval = [](const Vector& x) -> Vector {
    Vector y(1);
    y(0) = std::max(x(0) * x(0), (x(0) - 1.0) * (x(0) - 1.0));
    return y;
  };
  return m;
}

MapModel compose(const MapModel& outer, const MapModel& inner) {
  if (outer.dim_in != inner.dim_out) throw ConfigError("compose: dimension mismatch");
  MapModel m;
  m.name = outer.name + "o" + inner.name;
  m.dim_in = inner.dim_in;
  m.dim_out = outer.dim_out;
  m.eval = [outer, inner](const Vector& x) -> Vector { return outer.eval(inner.eval(x)); };
  if (outer.jacobian && inner.jacobian) {
    m.jacobian = [outer, inner](const Vector& x) -> Operator {
      return (*outer.jacobian)(inner.eval(x)) * (*inner.jacobian)(x);
    };
  }
  m.usc = outer.usc && inner.usc;
  m.box_lo = inner.box_lo;
  m.box_hi = inner.box_hi;
  return m;
}

Vector theta_back_substitute(const Vector& y, Theta theta) {
  Vector x = y;
  for (Eigen::Index i = y.size() - 2; i >= 0; --i) x(i) = y(i) - theta(std::abs(x(i + 1)));
  return x;
}

Operator read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open matrix file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    for (auto& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream ls(line);
    std::vector<double> row;
    std::string tok;
    while (ls >> tok) row.push_back(parse_real(tok, path));
    if (!row.empty()) rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError("matrix file '" + path + "' is empty");
  Operator a(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows[0].size()) throw ConfigError("ragged matrix file '" + path + "'");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return a;
}

MapModel make_map(std::string_view id) {
  const auto parts = split(id, ':');
  const auto head = parts.front();
  const auto arity = [&](std::size_t n) {
    if (parts.size() != n) throw ConfigError("wrong number of fields in map id '" + std::string(id) + "'");
  };
  MapModel m;
  if (head == "identity") {
    if (parts.size() == 1) return make_identity(2);
    arity(2);
    return make_identity(parse_dim(parts[1], id));
  } else if (head == "linear") {
    // The path may itself contain ':'.
    if (parts.size() < 2) throw ConfigError("linear map needs a matrix file");
    m = make_linear(read_matrix_file(std::string(id.substr(7))), std::string(id));
  } else if (head == "theta-a") {
    arity(3);
    Theta th{Theta::Kind::linear, parse_real(parts[2], id)};
    m = make_theta_map(parse_dim(parts[1], id), th);
  } else if (head == "theta-b") {
    arity(2);
    m = make_theta_map(parse_dim(parts[1], id), Theta{Theta::Kind::identity, 1.0});
  } else if (head == "theta-c") {
    arity(2);
    m = make_theta_map(parse_dim(parts[1], id), Theta{Theta::Kind::log_damped, 1.0});
  } else if (head == "exp1d") {
    arity(1);
    m = make_exp1d();
  } else if (head == "complexsq") {
    arity(1);
    m = make_complexsq();
  } else if (head == "abs-shift") {
    arity(1);
    m = make_abs_shift();
  } else if (head == "abs") {
    arity(1);
    m = make_abs();
  } else if (head == "pwquad") {
    arity(1);
    m = make_pwquad();
  } else if (head == "sqdist") {
    arity(2);
    const auto comps = split(parts[1], ',');
    Vector a(static_cast<Eigen::Index>(comps.size()));
    for (std::size_t i = 0; i < comps.size(); ++i) a(static_cast<Eigen::Index>(i)) = parse_real(comps[i], id);
    m = make_sqdist(a);
  } else {
    throw ConfigError("unknown map id '" + std::string(id) + "'");
  }
  m.name = std::string(id);
  return m;
}

std::vector<CatalogEntry> catalog_listing() {
  return {
      {"identity", "2 -> 2 (identity:<n> for n -> n)", "identity map"},
      {"linear:<matrix-file>", "cols -> rows", "x -> A x with A read from a text file"},
      {"theta-a:<n>:<c>", "n -> n", "x_i + c |x_{i+1}|"},
      {"theta-b:<n>", "n -> n", "x_i + |x_{i+1}|"},
      {"theta-c:<n>", "n -> n", "x_i + theta(|x_{i+1}|), theta(t) = t - log(1 + t)"},
      {"exp1d", "1 -> 1", "e^x"},
      {"complexsq", "2 -> 2", "z -> z^2 on R^2"},
      {"abs-shift", "1 -> 1", "x + 0.5 |x|"},
      {"abs", "1 -> 1", "|x|"},
      {"pwquad", "1 -> 1", "max(x^2, (x - 1)^2)"},
      {"sqdist:<a1,...,an>", "n -> 1", "|x - a|^2"},
  };
}

namespace {

void check_input(const MapModel& m, const Vector& x) {
  if (x.size() != m.dim_in)
    throw DomainError(m.name + ": expected input of dimension " + std::to_string(m.dim_in));
  if (!x.allFinite()) throw DomainError(m.name + ": non-finite input");
  if ((x.array() < m.box_lo).any() || (x.array() > m.box_hi).any())
    throw DomainError(m.name + ": input outside the domain box");
}

}  // namespace

Vector evaluate(const MapModel& m, const Vector& x) {
  check_input(m, x);
  Vector y = m.eval(x);
  if (y.size() != m.dim_out || !y.allFinite()) throw DomainError(m.name + ": non-finite value");
  return y;
}

double default_step(const Vector& x) { return 1e-6 * (1.0 + x.norm()); }

Operator numeric_jacobian(const MapModel& m, const Vector& x, double step) {
  Operator j(m.dim_out, m.dim_in);
  Vector probe = x;
  for (Eigen::Index k = 0; k < m.dim_in; ++k) {
    probe(k) = x(k) + step;
    const Vector fp = evaluate(m, probe);
    probe(k) = x(k) - step;
    const Vector fm = evaluate(m, probe);
    probe(k) = x(k);
    j.col(k) = (fp - fm) / (2.0 * step);
  }
  if (!j.allFinite()) throw DifferentiationError(m.name + ": non-finite Jacobian entry");
  return j;
}

std::optional<Operator> try_numeric_jacobian(const MapModel& m, const Vector& x, double step,
                                             double kink_tol) {
  Operator j(m.dim_out, m.dim_in);
  const Vector f0 = evaluate(m, x);
  Vector probe = x;
  for (Eigen::Index k = 0; k < m.dim_in; ++k) {
    probe(k) = x(k) + step;
    const Vector fp = evaluate(m, probe);
    probe(k) = x(k) - step;
    const Vector fm = evaluate(m, probe);
    probe(k) = x(k);
    const Vector forward = (fp - f0) / step;
    const Vector backward = (f0 - fm) / step;
    j.col(k) = 0.5 * (forward + backward);
    if (!j.col(k).allFinite()) return std::nullopt;
    const double mismatch = (forward - backward).lpNorm<Eigen::Infinity>();
    if (mismatch > kink_tol * (1.0 + j.col(k).lpNorm<Eigen::Infinity>())) return std::nullopt;
  }
  return j;
}

Operator derivative(const MapModel& m, const Vector& x) {
  check_input(m, x);
  if (m.jacobian) {
    Operator j = (*m.jacobian)(x);
    if (!j.allFinite()) throw DifferentiationError(m.name + ": non-finite derivative");
    return j;
  }
  return numeric_jacobian(m, x);
}

LipschitzEstimate local_lipschitz_estimate(const MapModel& m, const Vector& x, double r,
                                           int samples, std::uint64_t seed) {
  if (samples < 2) throw std::invalid_argument("local_lipschitz_estimate: samples < 2");
  if (!(r > 0.0)) throw std::invalid_argument("local_lipschitz_estimate: radius must be positive");
  Rng rng = make_rng(seed, 0x11f);
  const double gap = std::min(1e-7 * std::max(1.0, x.norm()), 0.25 * r);
  const double inner = r - gap;
  double best = 0.0;
  const auto quotient = [&](const Vector& u, const Vector& v) {
    const double dx = (u - v).norm();
    if (dx == 0.0) return;
    best = std::max(best, (evaluate(m, u) - evaluate(m, v)).norm() / dx);
  };

  const int probes = std::min(samples / 8, 32);
  const int uniform = samples / 2;
  const int axis = samples - uniform - probes;
  for (int s = 0; s < uniform; ++s) {
    const Vector u = random_in_ball(rng, x, r);
    const Vector v = random_in_ball(rng, x, r);
    quotient(u, v);
  }
  for (int s = 0; s < axis; ++s) {
    const Vector u = random_in_ball(rng, x, inner);
    Vector v = u;
    v(s % m.dim_in) += gap;
    quotient(u, v);
  }
  // Near-coincident pairs along the locally most expanding direction.
  for (int s = 0; s < probes; ++s) {
    const Vector u = s == 0 ? x : random_in_ball(rng, x, inner);
    const auto jac = try_numeric_jacobian(m, u, std::min(default_step(u), gap));
    if (!jac) continue;
    const auto svd = jacobi_svd(*jac);
    const Vector dir = svd.v.col(0);
    quotient(u, u + gap * dir);
  }
  return {best, r};
}

DiniEstimate dini_derivatives(const ScalarFn& phi, const Vector& x, const Vector& v,
                              const DiniGrid& grid) {
  if (!(grid.t0 > 0.0) || grid.k < 2 || !(grid.rho > 0.0 && grid.rho < 1.0))
    throw std::invalid_argument("dini_derivatives: bad step grid");
  const double base = phi(x);
  DiniEstimate out{-std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity()};
  double t = grid.t0;
  for (int j = 0; j < grid.k; ++j, t *= grid.rho) {
    const double q = (phi(x + t * v) - base) / t;
    out.upper = std::max(out.upper, q);
    out.lower = std::min(out.lower, q);
  }
  return out;
}

double lower_scalar_dini(const MapModel& m, const Vector& x, int directions, const DiniGrid& grid,
                         std::uint64_t seed) {
  Rng rng = make_rng(seed, 0xd1);
  const Vector fx = evaluate(m, x);
  double best = std::numeric_limits<double>::infinity();
  for (int d = 0; d < directions; ++d) {
    const Vector u = random_unit(rng, m.dim_in);
    double t = grid.t0;
    for (int j = 0; j < grid.k; ++j, t *= grid.rho)
      best = std::min(best, (evaluate(m, x + t * u) - fx).norm() / t);
  }
  return best;
}

}  // namespace pjinv
