#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pjinv/indices.hpp"
#include "pjinv/inverter.hpp"
#include "pjinv/sampling.hpp"

#include <cmath>

using namespace pjinv;

namespace {

const ProviderSpec kExact = ProviderSpec::parse("exact");
const ProviderSpec kSum = ProviderSpec::parse("sum");

Operator diag(double a, double b) {
  Operator d = Operator::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

void check_round_trip(const MapModel& m, const InversionTrace& t, const Vector& y, double tol) {
  if (t.converged()) CHECK((evaluate(m, t.final_x) - y).norm() <= tol);
}

}  // namespace

TEST_CASE("semismooth Newton") {
  const MapModel d = make_linear(diag(2, 3));
  const InversionTrace t = semismooth_newton(d, kExact, vec2(4, 9), Vector::Zero(2));
  CHECK(t.converged());
  CHECK(t.iterates.size() == 2);
  // Oracle: explicit inverse.
  CHECK((t.final_x - diag(2, 3).inverse() * vec2(4, 9)).norm() < 1e-12);

  const MapModel s = make_abs_shift();
  const InversionTrace ts = semismooth_newton(s, ProviderSpec::parse("clarke:delta=1e-4,m=16"),
                                              Vector::Constant(1, 3.0), Vector::Zero(1));
  CHECK(ts.converged());
  CHECK(ts.final_x(0) == doctest::Approx(2.0).epsilon(1e-10));

  Rng rng = make_rng(41);
  const Theta th{Theta::Kind::log_damped, 1.0};
  const MapModel c = make_theta_map(5, th);
  for (int k = 0; k < 20; ++k) {
    const Vector y = random_in_ball(rng, Vector::Zero(5), 3.0);
    const InversionTrace tc = semismooth_newton(c, kSum, y, Vector::Zero(5));
    REQUIRE(tc.converged());
    CHECK((tc.final_x - theta_back_substitute(y, th)).norm() <= 1e-8);
    check_round_trip(c, tc, y, 1e-10);
  }
}

TEST_CASE("Newton falls back to a pseudo-inverse on singular elements") {
  const MapModel z = make_complexsq();
  const InversionTrace t = semismooth_newton(z, kExact, vec2(1, 0), Vector::Zero(2));
  CHECK(t.used_pseudo_inverse);
  CHECK_FALSE(t.converged());
}

TEST_CASE("path lifting") {
  Rng rng = make_rng(42);
  const Theta th{Theta::Kind::linear, 0.5};
  const MapModel a = make_theta_map(10, th);
  for (int k = 0; k < 20; ++k) {
    const Vector y = random_in_ball(rng, Vector::Zero(10), 5.0);
    const InversionTrace t = path_lift_invert(a, kSum, Vector::Zero(10), y, 16);
    REQUIRE(t.converged());
    CHECK((t.final_x - theta_back_substitute(y, th)).norm() <= 1e-8);
    for (std::size_t i = 1; i < t.t_grid.size(); ++i) CHECK(t.t_grid[i] > t.t_grid[i - 1]);
    CHECK(t.t_grid.back() == 1.0);
    check_round_trip(a, t, y, 1e-10);
  }

  const InversionTrace e = path_lift_invert(make_exp1d(), kExact, Vector::Zero(1), Vector::Constant(1, -1.0), 16);
  CHECK(e.status == InversionStatus::diverged);
  REQUIRE(e.iterates.size() >= 3);
  // Accepted iterates run off toward minus infinity as the path approaches 0. Once the
  // target falls below the tolerance the corrector accepts x unchanged, hence <=.
  for (std::size_t i = 1; i < e.iterates.size(); ++i) CHECK(e.iterates[i](0) <= e.iterates[i - 1](0));
  CHECK(e.iterates.back()(0) < -20.0);
  CHECK(e.witness.has_value());

  const MapModel id = make_identity(3);
  const Vector y = Vector::LinSpaced(3, -1.0, 2.0);
  const InversionTrace ti = path_lift_invert(id, kExact, Vector::Ones(3), y, 1);
  CHECK(ti.converged());
  CHECK(ti.iterates.size() == 2);
  CHECK((ti.final_x - y).norm() < 1e-14);
}

TEST_CASE("path lifting agrees with back-substitution on all perturbation cases") {
  Rng rng = make_rng(43);
  for (const Theta th : {Theta{Theta::Kind::linear, 0.5}, Theta{Theta::Kind::log_damped, 1.0},
                         Theta{Theta::Kind::identity, 1.0}}) {
    const MapModel m = make_theta_map(6, th);
    for (int k = 0; k < 100; ++k) {
      const Vector y = random_in_ball(rng, Vector::Zero(6), 3.0);
      const InversionTrace t = path_lift_invert(m, kSum, Vector::Zero(6), y, 16);
      REQUIRE(t.converged());
      CHECK((t.final_x - theta_back_substitute(y, th)).norm() <= 1e-8);
    }
  }
}

TEST_CASE("iterates expand distances at least at the regularity rate") {
  Rng rng = make_rng(44);
  const MapModel a = make_theta_map(6, Theta{Theta::Kind::linear, 0.5});
  const double alpha = regularity_index(a, kSum, Vector::Zero(6)).alpha;
  const Vector y = random_in_ball(rng, Vector::Zero(6), 4.0);
  const InversionTrace t = path_lift_invert(a, kSum, Vector::Zero(6), y, 8);
  REQUIRE(t.converged());
  for (std::size_t i = 1; i < t.iterates.size(); ++i) {
    const double dx = (t.iterates[i] - t.iterates[i - 1]).norm();
    if (dx == 0.0) continue;
    const double dy = (evaluate(a, t.iterates[i]) - evaluate(a, t.iterates[i - 1])).norm();
    CHECK(dy >= (alpha - 1e-10) * dx);
  }
}

TEST_CASE("Ekeland descent") {
  const MapModel d = make_linear(diag(2, 3));
  const InversionTrace t = ekeland_descent(d, kExact, vec2(4, 9), Vector::Zero(2), 1e-3, 1e-6);
  CHECK(t.converged());
  CHECK((t.final_x - vec2(2, 3)).norm() < 1e-9);

  // e^x + 1 has infimum 1 at minus infinity: the descent stalls near residual 1.
  InverterOptions o;
  o.max_iter = 200;
  const InversionTrace e = ekeland_descent(make_exp1d(), kExact, Vector::Constant(1, -1.0), Vector::Zero(1), 1e-3, 1e-6, o);
  CHECK_FALSE(e.converged());
  CHECK((e.status == InversionStatus::max_iter || e.status == InversionStatus::stationary));
  CHECK(e.final_residual >= 1.0);
  CHECK(e.final_residual <= 1.0 + 2e-3);

  const Vector y = vec2(-0.3, 8);
  const InversionTrace ti = ekeland_descent(make_identity(2), kExact, y, Vector::Zero(2), 1e-3, 1e-6);
  CHECK(ti.converged());
  CHECK((ti.final_x - y).norm() < 1e-9);
  CHECK_THROWS_AS(ekeland_descent(d, kExact, y, Vector::Zero(2), 0.0, 1e-6), std::invalid_argument);
}

TEST_CASE("accepted Ekeland moves satisfy the descent inequality") {
  const MapModel c = make_theta_map(4, Theta{Theta::Kind::log_damped, 1.0});
  const Vector y = Vector::LinSpaced(4, -2.0, 2.0);
  const double lambda = 1e-2;
  const InversionTrace t = ekeland_descent(c, kSum, y, Vector::Zero(4), lambda, 1e-6);
  for (std::size_t i = 1; i < t.iterates.size(); ++i)
    CHECK(t.residuals[i] < t.residuals[i - 1] - lambda * (t.iterates[i] - t.iterates[i - 1]).norm() + 1e-15);
}

TEST_CASE("dispatch and method names") {
  CHECK(parse_method("newton") == InversionMethod::newton);
  CHECK(parse_method("path") == InversionMethod::path);
  CHECK(parse_method("ekeland") == InversionMethod::ekeland);
  CHECK_THROWS_AS(parse_method("bisect"), ConfigError);
  CHECK(std::string(to_string(InversionStatus::step_underflow)) == "step_underflow");
  const MapModel d = make_linear(diag(2, 3));
  for (auto m : {InversionMethod::newton, InversionMethod::path, InversionMethod::ekeland}) {
    const InversionTrace t = invert(d, kExact, m, vec2(4, 9), Vector::Zero(2));
    CHECK(t.method == m);
    CHECK(t.converged());
  }
}

TEST_CASE("inverse Lipschitz probe") {
  CHECK(inverse_lipschitz_probe(make_identity(3), Vector::Zero(3), 1.0, 200) == doctest::Approx(1.0));
  const double d = inverse_lipschitz_probe(make_linear(diag(2, 3)), Vector::Zero(2), 1.0, 2000);
  CHECK(d <= 0.5 + 1e-12);
  CHECK(d >= 0.5 * 0.95);
  const double a = inverse_lipschitz_probe(make_theta_map(5, Theta{Theta::Kind::linear, 0.5}), Vector::Zero(5), 10.0, 2000);
  CHECK(a <= 2.0 * 1.05);
  CHECK(a >= 1.0);
}
