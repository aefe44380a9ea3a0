#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pjinv/operator_core.hpp"
#include "pjinv/pseudojacobian.hpp"
#include "pjinv/sampling.hpp"

#include <Eigen/SVD>

#include <cmath>

using namespace pjinv;

namespace {

Operator op1(double v) { return Operator::Constant(1, 1, v); }

Operator diag(double a, double b) {
  Operator d = Operator::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

MapModel square_first() {
  MapModel m;
  m.name = "sq1";
  m.dim_in = m.dim_out = 2;
  m.eval = [](const Vector& x) {
    Vector y(2);
    y << x(0) * x(0), x(1);
    return y;
  };
  return m;
}

MapModel constant_map() {
  MapModel m;
  m.name = "const";
  m.dim_in = m.dim_out = 2;
  m.eval = [](const Vector&) { return Vector::Ones(2); };
  return m;
}

Operator random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> g;
  Operator a(r, c);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = g(rng);
  return a;
}

double spectral(const Operator& a) { return Eigen::JacobiSVD<Operator>(a).singularValues()(0); }

}  // namespace

TEST_CASE("provider grammar") {
  CHECK(ProviderSpec::parse("exact").kind == ProviderSpec::Kind::exact);
  const auto b = ProviderSpec::parse("ball:r=0.01,m=500");
  CHECK(b.kind == ProviderSpec::Kind::ball);
  CHECK(b.lip_radius == 0.01);
  CHECK(b.lip_samples == 500);
  const auto c = ProviderSpec::parse("clarke:delta=1e-3,m=32,eps=0.5");
  CHECK(c.delta == 1e-3);
  CHECK(c.samples == 32);
  CHECK(c.eps == 0.5);
  CHECK(ProviderSpec::parse(c.to_string()).to_string() == c.to_string());
  CHECK(ProviderSpec::parse("clarke").samples == 64);
  CHECK_THROWS_AS(ProviderSpec::parse("bogus"), ConfigError);
  CHECK_THROWS_AS(ProviderSpec::parse("ball:q=1"), ConfigError);
  CHECK_THROWS_AS(ProviderSpec::parse("clarke:m=0"), ConfigError);
  CHECK_THROWS_AS(ProviderSpec::parse("ball:r=-1"), ConfigError);
}

TEST_CASE("exact singleton") {
  Rng rng = make_rng(1);
  const Operator a = random_matrix(rng, 3, 2);
  const auto j = exact_singleton(make_linear(a), Vector::Ones(2));
  REQUIRE(j.vertices.size() == 1);
  CHECK(j.radius == 0.0);
  CHECK((j.vertices[0] - a).cwiseAbs().maxCoeff() < 1e-8);

  Vector x(2);
  x << 3, 1;
  const auto s = exact_singleton(square_first(), x);
  CHECK((s.vertices[0] - diag(6, 1)).cwiseAbs().maxCoeff() < 1e-6);
  const auto id = exact_singleton(make_identity(3), Vector::Zero(3));
  CHECK((id.vertices[0] - Operator::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("Lipschitz ball") {
  const ProviderSpec spec = ProviderSpec::parse("ball:r=0.1,m=4000");
  const auto j = lipschitz_ball(make_abs(), Vector::Zero(1), spec, 2);
  CHECK(j.vertices[0].norm() == 0.0);
  CHECK(std::abs(j.radius - 1.0) < 1e-3);

  Rng rng = make_rng(3);
  const Operator a = random_matrix(rng, 3, 3);
  const auto l = lipschitz_ball(make_linear(a), Vector::Zero(3), spec, 4);
  CHECK(l.radius <= spectral(a) * (1 + 1e-9));
  CHECK(l.radius >= 0.95 * spectral(a));
  CHECK(lipschitz_ball(constant_map(), Vector::Zero(2), spec).radius == 0.0);
}

TEST_CASE("sum rule on perturbed identities") {
  Rng rng = make_rng(5);
  const MapModel a = make_theta_map(5, Theta{Theta::Kind::linear, 0.5});
  const MapModel b = make_theta_map(5, Theta{Theta::Kind::identity, 1.0});
  const MapModel c = make_theta_map(5, Theta{Theta::Kind::log_damped, 1.0});
  for (int k = 0; k < 20; ++k) {
    const Vector x = random_in_ball(rng, Vector::Zero(5), 3.0);
    const auto ja = sum_rule(a, x);
    REQUIRE(ja.vertices.size() == 1);
    CHECK((ja.vertices[0] - Operator::Identity(5, 5)).norm() == 0.0);
    CHECK(ja.radius == doctest::Approx(0.5));
    CHECK(sum_rule(b, x).radius == doctest::Approx(1.0));
    const double t = x.norm();
    CHECK(sum_rule(c, x).radius <= t / (1 + t) + 1e-12);
  }
  CHECK_THROWS_AS(sum_rule(constant_map(), Vector::Zero(2)), ConfigError);
}

TEST_CASE("sampled Clarke sets") {
  const ProviderSpec spec = ProviderSpec::parse("clarke:delta=1e-3,m=64,eps=0");
  const auto j = sampled_clarke(make_abs(), Vector::Zero(1), spec, 9);
  bool plus = false, minus = false;
  for (const auto& v : j.vertices) {
    const bool is_plus = std::abs(v(0, 0) - 1.0) < 1e-6;
    const bool is_minus = std::abs(v(0, 0) + 1.0) < 1e-6;
    CHECK((is_plus || is_minus));
    plus |= is_plus;
    minus |= is_minus;
  }
  CHECK(plus);
  CHECK(minus);

  Rng rng = make_rng(10);
  const Operator a = random_matrix(rng, 2, 3);
  for (const auto& v : sampled_clarke(make_linear(a), Vector::Zero(3), spec).vertices)
    CHECK((v - a).cwiseAbs().maxCoeff() < 1e-6);

  // C^1 maps collapse as delta shrinks.
  Vector x(2);
  x << 0.7, -0.4;
  double prev = std::numeric_limits<double>::infinity();
  for (double delta : {1e-2, 1e-4, 1e-6}) {
    ProviderSpec s = spec;
    s.delta = delta;
    const auto cj = sampled_clarke(make_complexsq(), x, s, 11);
    double diam = 0.0;
    for (const auto& u : cj.vertices)
      for (const auto& w : cj.vertices) diam = std::max(diam, spectral(u - w));
    CHECK(diam <= 4 * delta + 1e-6);
    CHECK(diam <= prev * 1.1 + 1e-7);
    prev = diam;
  }
}

TEST_CASE("support function") {
  const auto j = PseudoJacobianSet::singleton(Operator::Identity(2, 2), 0.5);
  CHECK(support_function(j, Vector::Unit(2, 0), Vector::Unit(2, 0)) == doctest::Approx(1.5));
  const auto z = PseudoJacobianSet::singleton(Operator::Zero(2, 2), 0.0);
  CHECK(support_function(z, Vector::Ones(2), Vector::Ones(2)) == 0.0);
  const auto d = PseudoJacobianSet::singleton(diag(2, 3));
  CHECK(support_function(d, Vector::Unit(2, 1), Vector::Unit(2, 1)) == doctest::Approx(3.0));

  // The radius term is attained by the rank-one operator r y v^T / (|y| |v|).
  const Vector y = Vector::Unit(2, 0), v = Vector::Unit(2, 0);
  const Operator r1 = 0.5 * y * v.transpose();
  CHECK(y.dot((Operator::Identity(2, 2) + r1) * v) == doctest::Approx(1.5));
}

TEST_CASE("support function algebra") {
  Rng rng = make_rng(12);
  for (int k = 0; k < 200; ++k) {
    PseudoJacobianSet j;
    for (int i = 0; i < 3; ++i) j.vertices.push_back(random_matrix(rng, 3, 4));
    j.radius = 0.3;
    const Vector ys = random_unit(rng, 3);
    const Vector v1 = random_unit(rng, 4), v2 = random_unit(rng, 4);
    const double s = 2.7;
    CHECK(support_function(j, ys, v1 + v2) <= support_function(j, ys, v1) + support_function(j, ys, v2) + 1e-12);
    CHECK(std::abs(support_function(j, s * ys, v1) - s * support_function(j, ys, v1)) <= 1e-12 * s * 10);
    CHECK(std::abs(support_function(j, ys, s * v1) - s * support_function(j, ys, v1)) <= 1e-12 * s * 10);
  }
}

TEST_CASE("Minkowski combination") {
  const Operator a = diag(1, 2), b = diag(3, -1);
  const auto sum = pj_combine(1.0, PseudoJacobianSet::singleton(a), PseudoJacobianSet::singleton(b));
  REQUIRE(sum.vertices.size() == 1);
  CHECK((sum.vertices[0] - (a + b)).norm() == 0.0);
  CHECK(sum.radius == 0.0);
  const auto neg = pj_combine(-1.0, PseudoJacobianSet::singleton(a, 0.2),
                              PseudoJacobianSet::singleton(Operator::Zero(2, 2), 0.1));
  CHECK((neg.vertices[0] + a).norm() == 0.0);
  CHECK(neg.radius == doctest::Approx(0.3));
  PseudoJacobianSet j2{{a, b}, 0.4};
  const auto zero = pj_combine(0.0, PseudoJacobianSet::singleton(diag(7, 7), 1.0), j2);
  REQUIRE(zero.vertices.size() == 2);
  CHECK((zero.vertices[0] - a).norm() == 0.0);
  CHECK((zero.vertices[1] - b).norm() == 0.0);
  CHECK(zero.radius == doctest::Approx(0.4));
  CHECK_THROWS(pj_combine(1.0, PseudoJacobianSet::singleton(a), PseudoJacobianSet::singleton(op1(1))));
}

TEST_CASE("validity check examples") {
  const MapModel abs = make_abs();
  const auto clarke = sampled_clarke(abs, Vector::Zero(1), ProviderSpec::parse("clarke:delta=1e-3,m=64"), 3);
  ValidityOptions vo;
  vo.trials = 500;
  CHECK(validity_check(abs, Vector::Zero(1), clarke, vo).pass_rate == 1.0);
  CHECK(validity_check(abs, Vector::Zero(1), PseudoJacobianSet::singleton(op1(0.5)), vo).pass_rate < 1.0);

  Rng rng = make_rng(4);
  const Operator a = random_matrix(rng, 3, 2);
  CHECK(validity_check(make_linear(a), Vector::Ones(2), PseudoJacobianSet::singleton(a), vo).pass_rate == 1.0);
}

TEST_CASE("validity of every provider on catalog maps") {
  const std::vector<MapModel> maps = {make_theta_map(3, Theta{Theta::Kind::linear, 0.5}),
                                      make_theta_map(3, Theta{Theta::Kind::identity, 1.0}),
                                      make_theta_map(3, Theta{Theta::Kind::log_damped, 1.0}), make_abs_shift()};
  ValidityOptions vo;
  vo.trials = 300;
  Rng rng = make_rng(6);
  for (const auto& m : maps) {
    for (const char* p : {"sum", "ball:r=1e-3,m=2000", "clarke:delta=1e-4,m=64"}) {
      const Vector x = random_in_ball(rng, Vector::Zero(m.dim_in), 1.0);
      const auto j = pseudo_jacobian(m, x, ProviderSpec::parse(p), 7);
      CHECK(validity_check(m, x, j, vo).pass_rate >= 0.99);
    }
    // At the kink every coordinate vanishes; the sum rule still holds there.
    const auto j0 = pseudo_jacobian(m, Vector::Zero(m.dim_in), ProviderSpec::parse("sum"));
    CHECK(validity_check(m, Vector::Zero(m.dim_in), j0, vo).pass_rate >= 0.99);
  }
}

TEST_CASE("combination soundness") {
  const MapModel f = make_abs_shift();
  const MapModel g = make_abs();
  const double alpha = -0.7;
  MapModel h;
  h.name = "combo";
  h.eval = [&](const Vector& x) { return Vector(alpha * evaluate(f, x) + evaluate(g, x)); };
  ValidityOptions vo;
  vo.trials = 500;
  const Vector x0 = Vector::Zero(1);
  const ProviderSpec clarke = ProviderSpec::parse("clarke:delta=1e-4,m=32");
  const auto jf = pseudo_jacobian(f, x0, clarke, 1);
  const auto jg = pseudo_jacobian(g, x0, clarke, 2);
  const double rf = validity_check(f, x0, jf, vo).pass_rate;
  const double rg = validity_check(g, x0, jg, vo).pass_rate;
  CHECK(validity_check(h, x0, pj_combine(alpha, jf, jg), vo).pass_rate >= std::min(rf, rg));
}

TEST_CASE("left composition and dedupe") {
  const auto j = PseudoJacobianSet{{diag(1, 2), diag(1, 2), diag(2, 1)}, 0.5};
  const auto d = dedupe_vertices(j);
  CHECK(d.vertices.size() == 2);
  const Operator outer = diag(3, 0);
  const auto c = pj_compose_left(outer, j);
  CHECK(c.radius == doctest::Approx(1.5));
  CHECK((c.vertices[2] - outer * diag(2, 1)).norm() == 0.0);
  CHECK(pj_compose_left(outer, PseudoJacobianSet::singleton(diag(1, 1))).radius == 0.0);
}
