#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "pjinv/hadamard.hpp"
#include "pjinv/sampling.hpp"

#include <cmath>
#include <sstream>

using namespace pjinv;

namespace {

const ProviderSpec kSum = ProviderSpec::parse("sum");

Operator diag(double a, double b) {
  Operator d = Operator::Zero(2, 2);
  d(0, 0) = a;
  d(1, 1) = b;
  return d;
}

BetaOptions small_options(int grid_n, int shell) {
  BetaOptions o;
  o.grid_n = grid_n;
  o.samples_per_shell = shell;
  return o;
}

}  // namespace

TEST_CASE("selection of points on shells") {
  const Vector c = Vector::Ones(3);
  for (std::uint64_t i = 1; i < 500; ++i) {
    const Vector z = halton_in_annulus(i, c, 0.5, 2.0);
    const double r = (z - c).norm();
    CHECK(r > 0.5 - 1e-12);
    CHECK(r <= 2.0 + 1e-12);
  }
  CHECK(radical_inverse(1, 2) == 0.5);
  CHECK(radical_inverse(3, 2) == 0.75);
  CHECK(radical_inverse(1, 3) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("analytic profile of the log-damped map") {
  const MapModel c = make_theta_map(20, Theta{Theta::Kind::log_damped, 1.0});
  REQUIRE(c.analytic_beta.has_value());
  const BetaProfile p = beta_profile(c, kSum, Vector::Zero(20), 1.0, small_options(2049, 1), c.analytic_beta);
  CHECK(p.mode == BetaProfile::Mode::analytic);
  for (std::size_t j = 0; j < p.grid.size(); j += 97) CHECK(p.beta[j] == doctest::Approx(1.0 / (1.0 + p.grid[j])));
  // int_0^t 1/(1+s) ds = log(1 + t)
  CHECK(std::abs(p.rho.back() - std::log(2.0)) < 1e-6);
  CHECK(std::abs(p.rho_at(0.5) - std::log(1.5)) < 1e-6);
  CHECK(hadamard_verdict(p).verdict == HadamardVerdict::diverges_analytic);
}

TEST_CASE("sampled profiles of the linear and critical perturbations") {
  const Eigen::Index n = 6;
  const MapModel a = make_theta_map(n, Theta{Theta::Kind::linear, 0.5});
  const BetaProfile pa = beta_profile(a, kSum, Vector::Zero(n), 4.0, small_options(17, 8));
  for (double b : pa.beta) CHECK(b == doctest::Approx(0.5).epsilon(1e-12));
  for (std::size_t j = 0; j < pa.grid.size(); ++j) CHECK(pa.rho[j] == doctest::Approx(0.5 * pa.grid[j]).epsilon(1e-12));
  CHECK(pa.all_certified);
  const HadamardResult ha = hadamard_verdict(pa);
  CHECK(ha.verdict == HadamardVerdict::inconclusive_growing);
  CHECK(ha.rho_at_tmax == doctest::Approx(0.5 * 4.0));

  const MapModel b = make_theta_map(n, Theta{Theta::Kind::identity, 1.0});
  const BetaProfile pb = beta_profile(b, kSum, Vector::Zero(n), 4.0, small_options(17, 8));
  for (std::size_t j = 0; j < pb.grid.size(); ++j) {
    CHECK(pb.beta[j] == 0.0);
    CHECK(pb.rho[j] == 0.0);
  }
  CHECK(hadamard_verdict(pb).verdict == HadamardVerdict::fails);
}

TEST_CASE("sampling never certifies divergence") {
  const MapModel c = make_theta_map(4, Theta{Theta::Kind::log_damped, 1.0});
  const BetaProfile p = beta_profile(c, kSum, Vector::Zero(4), 3.0, small_options(9, 8));
  CHECK(hadamard_verdict(p).verdict != HadamardVerdict::diverges_analytic);
  const MapModel e = make_exp1d();
  const BetaProfile pe = beta_profile(e, kSum, Vector::Zero(1), 5.0, small_options(9, 4), e.analytic_beta);
  CHECK(hadamard_verdict(pe).verdict != HadamardVerdict::diverges_analytic);
}

TEST_CASE("rho is the trapezoid integral of beta") {
  const MapModel c = make_theta_map(4, Theta{Theta::Kind::log_damped, 1.0});
  const BetaProfile p = beta_profile(c, kSum, Vector::Zero(4), 3.0, small_options(13, 8));
  double acc = 0.0;
  CHECK(p.rho[0] == 0.0);
  for (std::size_t j = 1; j < p.grid.size(); ++j) {
    acc += 0.5 * (p.grid[j] - p.grid[j - 1]) * (p.beta[j] + p.beta[j - 1]);
    CHECK(p.rho[j] == acc);
    CHECK(p.beta[j] <= p.beta[j - 1]);
  }
  CHECK(p.rho_at(p.grid[5]) == doctest::Approx(p.rho[5]).epsilon(1e-14));
}

TEST_CASE("more shell samples only lower the profile") {
  const MapModel c = make_theta_map(4, Theta{Theta::Kind::log_damped, 1.0});
  const BetaProfile few = beta_profile(c, kSum, Vector::Zero(4), 3.0, small_options(9, 8));
  const BetaProfile many = beta_profile(c, kSum, Vector::Zero(4), 3.0, small_options(9, 32));
  for (std::size_t j = 0; j < few.grid.size(); ++j) CHECK(many.beta[j] <= few.beta[j] + 0.02);
}

TEST_CASE("ball inclusion") {
  BallInclusionOptions bo;
  bo.provider = kSum;
  const MapModel a = make_theta_map(10, Theta{Theta::Kind::linear, 0.5});
  const BetaProfile pa = beta_profile(a, kSum, Vector::Zero(10), 1.0, small_options(5, 4));
  CHECK(pa.rho_at(1.0) == doctest::Approx(0.5));
  const BallInclusionResult ra = ball_inclusion_test(a, Vector::Zero(10), 1.0, pa, 30, bo);
  CHECK(ra.pass_rate == 1.0);

  bo.provider = ProviderSpec::parse("exact");
  const MapModel d = make_linear(diag(2, 3));
  const BetaProfile pd = beta_profile(d, bo.provider, Vector::Zero(2), 1.0, small_options(5, 4));
  CHECK(pd.rho_at(1.0) == doctest::Approx(2.0));
  CHECK(ball_inclusion_test(d, Vector::Zero(2), 1.0, pd, 30, bo).pass_rate == 1.0);

  const MapModel id = make_identity(3);
  const Vector x0 = Vector::Constant(3, -0.7);
  const BetaProfile pi = beta_profile(id, bo.provider, x0, 2.5, small_options(5, 4));
  CHECK(pi.rho_at(2.5) == doctest::Approx(2.5));
  CHECK(ball_inclusion_test(id, x0, 2.5, pi, 30, bo).pass_rate == 1.0);

  CHECK_THROWS_AS(ball_inclusion_test(id, x0, 3.0, pi, 5, bo), std::invalid_argument);
}

TEST_CASE("ball inclusion fails when the radius is overstated") {
  // For the critical map the true image of B(0, 1) is much smaller than a fake rho of 3 suggests.
  const MapModel e = make_exp1d();
  BetaProfile fake;
  fake.grid = {0.0, 1.0};
  fake.beta = {3.0, 3.0};
  fake.rho = cumulative_trapezoid(fake.grid, fake.beta);
  BallInclusionOptions bo;
  const BallInclusionResult r = ball_inclusion_test(e, Vector::Zero(1), 1.0, fake, 40, bo);
  CHECK(r.pass_rate < 1.0);
  CHECK(r.failures.size() == static_cast<std::size_t>(r.samples - r.passed));
}

TEST_CASE("regularity over preimages of compact sets") {
  const MapModel a = make_theta_map(5, Theta{Theta::Kind::linear, 0.5});
  Rng rng = make_rng(31);
  std::vector<Vector> sphere;
  for (int i = 0; i < 32; ++i) sphere.push_back(5.0 * random_unit(rng, 5));
  CHECK(compact_preimage_regularity(a, kSum, sphere) == doctest::Approx(0.5).epsilon(1e-12));

  const ProviderSpec exact = ProviderSpec::parse("exact");
  std::vector<Vector> k2;
  for (int i = 0; i < 8; ++i) k2.push_back(random_in_ball(rng, Vector::Zero(2), 3.0));
  CHECK(compact_preimage_regularity(make_linear(diag(2, 3)), exact, k2) == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(compact_preimage_regularity(make_identity(2), exact, k2) == doctest::Approx(1.0).epsilon(1e-9));

  const Vector bad = Vector::Constant(1, -1.0);
  try {
    compact_preimage_regularity(make_exp1d(), exact, {Vector::Constant(1, 2.0), bad});
    FAIL("expected an inversion failure");
  } catch (const InversionFailure& e) {
    CHECK((e.target() - bad).norm() == 0.0);
  }
}

TEST_CASE("Hadamard-Levy: inverse Lipschitz constant of the contractive perturbation") {
  const MapModel a = make_theta_map(10, Theta{Theta::Kind::linear, 0.5});
  CHECK(inverse_lipschitz_probe(a, evaluate(a, Vector::Zero(10)), 10.0, 2000, 3) <= 2.1);
}

TEST_CASE("critical perturbation: preimage norms of the harmonic targets grow") {
  const Theta th{Theta::Kind::identity, 1.0};
  double prev = 0.0;
  for (Eigen::Index n : {10, 100, 1000}) {
    Vector y(n);
    for (Eigen::Index i = 0; i < n; ++i) y(i) = -1.0 / static_cast<double>(i + 1);
    const Vector x = theta_back_substitute(y, th);
    // x_i = -sum_{j >= i} 1/j
    Vector closed(n);
    double tail = 0.0;
    for (Eigen::Index i = n - 1; i >= 0; --i) {
      tail += 1.0 / static_cast<double>(i + 1);
      closed(i) = -tail;
    }
    CHECK((x - closed).norm() <= 1e-12 * closed.norm());
    CHECK(x.norm() > prev);
    prev = x.norm();
  }
}

TEST_CASE("profile CSV format") {
  BetaProfile p;
  p.grid = {0.0, 0.5, 1.0};
  p.beta = {1.0, 2.0 / 3.0, 0.5};
  p.rho = cumulative_trapezoid(p.grid, p.beta);
  std::ostringstream out;
  write_profile_csv(out, p);
  CHECK(out.str() == "t,beta,rho\n0,1,0\n0.5,0.666666666667,0.416666666667\n1,0.5,0.708333333333\n");
}
