#include "pjinv/sampling.hpp"

#include <cmath>
#include <numbers>
#include <vector>

namespace pjinv {

Rng make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32),
                    0x9e3779b9u};
  return Rng(seq);
}

Vector random_unit(Rng& rng, Eigen::Index n) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(n);
  double norm = 0.0;
  do {
    for (Eigen::Index i = 0; i < n; ++i) v(i) = normal(rng);
    norm = v.norm();
  } while (norm == 0.0);
  return v / norm;
}

Vector random_in_ball(Rng& rng, const Vector& center, double radius) {
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Eigen::Index n = center.size();
  const double r = radius * std::pow(unif(rng), 1.0 / static_cast<double>(n));
  return center + r * random_unit(rng, n);
}

double radical_inverse(std::uint64_t index, unsigned base) {
  double inv = 1.0 / base;
  double f = inv;
  double out = 0.0;
  while (index > 0) {
    out += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return out;
}

namespace {

const std::vector<unsigned>& primes_for(std::size_t count) {
  static thread_local std::vector<unsigned> primes{2};
  for (unsigned c = primes.back() + 1; primes.size() < count; ++c) {
    bool prime = true;
    for (unsigned p : primes) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) primes.push_back(c);
  }
  return primes;
}

}  // namespace

Vector halton_in_annulus(std::uint64_t index, const Vector& center, double inner, double outer) {
  const Eigen::Index n = center.size();
  const auto pairs = static_cast<std::size_t>((n + 1) / 2);
  const auto& primes = primes_for(2 * pairs + 1);
  Vector dir(n);
  // Box-Muller on consecutive Halton coordinates gives Gaussian directions.
  for (std::size_t k = 0; k < pairs; ++k) {
    const double u1 = std::max(radical_inverse(index, primes[2 * k + 1]), 1e-300);
    const double u2 = radical_inverse(index, primes[2 * k + 2]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const auto i = static_cast<Eigen::Index>(2 * k);
    dir(i) = rad * std::cos(2.0 * std::numbers::pi * u2);
    if (i + 1 < n) dir(i + 1) = rad * std::sin(2.0 * std::numbers::pi * u2);
  }
  const double norm = dir.norm();
  if (norm == 0.0) dir = Vector::Unit(n, 0);
  else dir /= norm;
  // Radius with density proportional to r^(n-1) on (inner, outer].
  const double u = radical_inverse(index, primes[0]);
  const double dn = static_cast<double>(n);
  const double lo = outer > 0.0 ? std::pow(inner / outer, dn) : 0.0;
  const double r = outer * std::pow(lo + u * (1.0 - lo), 1.0 / dn);
  return center + std::max(r, inner) * dir;
}

}  // namespace pjinv
