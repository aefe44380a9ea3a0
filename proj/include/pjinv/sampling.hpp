#pragma once

#include "pjinv/types.hpp"

#include <cstdint>
#include <random>

namespace pjinv {

using Rng = std::mt19937_64;

/// Generator for an independent stream identified by (seed, stream).
Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0);

/// Uniform point on the unit sphere of R^n.
Vector random_unit(Rng& rng, Eigen::Index n);

/// Uniform point in the open ball B(center, radius).
Vector random_in_ball(Rng& rng, const Vector& center, double radius);

/// Deterministic low-discrepancy point (Halton sequence, index >= 1) mapped to
/// the annulus inner < |x - center| <= outer.
Vector halton_in_annulus(std::uint64_t index, const Vector& center, double inner, double outer);

/// Radical inverse of index in the given base.
double radical_inverse(std::uint64_t index, unsigned base);

}  // namespace pjinv
