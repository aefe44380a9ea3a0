#pragma once

#include "pjinv/map_models.hpp"
#include "pjinv/pseudojacobian.hpp"

#include <cstdint>
#include <vector>

namespace pjinv {

/// Bounds on inf { conorm(T) : T in co(vertices) + radius * ball }.
struct ConormBounds {
  double lower = 0.0;  // valid lower bound; produced by the net argument when certified
  double upper = 0.0;  // attained (up to the rank-one radius term) by `witness`
  bool certified = false;
  double net_resolution = 0.0;  // covering radius of the net in spectral norm
  Operator witness;
};

struct ConormOptions {
  /// Largest number of net points evaluated; finer nets are coarsened.
  std::size_t max_net_points = 200000;
  /// Vertex sets larger than this get sampled bounds.
  std::size_t max_certified_vertices = 4;
  int sampled_points = 256;
  std::uint64_t seed = 0;
};

/// Default net: 1e-3 times the largest pairwise vertex distance, floored at 1e-9.
double default_net(const PseudoJacobianSet& j);

/// Lower/upper co-norm bounds over the set. Singletons are exact; up to four
/// vertices use a barycentric net with covering radius <= net and the
/// 1-Lipschitz property of the smallest singular value.
ConormBounds set_conorm_bounds(const PseudoJacobianSet& j, double net, const ConormOptions& options = {});

struct RegularityReport {
  enum class BoundKind { certified, sampled };
  double alpha = 0.0;
  bool regular = false;
  BoundKind bound_kind = BoundKind::certified;
  Operator witness;
  double radius_used = 0.0;
};

struct RegularityOptions {
  /// Decreasing radii; empty means {1, 0.1, 0.01} * (1 + |x|).
  std::vector<double> radii;
  int samples_per_radius = 32;
  /// Negative selects default_net() of each set.
  double net = -1.0;
  /// Use the at-point value when the map declares usc (inf over co Jf(x)).
  bool use_usc_shortcut = true;
  std::uint64_t seed = 0;
};

/// Regularity index sup_r inf { conorm(T) : T in co Jf(B(x, r)) }.
RegularityReport regularity_index(const MapModel& m, const ProviderSpec& provider, const Vector& x,
                                  const RegularityOptions& options = {});

const char* to_string(RegularityReport::BoundKind kind);

}  // namespace pjinv
