#pragma once

#include "pjinv/types.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace pjinv {

/// Thin singular value decomposition a = u * diag(values) * v^T with values
/// sorted in decreasing order. u is rows x k, v is cols x k, k = min(rows, cols).
template <typename Scalar>
struct ThinSvd {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> u;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> values;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> v;
  int sweeps = 0;
};

namespace detail {

// One-sided (Hestenes) Jacobi on a tall matrix: orthogonalizes the columns of
// `work` by plane rotations accumulated into `right`.
template <typename Scalar>
int hestenes_sweeps(Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& work,
                    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>& right,
                    Scalar rel_tol, int max_sweeps) {
  const Eigen::Index n = work.cols();
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    bool rotated = false;
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        const Scalar alpha = work.col(i).squaredNorm();
        const Scalar beta = work.col(j).squaredNorm();
        const Scalar gamma = work.col(i).dot(work.col(j));
        if (gamma == Scalar(0) ||
            std::abs(gamma) <= rel_tol * std::sqrt(alpha * beta)) {
          continue;
        }
        rotated = true;
        const Scalar zeta = (beta - alpha) / (Scalar(2) * gamma);
        const Scalar t = (zeta >= Scalar(0) ? Scalar(1) : Scalar(-1)) /
                         (std::abs(zeta) + std::sqrt(Scalar(1) + zeta * zeta));
        const Scalar c = Scalar(1) / std::sqrt(Scalar(1) + t * t);
        const Scalar s = c * t;
        for (Eigen::Index r = 0; r < work.rows(); ++r) {
          const Scalar wi = work(r, i);
          const Scalar wj = work(r, j);
          work(r, i) = c * wi - s * wj;
          work(r, j) = s * wi + c * wj;
        }
        for (Eigen::Index r = 0; r < right.rows(); ++r) {
          const Scalar vi = right(r, i);
          const Scalar vj = right(r, j);
          right(r, i) = c * vi - s * vj;
          right(r, j) = s * vi + c * vj;
        }
      }
    }
    if (!rotated) break;
  }
  return sweep;
}

}  // namespace detail

/// Singular value decomposition by one-sided Jacobi iteration. Intended for
/// dense operators up to a few hundred rows/columns.
template <typename Derived>
ThinSvd<typename Derived::Scalar> jacobi_svd(
    const Eigen::MatrixBase<Derived>& a,
    typename Derived::Scalar rel_tol = typename Derived::Scalar(1e-13),
    int max_sweeps = 80) {
  using Scalar = typename Derived::Scalar;
  using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  const bool wide = a.rows() < a.cols();
  Mat work = wide ? Mat(a.transpose()) : Mat(a);
  const Eigen::Index k = work.cols();
  Mat right = Mat::Identity(k, k);
  ThinSvd<Scalar> out;
  out.sweeps = detail::hestenes_sweeps<Scalar>(work, right, rel_tol, max_sweeps);

  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> norms(k);
  for (Eigen::Index j = 0; j < k; ++j) norms(j) = work.col(j).norm();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(k));
  std::iota(order.begin(), order.end(), Eigen::Index(0));
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index l, Eigen::Index r) { return norms(l) > norms(r); });

  Mat left(work.rows(), k);
  Mat rv(k, k);
  out.values.resize(k);
  for (Eigen::Index p = 0; p < k; ++p) {
    const Eigen::Index j = order[static_cast<std::size_t>(p)];
    out.values(p) = norms(j);
    rv.col(p) = right.col(j);
    if (norms(j) > Scalar(0)) {
      left.col(p) = work.col(j) / norms(j);
    } else {
      left.col(p).setZero();
    }
  }
  if (wide) {
    out.u = std::move(rv);
    out.v = std::move(left);
  } else {
    out.u = std::move(left);
    out.v = std::move(rv);
  }
  return out;
}

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> singular_values(
    const Eigen::MatrixBase<Derived>& a) {
  return jacobi_svd(a).values;
}

/// Largest singular value.
template <typename Derived>
typename Derived::Scalar spectral_norm(const Eigen::MatrixBase<Derived>& a) {
  if (a.size() == 0) return 0;
  return jacobi_svd(a).values(0);
}

/// inf over unit x of |Tx|: the smallest singular value when T is tall or
/// square, zero when T has a nontrivial kernel (in particular cols > rows).
template <typename Derived>
typename Derived::Scalar conorm(const Eigen::MatrixBase<Derived>& t) {
  using Scalar = typename Derived::Scalar;
  if (t.cols() > t.rows()) return Scalar(0);
  const auto values = jacobi_svd(t).values;
  const Scalar smin = values(values.size() - 1);
  const Scalar floor = std::numeric_limits<Scalar>::epsilon() *
                       static_cast<Scalar>(std::max(t.rows(), t.cols())) * values(0);
  return smin <= floor ? Scalar(0) : smin;
}

/// Co-norm of the adjoint; positive iff T is onto.
template <typename Derived>
typename Derived::Scalar surjectivity_index(const Eigen::MatrixBase<Derived>& t) {
  return conorm(t.transpose());
}

/// Minimal singular triple (sigma, u, v) of a tall or square operator, with
/// T v = sigma u. For sigma == 0 u is an arbitrary unit vector.
template <typename Scalar>
struct SingularTriple {
  Scalar sigma;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> u;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> v;
};

template <typename Derived>
SingularTriple<typename Derived::Scalar> min_singular_triple(
    const Eigen::MatrixBase<Derived>& t) {
  using Scalar = typename Derived::Scalar;
  using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  const auto svd = jacobi_svd(t);
  const Eigen::Index last = svd.values.size() - 1;
  SingularTriple<Scalar> out{svd.values(last), svd.u.col(last), svd.v.col(last)};
  if (t.cols() > t.rows()) {
    // Kernel direction: complete v to the null space of T.
    Eigen::FullPivLU<Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>> lu(t);
    const auto kernel = lu.kernel();
    out.sigma = Scalar(0);
    out.v = Vec(kernel.col(0)).normalized();
    out.u = Vec::Unit(t.rows(), 0);
  } else if (out.u.norm() == Scalar(0)) {
    out.u = Vec::Unit(t.rows(), 0);
  }
  return out;
}

/// Closed convex set co(vertices) + radius * closed unit ball.
struct HullSet {
  std::vector<Vector> vertices;
  double radius = 0.0;

  Eigen::Index dim() const { return vertices.empty() ? 0 : vertices.front().size(); }
  /// Throws std::invalid_argument when the invariants are violated.
  void validate() const;
};

struct HullOptions {
  /// Stopping threshold on the Frank-Wolfe duality gap, relative to the
  /// squared vertex scale.
  double gap_tol = 1e-10;
  int max_iter = 10000;
};

/// Result of the minimum-norm-point computation on co(vertices) - p.
struct HullProjection {
  Vector point;                 // nearest point of co(vertices)
  std::vector<double> weights;  // convex weights per input vertex
  double distance = 0.0;        // |p - point|
  double gap = 0.0;             // final Frank-Wolfe duality gap
  int iterations = 0;
};

/// Euclidean projection of p onto co(vertices) by Wolfe's minimum-norm-point
/// scheme, a finite refinement of Gilbert's Frank-Wolfe iteration. Ties in
/// vertex selection go to the lowest index.
HullProjection project_to_hull(const Vector& p, const std::vector<Vector>& vertices,
                               const HullOptions& options = {});

/// max(dist(p, co(vertices)) - radius, 0).
double dist_to_hull(const Vector& p, const HullSet& hull, const HullOptions& options = {});

}  // namespace pjinv
