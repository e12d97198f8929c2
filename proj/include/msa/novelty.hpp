#pragma once

#include <Eigen/Core>
#include <cmath>

#include "msa/error.hpp"
#include "msa/targets.hpp"

namespace msa {

/// Antisymmetric Gaussian-tapered checkerboard weights over offsets -L..L
/// (zero at the center, sigma = L/2). The checkerboard kernel is their outer product.
template <typename Scalar>
Curve<Scalar> checkerboard_weights(Index halfwidth) {
  Curve<Scalar> w(2 * halfwidth + 1);
  const Scalar sigma = Scalar(0.5) * static_cast<Scalar>(halfwidth);
  for (Index a = -halfwidth; a <= halfwidth; ++a) {
    const Scalar x = static_cast<Scalar>(a);
    const Scalar sign = a < 0 ? Scalar(-1) : (a > 0 ? Scalar(1) : Scalar(0));
    w(a + halfwidth) = sign * std::exp(-x * x / (Scalar(2) * sigma * sigma));
  }
  return w;
}

/// Rows scaled to unit length; all-zero rows stay zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> normalize_rows(
    const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out = x;
  for (Index i = 0; i < out.rows(); ++i) {
    const Scalar norm = out.row(i).norm();
    if (norm > Scalar(0)) out.row(i) /= norm;
  }
  return out;
}

/// Checkerboard novelty of the cosine self-similarity matrix of `features`
/// (frames x dims), min-max normalized to [0, 1]. Near the edges the kernel is
/// truncated symmetrically. A curve with no variation comes back all zero.
///
/// With S = F F^T and kernel w w^T, the windowed sum sum_ab w_a w_b S(n+a, n+b)
/// equals |F_window^T w|^2, which is what gets evaluated.
template <typename Derived>
Curve<typename Derived::Scalar> checkerboard_novelty(const Eigen::MatrixBase<Derived>& features, Index halfwidth) {
  using Scalar = typename Derived::Scalar;
  if (features.cols() < 1) throw ShapeMismatch("feature matrix needs at least one dimension");
  if (halfwidth < 1) throw InvalidArgument("kernel half-width must be at least one frame");
  const auto unit = normalize_rows(features);
  const Index n = unit.rows();
  const Curve<Scalar> w = checkerboard_weights<Scalar>(halfwidth);

  Curve<Scalar> novelty = Curve<Scalar>::Zero(n);
  for (Index i = 0; i < n; ++i) {
    const Index l = std::min({halfwidth, i, n - 1 - i});
    if (l == 0) continue;
    const auto window = unit.middleRows(i - l, 2 * l + 1);
    const auto weights = w.segment(halfwidth - l, 2 * l + 1).matrix();
    novelty(i) = (window.transpose() * weights).squaredNorm();
  }
  if (n == 0) return novelty;
  const Scalar lo = novelty.minCoeff();
  const Scalar hi = novelty.maxCoeff();
  if (hi - lo <= Scalar(1e-9)) return Curve<Scalar>::Zero(n);
  return (novelty - lo) / (hi - lo);
}

}  // namespace msa
