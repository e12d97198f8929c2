#pragma once

// Masked binary cross-entropy over target tensors. Only frames whose mask bit is
// set are ever read, so predictions on masked-out frames cannot influence either
// the value or the gradient.

#include <algorithm>
#include <cmath>

#include "msa/error.hpp"
#include "msa/targets.hpp"

namespace msa {

inline constexpr double kLossEpsilon = 1e-7;

template <typename Scalar>
struct LossValue {
  Scalar loss;
  Index frames_counted;
};

namespace detail {

template <typename Scalar>
Scalar clamp_probability(Scalar p) {
  return std::clamp(p, Scalar(kLossEpsilon), Scalar(1) - Scalar(kLossEpsilon));
}

template <typename Scalar>
Scalar bce(Scalar p, Scalar y) {
  const Scalar q = clamp_probability(p);
  return -(y * std::log(q) + (Scalar(1) - y) * std::log(Scalar(1) - q));
}

// d bce / dp; zero where the clamp is active.
template <typename Scalar>
Scalar bce_derivative(Scalar p, Scalar y) {
  if (p <= Scalar(kLossEpsilon) || p >= Scalar(1) - Scalar(kLossEpsilon)) return Scalar(0);
  return (p - y) / (p * (Scalar(1) - p));
}

template <typename Scalar>
void check_shapes(const PredictionCurvesT<Scalar>& pred, const TargetTensorT<Scalar>& tgt) {
  if (pred.frames() != tgt.frames() || pred.function.cols() != tgt.function.cols() ||
      tgt.boundary_mask.size() != tgt.frames() || tgt.function_mask.size() != tgt.frames()) {
    throw ShapeMismatch("prediction and target frame counts differ");
  }
}

}  // namespace detail

/// Mean BCE over (masked frame, class) pairs. Zero with no frames counted.
template <typename Scalar>
LossValue<Scalar> masked_function_loss(const PredictionCurvesT<Scalar>& pred, const TargetTensorT<Scalar>& tgt) {
  detail::check_shapes(pred, tgt);
  Scalar total(0);
  Index counted = 0;
  for (Index i = 0; i < tgt.frames(); ++i) {
    if (!tgt.function_mask(i)) continue;
    ++counted;
    for (Index c = 0; c < kNumClasses; ++c) total += detail::bce(pred.function(c, i), tgt.function(c, i));
  }
  if (counted == 0) return {Scalar(0), 0};
  return {total / static_cast<Scalar>(counted * kNumClasses), counted};
}

/// Gradient of masked_function_loss with respect to pred.function.
template <typename Scalar>
ClassMatrix<Scalar> masked_function_loss_gradient(const PredictionCurvesT<Scalar>& pred,
                                                  const TargetTensorT<Scalar>& tgt) {
  detail::check_shapes(pred, tgt);
  ClassMatrix<Scalar> grad = ClassMatrix<Scalar>::Zero(kNumClasses, tgt.frames());
  const Index counted = (tgt.function_mask != 0).count();
  if (counted == 0) return grad;
  const Scalar n = static_cast<Scalar>(counted * kNumClasses);
  for (Index i = 0; i < tgt.frames(); ++i) {
    if (!tgt.function_mask(i)) continue;
    for (Index c = 0; c < kNumClasses; ++c) {
      grad(c, i) = detail::bce_derivative(pred.function(c, i), tgt.function(c, i)) / n;
    }
  }
  return grad;
}

/// Mean BCE of the boundary channel over boundary_mask frames.
template <typename Scalar>
LossValue<Scalar> masked_boundary_loss(const PredictionCurvesT<Scalar>& pred, const TargetTensorT<Scalar>& tgt) {
  detail::check_shapes(pred, tgt);
  Scalar total(0);
  Index counted = 0;
  for (Index i = 0; i < tgt.frames(); ++i) {
    if (!tgt.boundary_mask(i)) continue;
    ++counted;
    total += detail::bce(pred.boundary(i), tgt.boundary(i));
  }
  if (counted == 0) return {Scalar(0), 0};
  return {total / static_cast<Scalar>(counted), counted};
}

template <typename Scalar>
Curve<Scalar> masked_boundary_loss_gradient(const PredictionCurvesT<Scalar>& pred, const TargetTensorT<Scalar>& tgt) {
  detail::check_shapes(pred, tgt);
  Curve<Scalar> grad = Curve<Scalar>::Zero(tgt.frames());
  const Index counted = (tgt.boundary_mask != 0).count();
  if (counted == 0) return grad;
  for (Index i = 0; i < tgt.frames(); ++i) {
    if (tgt.boundary_mask(i)) {
      grad(i) = detail::bce_derivative(pred.boundary(i), tgt.boundary(i)) / static_cast<Scalar>(counted);
    }
  }
  return grad;
}

}  // namespace msa
