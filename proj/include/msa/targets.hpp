#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

#include "msa/annotation.hpp"
#include "msa/taxonomy.hpp"

namespace msa {

using Index = Eigen::Index;

/// Per-frame supervision bits (0 or 1).
using Mask = Eigen::Array<std::uint8_t, Eigen::Dynamic, 1>;

template <typename Scalar>
using Curve = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

/// One row per structural function, one column per frame.
template <typename Scalar>
using ClassMatrix = Eigen::Array<Scalar, kNumClasses, Eigen::Dynamic>;

inline constexpr double kDefaultFrameRate = 10.0;
inline constexpr double kDefaultRampHalfwidth = 0.5;
inline constexpr double kWindow24s = 24.0;
inline constexpr double kWindow36s = 36.0;

/// Fixed-rate frames; frame i covers [i/rate, (i+1)/rate).
class FrameGrid {
 public:
  FrameGrid(double rate, Index count);

  /// count = ceil(duration * rate), ignoring float noise below 1e-9 frames.
  static FrameGrid for_duration(double duration, double rate = kDefaultFrameRate);

  double rate() const noexcept { return rate_; }
  Index count() const noexcept { return count_; }
  double start(Index i) const noexcept { return static_cast<double>(i) / rate_; }
  double center(Index i) const noexcept { return (static_cast<double>(i) + 0.5) / rate_; }
  double span() const noexcept { return static_cast<double>(count_) / rate_; }
  bool fits(double duration) const noexcept;

  friend bool operator==(const FrameGrid&, const FrameGrid&) = default;

 private:
  double rate_;
  Index count_;
};

template <typename Scalar>
struct TargetTensorT {
  Curve<Scalar> boundary;
  Mask boundary_mask;
  ClassMatrix<Scalar> function;
  Mask function_mask;

  Index frames() const noexcept { return boundary.size(); }
};

template <typename Scalar>
struct PredictionCurvesT {
  Curve<Scalar> boundary;
  ClassMatrix<Scalar> function;

  Index frames() const noexcept { return boundary.size(); }
};

using TargetTensor = TargetTensorT<double>;
using PredictionCurves = PredictionCurvesT<double>;

/// Raised-cosine boundary pulse of half-width w, zero outside |dt| <= w.
double boundary_pulse(double dt, double halfwidth) noexcept;

/// Rasterizes labeled segments. function/function_mask follow the segment holding
/// each frame center; boundary pulses sit on every labeled segment edge and are
/// supervised within labeled spans widened by the ramp half-width.
/// Throws GridMismatch if the grid does not match the duration.
TargetTensor rasterize(std::span<const Segment> labeled, double duration, const FrameGrid& grid,
                       double ramp_halfwidth = kDefaultRampHalfwidth);
TargetTensor rasterize(const Annotation& ann, const FrameGrid& grid, double ramp_halfwidth = kDefaultRampHalfwidth);
TargetTensor rasterize(const PartialAnnotation& ann, const FrameGrid& grid,
                       double ramp_halfwidth = kDefaultRampHalfwidth);

/// Targets reused as model outputs (oracle predictions).
PredictionCurves as_predictions(const TargetTensor& t);

/// A fixed-length view into a frame sequence. Frames past `valid` are zero padding.
struct ChunkWindow {
  Index offset;
  Index length;
  Index valid;
};

/// Windows start at 0, hop, 2*hop, ...; the last one is right-aligned to the end.
/// An input shorter than the window yields a single padded window.
std::vector<ChunkWindow> chunk_windows(Index frames, double rate, double window_sec, double hop_sec);

TargetTensor extract(const TargetTensor& t, const ChunkWindow& w);
PredictionCurves extract(const PredictionCurves& p, const ChunkWindow& w);

}  // namespace msa
