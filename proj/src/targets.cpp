#include "msa/targets.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "msa/error.hpp"

namespace msa {

FrameGrid::FrameGrid(double rate, Index count) : rate_(rate), count_(count) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument(fmt::format("frame rate must be positive, got {}", rate));
  if (count < 0) throw InvalidArgument("negative frame count");
}

FrameGrid FrameGrid::for_duration(double duration, double rate) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw InvalidArgument(fmt::format("frame rate must be positive, got {}", rate));
  if (!(duration >= 0.0) || !std::isfinite(duration)) throw InvalidArgument("duration must be finite and non-negative");
  return FrameGrid(rate, static_cast<Index>(std::ceil(duration * rate - 1e-9)));
}

bool FrameGrid::fits(double duration) const noexcept {
  return std::isfinite(duration) && duration >= 0.0 &&
         static_cast<Index>(std::ceil(duration * rate_ - 1e-9)) == count_;
}

double boundary_pulse(double dt, double halfwidth) noexcept {
  if (halfwidth <= 0.0 || std::abs(dt) > halfwidth) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * dt / halfwidth));
}

TargetTensor rasterize(std::span<const Segment> labeled, double duration, const FrameGrid& grid,
                       double ramp_halfwidth) {
  if (!grid.fits(duration)) {
    throw GridMismatch(fmt::format("grid of {} frames at {} Hz does not match duration {}", grid.count(),
                                   grid.rate(), duration));
  }
  if (!(ramp_halfwidth >= 0.0)) throw InvalidArgument("ramp half-width must be non-negative");

  const Index n = grid.count();
  TargetTensor t;
  t.boundary = Curve<double>::Zero(n);
  t.boundary_mask = Mask::Zero(n);
  t.function = ClassMatrix<double>::Zero(kNumClasses, n);
  t.function_mask = Mask::Zero(n);

  for (const auto& seg : labeled) {
    // Frames whose centers fall in [start, end): center(i) >= start <=> i >= start*rate - 0.5.
    const Index first = std::max<Index>(0, static_cast<Index>(std::ceil(seg.start() * grid.rate() - 0.5)));
    for (Index i = first; i < n && grid.center(i) < seg.end(); ++i) {
      if (!seg.contains(grid.center(i))) continue;
      t.function(code(seg.label()), i) = 1.0;
      t.function_mask(i) = 1;
    }
    for (Index i = 0; i < n; ++i) {
      const double c = grid.center(i);
      if (c >= seg.start() - ramp_halfwidth && c <= seg.end() + ramp_halfwidth) t.boundary_mask(i) = 1;
    }
  }

  std::vector<double> edges;
  for (const auto& seg : labeled) {
    edges.push_back(seg.start());
    edges.push_back(seg.end());
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  for (double b : edges) {
    for (Index i = 0; i < n; ++i) t.boundary(i) += boundary_pulse(grid.center(i) - b, ramp_halfwidth);
  }
  t.boundary = t.boundary.min(1.0);
  return t;
}

TargetTensor rasterize(const Annotation& ann, const FrameGrid& grid, double ramp_halfwidth) {
  return rasterize(ann.segments(), ann.duration(), grid, ramp_halfwidth);
}

TargetTensor rasterize(const PartialAnnotation& ann, const FrameGrid& grid, double ramp_halfwidth) {
  return rasterize(ann.labeled(), ann.duration(), grid, ramp_halfwidth);
}

PredictionCurves as_predictions(const TargetTensor& t) { return {t.boundary, t.function}; }

std::vector<ChunkWindow> chunk_windows(Index frames, double rate, double window_sec, double hop_sec) {
  if (!(hop_sec > 0.0)) throw InvalidArgument("hop must be positive");
  if (!(window_sec > 0.0)) throw InvalidArgument("window must be positive");
  const Index window = std::max<Index>(1, std::llround(window_sec * rate));
  const Index hop = std::max<Index>(1, std::llround(hop_sec * rate));
  if (hop > window) throw InvalidArgument("hop longer than the window would leave frames uncovered");
  if (frames <= window) return {ChunkWindow{0, window, frames}};

  std::vector<ChunkWindow> out;
  Index start = 0;
  for (; start + window < frames; start += hop) out.push_back({start, window, window});
  const Index last = frames - window;
  if (out.empty() || out.back().offset != last) out.push_back({last, window, window});
  return out;
}

TargetTensor extract(const TargetTensor& t, const ChunkWindow& w) {
  TargetTensor out;
  out.boundary = Curve<double>::Zero(w.length);
  out.boundary_mask = Mask::Zero(w.length);
  out.function = ClassMatrix<double>::Zero(kNumClasses, w.length);
  out.function_mask = Mask::Zero(w.length);
  out.boundary.head(w.valid) = t.boundary.segment(w.offset, w.valid);
  out.boundary_mask.head(w.valid) = t.boundary_mask.segment(w.offset, w.valid);
  out.function.leftCols(w.valid) = t.function.middleCols(w.offset, w.valid);
  out.function_mask.head(w.valid) = t.function_mask.segment(w.offset, w.valid);
  return out;
}

PredictionCurves extract(const PredictionCurves& p, const ChunkWindow& w) {
  PredictionCurves out{Curve<double>::Zero(w.length), ClassMatrix<double>::Zero(kNumClasses, w.length)};
  out.boundary.head(w.valid) = p.boundary.segment(w.offset, w.valid);
  out.function.leftCols(w.valid) = p.function.middleCols(w.offset, w.valid);
  return out;
}

}  // namespace msa
