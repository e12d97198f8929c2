#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <vector>

#include "msa/annotation.hpp"
#include "msa/targets.hpp"

namespace msa {

struct DecodeConfig {
  double peak_threshold = 0.3;
  double min_gap = 4.0;
  double median_window = 0.5;

  void validate() const;
};

/// Running median with an odd window of `width` frames, shrunk at the edges.
template <typename Derived>
Curve<typename Derived::Scalar> median_filter(const Eigen::ArrayBase<Derived>& x, Index width) {
  using Scalar = typename Derived::Scalar;
  const Index n = x.size();
  Curve<Scalar> out(n);
  if (width <= 1) {
    out = x;
    return out;
  }
  const Index half = width / 2;
  std::vector<Scalar> buf;
  for (Index i = 0; i < n; ++i) {
    const Index lo = std::max<Index>(0, i - half);
    const Index hi = std::min<Index>(n - 1, i + half);
    buf.assign(x.derived().data() + lo, x.derived().data() + hi + 1);
    auto mid = buf.begin() + static_cast<std::ptrdiff_t>(buf.size() / 2);
    std::nth_element(buf.begin(), mid, buf.end());
    out(i) = *mid;
  }
  return out;
}

/// Frame-index position of a peak; plateaus report their midpoint.
struct Peak {
  double position;
  double height;
};

/// Plateau-aware local maxima strictly above `threshold`. Values within 1e-9 count as equal.
std::vector<Peak> find_peaks(const Curve<double>& curve, double threshold);

/// Boundary times from a boundary activation: median filter, threshold, greedy
/// highest-first suppression within min_gap. The result starts with 0 and ends
/// with the grid duration.
std::vector<double> pick_boundaries(const Curve<double>& boundary_hat, const FrameGrid& grid, double duration,
                                    const DecodeConfig& cfg = {});

/// Labels each inter-boundary span with the argmax of its mean class activation.
Annotation label_segments(const ClassMatrix<double>& function_hat, std::vector<double> boundaries,
                          const FrameGrid& grid, const SongId& song_id = {});

Annotation decode(const PredictionCurves& pred, const FrameGrid& grid, double duration, const DecodeConfig& cfg = {},
                  const SongId& song_id = {});

}  // namespace msa
