#include "msa/decoding.hpp"

#include <fmt/format.h>

#include <cmath>

#include "msa/error.hpp"

namespace msa {
namespace {

constexpr double kPlateauTolerance = 1e-9;

bool same_level(double a, double b) { return std::abs(a - b) <= kPlateauTolerance; }

}  // namespace

void DecodeConfig::validate() const {
  if (!(min_gap > 0.0)) throw InvalidArgument(fmt::format("min_gap must be positive, got {}", min_gap));
  if (!(median_window >= 0.0)) throw InvalidArgument("median window must be non-negative");
  if (std::isnan(peak_threshold)) throw InvalidArgument("peak threshold is NaN");
}

std::vector<Peak> find_peaks(const Curve<double>& curve, double threshold) {
  std::vector<Peak> peaks;
  const Index n = curve.size();
  Index i = 0;
  while (i < n) {
    Index j = i;
    while (j + 1 < n && same_level(curve(j + 1), curve(i))) ++j;
    const bool rises = i == 0 || curve(i - 1) < curve(i);
    const bool falls = j == n - 1 || curve(j + 1) < curve(j);
    if (rises && falls && curve(i) > threshold) {
      double height = curve.segment(i, j - i + 1).maxCoeff();
      peaks.push_back({0.5 * static_cast<double>(i + j), height});
    }
    i = j + 1;
  }
  return peaks;
}

std::vector<double> pick_boundaries(const Curve<double>& boundary_hat, const FrameGrid& grid, double duration,
                                    const DecodeConfig& cfg) {
  cfg.validate();
  if (boundary_hat.size() != grid.count()) throw GridMismatch("boundary curve length differs from grid");
  Index width = std::llround(cfg.median_window * grid.rate());
  if (width > 1 && width % 2 == 0) ++width;
  const Curve<double> smooth = median_filter(boundary_hat, width);
  auto peaks = find_peaks(smooth, cfg.peak_threshold);

  std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.height > b.height; });

  // Endpoints are kept from the start; positions are in frame-center index units,
  // where time t sits at t * rate - 0.5.
  const double gap_frames = cfg.min_gap * grid.rate();
  std::vector<double> kept{-0.5, duration * grid.rate() - 0.5};
  std::vector<double> interior;
  for (const auto& p : peaks) {
    bool clear = std::all_of(kept.begin(), kept.end(),
                             [&](double k) { return std::abs(p.position - k) >= gap_frames; });
    if (!clear) continue;
    kept.push_back(p.position);
    interior.push_back((p.position + 0.5) / grid.rate());
  }
  std::sort(interior.begin(), interior.end());
  std::vector<double> out;
  out.reserve(interior.size() + 2);
  out.push_back(0.0);
  for (double t : interior) {
    if (t > 0.0 && t < duration) out.push_back(t);
  }
  out.push_back(duration);
  return out;
}

Annotation label_segments(const ClassMatrix<double>& function_hat, std::vector<double> boundaries,
                          const FrameGrid& grid, const SongId& song_id) {
  if (function_hat.cols() != grid.count()) throw GridMismatch("class activations length differs from grid");
  if (boundaries.size() < 2 || boundaries.front() != 0.0 ||
      !std::is_sorted(boundaries.begin(), boundaries.end())) {
    throw DegenerateSpan("boundaries must be sorted and start at 0");
  }
  const double duration = boundaries.back();

  // Frame range [first, last) whose centers fall in [a, b).
  auto first_frame = [&](double t) {
    return std::clamp<Index>(static_cast<Index>(std::ceil(t * grid.rate() - 0.5)), 0, grid.count());
  };

  // Drop boundaries that would leave a span without frames; a leading empty span
  // is merged into its right neighbor, any other into its left.
  std::vector<double> kept{boundaries.front()};
  for (std::size_t k = 1; k < boundaries.size(); ++k) {
    const bool last = k + 1 == boundaries.size();
    if (first_frame(boundaries[k]) > first_frame(kept.back())) {
      kept.push_back(boundaries[k]);
    } else if (last) {
      if (kept.size() > 1) kept.back() = boundaries[k];
      else kept.push_back(boundaries[k]);
    }
  }

  std::vector<Segment> segments;
  for (std::size_t k = 0; k + 1 < kept.size(); ++k) {
    const Index lo = first_frame(kept[k]);
    const Index hi = first_frame(kept[k + 1]);
    int best = 0;
    if (hi > lo) {
      Eigen::Array<double, kNumClasses, 1> mean = function_hat.middleCols(lo, hi - lo).rowwise().mean();
      for (int c = 1; c < kNumClasses; ++c) {
        if (mean(c) > mean(best)) best = c;
      }
    }
    if (kept[k + 1] > kept[k]) segments.emplace_back(kept[k], kept[k + 1], function_from_code(best));
  }
  return Annotation(song_id, duration, std::move(segments));
}

Annotation decode(const PredictionCurves& pred, const FrameGrid& grid, double duration, const DecodeConfig& cfg,
                  const SongId& song_id) {
  if (pred.function.cols() != pred.boundary.size()) throw ShapeMismatch("prediction channels differ in length");
  auto boundaries = pick_boundaries(pred.boundary, grid, duration, cfg);
  return label_segments(pred.function, std::move(boundaries), grid, song_id);
}

}  // namespace msa
