#pragma once

// Independent brute-force references used to freeze and cross-check expected
// values. Nothing here calls into the code paths it checks.

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

namespace msa::oracle {

/// Exhaustive maximum matching: every ref node either skips or takes any free est node in range.
inline std::size_t max_matching(const std::vector<double>& ref, const std::vector<double>& est, double window) {
  std::vector<char> used(est.size(), 0);
  std::function<std::size_t(std::size_t)> best = [&](std::size_t r) -> std::size_t {
    if (r == ref.size()) return 0;
    std::size_t out = best(r + 1);
    for (std::size_t e = 0; e < est.size(); ++e) {
      if (used[e] || std::abs(ref[r] - est[e]) > window) continue;
      used[e] = 1;
      out = std::max(out, 1 + best(r + 1));
      used[e] = 0;
    }
    return out;
  };
  return best(0);
}

struct PairCountsO2 {
  std::uint64_t ref_pairs = 0, est_pairs = 0, both = 0;
};

/// O(T^2) enumeration of unordered frame pairs.
inline PairCountsO2 pair_counts(const std::vector<std::uint8_t>& ref, const std::vector<std::uint8_t>& est) {
  PairCountsO2 c;
  for (std::size_t i = 0; i < ref.size(); ++i) {
    for (std::size_t j = i + 1; j < ref.size(); ++j) {
      const bool r = ref[i] == ref[j];
      const bool e = est[i] == est[j];
      c.ref_pairs += r;
      c.est_pairs += e;
      c.both += r && e;
    }
  }
  return c;
}

/// Explicit cosine SSM and explicit (2L+1)^2 checkerboard kernel, truncated symmetrically at the edges.
inline Eigen::VectorXd novelty(const Eigen::MatrixXd& features, int halfwidth) {
  const auto n = features.rows();
  Eigen::MatrixXd unit = features;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double norm = unit.row(i).norm();
    if (norm > 0) unit.row(i) /= norm;
  }
  const Eigen::MatrixXd ssm = unit * unit.transpose();
  const double sigma = 0.5 * halfwidth;
  auto kernel = [&](int a, int b) {
    auto sgn = [](int v) { return v < 0 ? -1.0 : (v > 0 ? 1.0 : 0.0); };
    return sgn(a) * sgn(b) * std::exp(-(a * a + b * b) / (2 * sigma * sigma));
  };
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int l = static_cast<int>(std::min<Eigen::Index>({halfwidth, i, n - 1 - i}));
    double sum = 0;
    for (int a = -l; a <= l; ++a) {
      for (int b = -l; b <= l; ++b) sum += kernel(a, b) * ssm(i + a, i + b);
    }
    out(i) = sum;
  }
  const double lo = out.minCoeff(), hi = out.maxCoeff();
  if (hi - lo <= 1e-9) return Eigen::VectorXd::Zero(n);
  return (out.array() - lo) / (hi - lo);
}

/// Central finite difference of f at x with step h.
template <typename F>
double central_difference(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2 * h);
}

}  // namespace msa::oracle
