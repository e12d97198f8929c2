#include "msa/metrics.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <json.hpp>

#include "msa/error.hpp"
#include "msa/version.hpp"

namespace msa {

PRF PRF::from(double precision, double recall) {
  const double sum = precision + recall;
  return {precision, recall, sum > 0.0 ? 2.0 * precision * recall / sum : 0.0};
}

std::size_t max_boundary_matching(std::span<const double> ref, std::span<const double> est, double window) {
  // Kuhn's augmenting paths; est nodes are matched to ref nodes.
  std::vector<std::vector<std::size_t>> adj(ref.size());
  for (std::size_t r = 0; r < ref.size(); ++r) {
    for (std::size_t e = 0; e < est.size(); ++e) {
      if (std::abs(ref[r] - est[e]) <= window) adj[r].push_back(e);
    }
  }
  constexpr std::size_t kFree = static_cast<std::size_t>(-1);
  std::vector<std::size_t> match_of_est(est.size(), kFree);
  std::vector<char> seen;
  std::function<bool(std::size_t)> augment = [&](std::size_t r) {
    for (std::size_t e : adj[r]) {
      if (seen[e]) continue;
      seen[e] = 1;
      if (match_of_est[e] == kFree || augment(match_of_est[e])) {
        match_of_est[e] = r;
        return true;
      }
    }
    return false;
  };
  std::size_t matched = 0;
  for (std::size_t r = 0; r < ref.size(); ++r) {
    seen.assign(est.size(), 0);
    if (augment(r)) ++matched;
  }
  return matched;
}

HitRate boundary_hit_rate(std::span<const double> ref, std::span<const double> est, double window) {
  if (ref.empty() && est.empty()) return {PRF{1.0, 1.0, 1.0}, 0};
  if (ref.empty() || est.empty()) return {PRF{}, 0};
  const std::size_t matched = max_boundary_matching(ref, est, window);
  return {PRF::from(static_cast<double>(matched) / static_cast<double>(est.size()),
                    static_cast<double>(matched) / static_cast<double>(ref.size())),
          matched};
}

namespace {

// Calls fn(ref_segment*, est_segment*) at every frame center within the shorter duration.
template <typename Fn>
void for_each_frame(const Annotation& ref, const Annotation& est, double frame, Fn&& fn) {
  if (!(frame > 0.0)) throw InvalidArgument("frame size must be positive");
  if (std::abs(ref.duration() - est.duration()) > frame + 1e-9) {
    throw DurationMismatch(fmt::format("durations differ by more than one frame: {} vs {}", ref.duration(),
                                       est.duration()));
  }
  const double duration = std::min(ref.duration(), est.duration());
  for (std::size_t i = 0;; ++i) {
    const double t = (static_cast<double>(i) + 0.5) * frame;
    if (t >= duration) break;
    fn(ref.segment_at(t), est.segment_at(t));
  }
}

}  // namespace

double frame_accuracy(const Annotation& ref, const Annotation& est, double frame) {
  std::size_t labeled = 0;
  std::size_t agree = 0;
  for_each_frame(ref, est, frame, [&](const Segment* r, const Segment* e) {
    if (!r) return;
    ++labeled;
    if (e && e->label() == r->label()) ++agree;
  });
  if (labeled == 0) throw EmptyReference();
  return static_cast<double>(agree) / static_cast<double>(labeled);
}

std::vector<double> chorus_boundaries(const Annotation& ann) {
  std::vector<double> times;
  const Segment* run_end = nullptr;
  for (const auto& s : ann.segments()) {
    if (s.label() != StructuralFunction::kChorus) continue;
    if (run_end && run_end->end() == s.start()) {
      times.back() = s.end();
    } else {
      times.push_back(s.start());
      times.push_back(s.end());
    }
    run_end = &s;
  }
  return times;
}

HitRate chorus_boundary_hit_rate(const Annotation& ref, const Annotation& est, double window) {
  const auto r = chorus_boundaries(ref);
  const auto e = chorus_boundaries(est);
  return boundary_hit_rate(r, e, window);
}

PairCounts pair_counts(std::span<const std::uint8_t> ref, std::span<const std::uint8_t> est) {
  if (ref.size() != est.size()) throw ShapeMismatch("label sequences differ in length");
  std::uint64_t table[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < ref.size(); ++i) ++table[ref[i] ? 1 : 0][est[i] ? 1 : 0];
  auto pairs = [](std::uint64_t n) { return n * (n > 0 ? n - 1 : 0) / 2; };
  PairCounts c;
  c.ref_pairs = pairs(table[0][0] + table[0][1]) + pairs(table[1][0] + table[1][1]);
  c.est_pairs = pairs(table[0][0] + table[1][0]) + pairs(table[0][1] + table[1][1]);
  c.both = pairs(table[0][0]) + pairs(table[0][1]) + pairs(table[1][0]) + pairs(table[1][1]);
  return c;
}

PRF pairwise_prf(const PairCounts& c) {
  auto ratio = [](std::uint64_t num, std::uint64_t den, std::uint64_t other) {
    if (den == 0) return other == 0 ? 1.0 : 0.0;
    return static_cast<double>(num) / static_cast<double>(den);
  };
  return PRF::from(ratio(c.both, c.est_pairs, c.ref_pairs), ratio(c.both, c.ref_pairs, c.est_pairs));
}

ChorusFrames chorus_frames(const Annotation& ref, const Annotation& est, double frame) {
  ChorusFrames out;
  for_each_frame(ref, est, frame, [&](const Segment* r, const Segment* e) {
    if (!r) return;
    out.ref.push_back(r->label() == StructuralFunction::kChorus);
    out.est.push_back(e && e->label() == StructuralFunction::kChorus);
  });
  if (out.ref.empty()) throw EmptyReference();
  return out;
}

PRF chorus_pairwise_f1(const Annotation& ref, const Annotation& est, double frame) {
  const auto frames = chorus_frames(ref, est, frame);
  return pairwise_prf(pair_counts(frames.ref, frames.est));
}

SongRow evaluate_song(const Annotation& ref, const Annotation& est, const EvalConfig& cfg) {
  SongRow row;
  row.song_id = ref.song_id();
  row.duration = ref.duration();
  const auto rb = boundaries_of(ref, cfg.trim);
  const auto eb = boundaries_of(est, cfg.trim);
  row.hr5f = boundary_hit_rate(rb, eb, cfg.window).prf.f1;
  row.acc = frame_accuracy(ref, est, cfg.frame);
  row.chr5f = chorus_boundary_hit_rate(ref, est, cfg.window).prf.f1;
  row.cf1 = chorus_pairwise_f1(ref, est, cfg.frame).f1;
  return row;
}

EvalReport evaluate_corpus(const std::vector<EvalPair>& pairs, const EvalConfig& cfg) {
  std::vector<const EvalPair*> order;
  for (const auto& p : pairs) order.push_back(&p);
  std::stable_sort(order.begin(), order.end(),
                   [](const EvalPair* a, const EvalPair* b) { return a->ref.song_id() < b->ref.song_id(); });

  EvalReport report;
  report.mean.song_id = "mean";
  for (const auto* p : order) {
    if (!p->error.empty()) {
      report.failures.emplace(p->ref.song_id(), p->error);
      continue;
    }
    if (!p->est) {
      report.missing.push_back(p->ref.song_id());
      continue;
    }
    try {
      report.rows.push_back(evaluate_song(p->ref, *p->est, cfg));
    } catch (const Error& e) {
      report.failures.emplace(p->ref.song_id(), e.what());
    }
  }
  double weight_sum = 0.0;
  for (const auto& r : report.rows) {
    const double w = cfg.duration_weighted ? r.duration : 1.0;
    weight_sum += w;
    report.mean.hr5f += w * r.hr5f;
    report.mean.acc += w * r.acc;
    report.mean.chr5f += w * r.chr5f;
    report.mean.cf1 += w * r.cf1;
    report.mean.duration += r.duration;
  }
  if (weight_sum > 0.0) {
    report.mean.hr5f /= weight_sum;
    report.mean.acc /= weight_sum;
    report.mean.chr5f /= weight_sum;
    report.mean.cf1 /= weight_sum;
  }
  return report;
}

std::string report_csv(const EvalReport& report) {
  std::string out = "song_id,hr5f,acc,chr5f,cf1\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{:.6f},{:.6f},{:.6f},{:.6f}\n", r.song_id, r.hr5f, r.acc, r.chr5f, r.cf1);
  }
  return out;
}

std::string report_summary_json(const EvalReport& report, const EvalConfig& cfg) {
  nlohmann::ordered_json j;
  j["toolkit"] = "msakit";
  j["version"] = kVersion;
  j["means"] = {{"hr5f", report.mean.hr5f},
                {"acc", report.mean.acc},
                {"chr5f", report.mean.chr5f},
                {"cf1", report.mean.cf1}};
  j["counts"] = {{"evaluated", report.rows.size()},
                 {"missing", report.missing.size()},
                 {"failed", report.failures.size()},
                 {"warnings", report.warnings()}};
  j["missing"] = report.missing;
  j["failures"] = report.failures;
  j["config"] = {{"window", cfg.window},
                 {"frame", cfg.frame},
                 {"trim", cfg.trim},
                 {"duration_weighted", cfg.duration_weighted}};
  return j.dump(2) + "\n";
}

}  // namespace msa
