#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msa/annotation.hpp"

namespace msa {

struct PRF {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static PRF from(double precision, double recall);
};

struct HitRate {
  PRF prf;
  std::size_t matched = 0;
};

/// Size of a maximum matching between ref and est where an edge joins times at
/// most `window` apart (augmenting paths).
std::size_t max_boundary_matching(std::span<const double> ref, std::span<const double> est, double window);

/// Boundary hit rate under optimal one-to-one matching. Both empty gives 1, one empty gives 0.
HitRate boundary_hit_rate(std::span<const double> ref, std::span<const double> est, double window = 0.5);

/// Fraction of reference-labeled frame centers whose labels agree.
/// Throws EmptyReference or DurationMismatch.
double frame_accuracy(const Annotation& ref, const Annotation& est, double frame = 0.1);

/// Start/end times of maximal chorus runs, adjacent chorus segments merged.
std::vector<double> chorus_boundaries(const Annotation& ann);

HitRate chorus_boundary_hit_rate(const Annotation& ref, const Annotation& est, double window = 0.5);

/// Counts of unordered frame pairs sharing a label on each side, and on both.
struct PairCounts {
  std::uint64_t ref_pairs = 0;
  std::uint64_t est_pairs = 0;
  std::uint64_t both = 0;
};

/// Closed-form pair counts from the 2x2 contingency table of binary labels.
PairCounts pair_counts(std::span<const std::uint8_t> ref, std::span<const std::uint8_t> est);

PRF pairwise_prf(const PairCounts& counts);

/// Chorus / non-chorus binary labels at frame centers over reference-labeled frames.
struct ChorusFrames {
  std::vector<std::uint8_t> ref;
  std::vector<std::uint8_t> est;
};
ChorusFrames chorus_frames(const Annotation& ref, const Annotation& est, double frame = 0.1);

PRF chorus_pairwise_f1(const Annotation& ref, const Annotation& est, double frame = 0.1);

struct EvalConfig {
  double window = 0.5;
  double frame = 0.1;
  bool trim = false;
  bool duration_weighted = false;
};

struct SongRow {
  SongId song_id;
  double hr5f = 0.0;
  double acc = 0.0;
  double chr5f = 0.0;
  double cf1 = 0.0;
  double duration = 0.0;
};

SongRow evaluate_song(const Annotation& ref, const Annotation& est, const EvalConfig& cfg = {});

struct EvalPair {
  Annotation ref;
  std::optional<Annotation> est;
  /// Upstream failure (prediction, decoding); the song is reported as failed.
  std::string error = {};
};

struct EvalReport {
  std::vector<SongRow> rows;
  SongRow mean;
  std::vector<SongId> missing;
  std::map<SongId, std::string> failures;
  std::size_t warnings() const noexcept { return missing.size() + failures.size(); }
};

/// Rows ordered by song id; means over evaluated songs only.
EvalReport evaluate_corpus(const std::vector<EvalPair>& pairs, const EvalConfig& cfg = {});

std::string report_csv(const EvalReport& report);

}  // namespace msa

namespace msa {

/// JSON summary: means, counts, missing/failed songs, config echo and toolkit version.
std::string report_summary_json(const EvalReport& report, const EvalConfig& cfg);

}  // namespace msa
