#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "msa/annotation.hpp"

namespace msa {

struct ExcerptConfig {
  double pad_min = 8.0;
  double pad_max = 12.0;
  double min_duration = 30.0;
  std::uint64_t seed = 0;
  /// Draw whole-second paddings uniformly from [ceil(pad_min), floor(pad_max)].
  bool integer_pads = false;

  /// Throws InvalidArgument unless 0 <= pad_min <= pad_max and min_duration > 0.
  void validate() const;
};

struct SongSpan {
  double start;
  double end;
  double length() const noexcept { return end - start; }
};

/// A clipped span of a song with one labeled section, in excerpt-local time.
struct Excerpt {
  SongId song_id;
  SongSpan song_span;
  /// Labeled section measured from song_span.start.
  Segment labeled_local;
  SectionRecord source;
  std::size_t source_index;
  std::uint64_t seed;

  double to_song_time(double local) const noexcept { return local + song_span.start; }
  /// Stable identifier used for per-excerpt output files.
  std::string id() const;
};

struct PaddingDraw {
  double front;
  double rear;
};

/// The per-record padding draw, determined by (seed, song_id, index).
PaddingDraw draw_padding(const ExcerptConfig& cfg, const SongId& song_id, std::size_t index);

/// Deterministic core of excerpting: apply given paddings, clip to the song, then
/// extend by 1 s steps (front first, alternating) up to cfg.min_duration.
Excerpt excerpt_with_padding(const SectionRecord& rec, StructuralFunction label, const ExcerptConfig& cfg,
                             PaddingDraw pads, std::size_t index);

/// Draws padding for record `index` and builds its excerpt.
Excerpt sample_excerpt(const SectionRecord& rec, StructuralFunction label, const ExcerptConfig& cfg,
                       std::size_t index);

struct CorpusItem {
  Excerpt excerpt;
  PartialAnnotation annotation;
};

struct Corpus {
  std::vector<CorpusItem> items;
  std::size_t rejected = 0;
  /// Rejection tally per normalized label.
  std::map<std::string, std::size_t> rejected_labels;
};

/// One excerpt per record whose label maps; unknown labels are skipped and counted.
/// `fixed_pads` replaces the random draw for every record (golden-file tests).
Corpus generate_corpus(const std::vector<SectionRecord>& records, const ExcerptConfig& cfg,
                       std::optional<PaddingDraw> fixed_pads = std::nullopt);

/// JSON-lines rendering, one excerpt per line, byte-stable for a given corpus.
std::string write_excerpts_jsonl(const Corpus& corpus);

/// Reads excerpts.jsonl back as partial annotations keyed by Excerpt::id().
std::vector<PartialAnnotation> read_excerpts_jsonl(std::istream& in);

}  // namespace msa
