#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "msa/taxonomy.hpp"

namespace msa {

using SongId = std::string;

/// A labeled time span in seconds. Invariant: 0 <= start < end, both finite.
class Segment {
 public:
  /// Throws InvalidArgument on non-finite, negative or zero-length spans.
  Segment(double start, double end, StructuralFunction label);

  double start() const noexcept { return start_; }
  double end() const noexcept { return end_; }
  double length() const noexcept { return end_ - start_; }
  StructuralFunction label() const noexcept { return label_; }
  bool contains(double t) const noexcept { return start_ <= t && t < end_; }

  friend bool operator==(const Segment&, const Segment&) = default;

 private:
  double start_;
  double end_;
  StructuralFunction label_;
};

/// Ordered, non-overlapping segments inside [0, duration]. Gaps are unlabeled.
class Annotation {
 public:
  /// Validates ordering and containment; throws NonMonotonicTimes or RangeError.
  Annotation(SongId song_id, double duration, std::vector<Segment> segments);

  const SongId& song_id() const noexcept { return song_id_; }
  double duration() const noexcept { return duration_; }
  std::span<const Segment> segments() const noexcept { return segments_; }

  /// Segment covering time t, if any.
  const Segment* segment_at(double t) const noexcept;

  friend bool operator==(const Annotation&, const Annotation&) = default;

 private:
  SongId song_id_;
  double duration_;
  std::vector<Segment> segments_;
};

/// An annotation where uncovered spans are explicitly unknown (excerpt padding).
class PartialAnnotation {
 public:
  PartialAnnotation(SongId song_id, double duration, std::vector<Segment> labeled,
                    std::string note = {});

  const SongId& song_id() const noexcept { return inner_.song_id(); }
  double duration() const noexcept { return inner_.duration(); }
  std::span<const Segment> labeled() const noexcept { return inner_.segments(); }
  const std::string& note() const noexcept { return note_; }

  /// The same spans viewed as an Annotation with gaps.
  const Annotation& as_annotation() const noexcept { return inner_; }

 private:
  Annotation inner_;
  std::string note_;
};

/// One HookTheory section with timing relative to the full recording.
struct SectionRecord {
  SongId song_id;
  RawLabel raw_label;
  double start;
  double end;
  double song_duration;
};

enum class RefFormat { kStartEndLabel, kStartLabel };

struct ParseOptions {
  RefFormat format = RefFormat::kStartEndLabel;
  /// Required for kStartLabel; overrides a `# duration=` comment for kStartEndLabel.
  std::optional<double> duration;
};

/// Parses a reference annotation. Blank lines and '#' comments are skipped; a
/// `# duration=<sec>` comment declares the song duration.
Annotation parse_reference(std::istream& in, const SongId& song_id, const ParseOptions& opts = {});
Annotation parse_reference_file(const std::string& path, const ParseOptions& opts = {});

/// Three-column text with 1 ms time resolution and a leading duration comment.
std::string write_annotation(const Annotation& ann);

/// JSON-lines manifest of HookTheory sections. Throws SchemaError or RangeError.
std::vector<SectionRecord> parse_section_records(std::istream& in);

/// Sorted unique boundary times: every segment start plus every segment end.
/// With trim, the first and last times are dropped.
std::vector<double> boundaries_of(const Annotation& ann, bool trim = false);

}  // namespace msa
