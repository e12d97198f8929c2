#include "msa/annotation.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <sstream>

#include "msa/error.hpp"

namespace msa {
namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::optional<double> parse_double(std::string_view s) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

// Recognizes "# duration=12.5" (whitespace-tolerant).
std::optional<double> duration_comment(std::string_view line) {
  auto pos = line.find("duration");
  if (pos == std::string_view::npos) return std::nullopt;
  auto rest = line.substr(pos + 8);
  auto eq = rest.find('=');
  if (eq == std::string_view::npos) return std::nullopt;
  auto tokens = split_ws(rest.substr(eq + 1));
  if (tokens.empty()) return std::nullopt;
  return parse_double(tokens.front());
}

void validate_segments(const std::vector<Segment>& segments, double duration) {
  if (!std::isfinite(duration) || duration <= 0.0) {
    throw RangeError(fmt::format("duration must be positive and finite, got {}", duration));
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& s = segments[i];
    if (s.end() > duration) {
      throw RangeError(fmt::format("segment [{}, {}) exceeds duration {}", s.start(), s.end(), duration));
    }
    if (i > 0 && s.start() < segments[i - 1].end()) {
      throw NonMonotonicTimes(fmt::format("segment {} starts at {} before previous end {}", i,
                                          s.start(), segments[i - 1].end()));
    }
  }
}

}  // namespace

Segment::Segment(double start, double end, StructuralFunction label)
    : start_(start), end_(end), label_(label) {
  if (!std::isfinite(start) || !std::isfinite(end) || start < 0.0) {
    throw InvalidArgument(fmt::format("segment times must be finite and non-negative: [{}, {})", start, end));
  }
  if (end <= start) {
    throw NonMonotonicTimes(fmt::format("segment end {} not after start {}", end, start));
  }
}

Annotation::Annotation(SongId song_id, double duration, std::vector<Segment> segments)
    : song_id_(std::move(song_id)), duration_(duration), segments_(std::move(segments)) {
  validate_segments(segments_, duration_);
}

const Segment* Annotation::segment_at(double t) const noexcept {
  auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                             [](double v, const Segment& s) { return v < s.start(); });
  if (it == segments_.begin()) return nullptr;
  --it;
  return it->contains(t) ? &*it : nullptr;
}

PartialAnnotation::PartialAnnotation(SongId song_id, double duration, std::vector<Segment> labeled,
                                     std::string note)
    : inner_(std::move(song_id), duration, std::move(labeled)), note_(std::move(note)) {}

Annotation parse_reference(std::istream& in, const SongId& song_id, const ParseOptions& opts) {
  struct Row {
    double start;
    std::optional<double> end;
    StructuralFunction label;
    std::size_t line_no;
  };
  std::vector<Row> rows;
  std::optional<double> declared = opts.duration;
  std::vector<std::size_t> unknown_lines;
  std::string first_unknown;
  const std::size_t columns = opts.format == RefFormat::kStartEndLabel ? 3 : 2;

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens.front().starts_with('#')) {
      if (!opts.duration) {
        if (auto d = duration_comment(line)) declared = d;
      }
      continue;
    }
    if (tokens.size() != columns) {
      throw MalformedLine(line_no, fmt::format("expected {} columns, got {}", columns, tokens.size()));
    }
    auto start = parse_double(tokens[0]);
    if (!start) throw MalformedLine(line_no, "bad start time");
    std::optional<double> end;
    if (columns == 3) {
      end = parse_double(tokens[1]);
      if (!end) throw MalformedLine(line_no, "bad end time");
      if (*end <= *start) {
        throw NonMonotonicTimes(fmt::format("line {}: end {} not after start {}", line_no, *end, *start));
      }
    }
    auto label = function_from_name(tokens.back());
    if (!label) {
      if (unknown_lines.empty()) first_unknown = std::string(tokens.back());
      unknown_lines.push_back(line_no);
      continue;
    }
    rows.push_back({*start, end, *label, line_no});
  }
  if (!unknown_lines.empty()) throw UnknownLabel(first_unknown, std::move(unknown_lines));

  std::vector<Segment> segments;
  segments.reserve(rows.size());
  if (opts.format == RefFormat::kStartLabel) {
    if (!declared) throw InvalidArgument("start-label format requires a song duration");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      double end = i + 1 < rows.size() ? rows[i + 1].start : *declared;
      if (end <= rows[i].start) {
        throw NonMonotonicTimes(fmt::format("line {}: start {} not before next boundary {}",
                                            rows[i].line_no, rows[i].start, end));
      }
      segments.emplace_back(rows[i].start, end, rows[i].label);
    }
  } else {
    for (const auto& r : rows) segments.emplace_back(r.start, *r.end, r.label);
  }
  double duration = declared ? *declared : (segments.empty() ? 0.0 : segments.back().end());
  return Annotation(song_id, duration, std::move(segments));
}

Annotation parse_reference_file(const std::string& path, const ParseOptions& opts) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  auto stem = path;
  if (auto slash = stem.find_last_of('/'); slash != std::string::npos) stem = stem.substr(slash + 1);
  if (auto dot = stem.find_last_of('.'); dot != std::string::npos) stem = stem.substr(0, dot);
  return parse_reference(in, stem, opts);
}

std::string write_annotation(const Annotation& ann) {
  std::string out = fmt::format("# duration={:.3f}\n", ann.duration());
  for (const auto& s : ann.segments()) {
    out += fmt::format("{:.3f}\t{:.3f}\t{}\n", s.start(), s.end(), class_name(s.label()));
  }
  return out;
}

std::vector<SectionRecord> parse_section_records(std::istream& in) {
  using nlohmann::json;
  std::vector<SectionRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (split_ws(line).empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.is_object()) throw SchemaError(line_no, "not a JSON object");
    auto require = [&](const char* key, auto check) -> const json& {
      auto it = j.find(key);
      if (it == j.end() || !check(*it)) throw SchemaError(line_no, fmt::format("missing or mistyped '{}'", key));
      return *it;
    };
    auto is_string = [](const json& v) { return v.is_string(); };
    auto is_number = [](const json& v) { return v.is_number(); };
    SongId song_id = require("song_id", is_string).get<std::string>();
    auto raw = require("label", is_string).get<std::string>();
    double start = require("start_sec", is_number).get<double>();
    double end = require("end_sec", is_number).get<double>();
    double dur = require("song_duration_sec", is_number).get<double>();
    if (song_id.empty()) throw SchemaError(line_no, "empty song_id");

    std::optional<RawLabel> label;
    try {
      label = normalize_label(raw);
    } catch (const EmptyLabel&) {
      throw SchemaError(line_no, "empty label");
    }
    if (!std::isfinite(start) || !std::isfinite(end) || !std::isfinite(dur) || start < 0.0 ||
        end <= start || end > dur) {
      throw RangeError(fmt::format("line {}: times violate 0 <= start < end <= duration ({}, {}, {})",
                                   line_no, start, end, dur));
    }
    records.push_back({std::move(song_id), std::move(*label), start, end, dur});
  }
  return records;
}

std::vector<double> boundaries_of(const Annotation& ann, bool trim) {
  std::vector<double> times;
  times.reserve(ann.segments().size() * 2);
  for (const auto& s : ann.segments()) {
    times.push_back(s.start());
    times.push_back(s.end());
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());
  if (trim) {
    if (times.size() <= 2) return {};
    times.erase(times.begin());
    times.pop_back();
  }
  return times;
}

}  // namespace msa
