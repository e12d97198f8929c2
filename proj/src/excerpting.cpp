#include "msa/excerpting.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <istream>
#include <json.hpp>

#include "msa/error.hpp"
#include "msa/rng.hpp"

namespace msa {
namespace {

// Span starts live on a 2^-16 s grid. Any section time below 2^37 s is then an
// integer multiple of the grid's ulp, so start - span_start is exact and
// translating local times back reproduces the source times bit for bit.
constexpr int kSpanGridExponent = 16;

double snap_down(double t) {
  return std::ldexp(std::floor(std::ldexp(t, kSpanGridExponent)), -kSpanGridExponent);
}

}  // namespace

void ExcerptConfig::validate() const {
  if (!(pad_min >= 0.0) || !(pad_max >= pad_min) || !std::isfinite(pad_max)) {
    throw InvalidArgument(fmt::format("padding range must satisfy 0 <= pad_min <= pad_max, got [{}, {}]",
                                      pad_min, pad_max));
  }
  if (!(min_duration > 0.0) || !std::isfinite(min_duration)) {
    throw InvalidArgument(fmt::format("min_duration must be positive, got {}", min_duration));
  }
  if (integer_pads && std::ceil(pad_min) > std::floor(pad_max)) {
    throw InvalidArgument("integer padding requested but [pad_min, pad_max] contains no integer");
  }
}

std::string Excerpt::id() const { return fmt::format("{}.{}", song_id, source_index); }

PaddingDraw draw_padding(const ExcerptConfig& cfg, const SongId& song_id, std::size_t index) {
  auto rng = derive_stream(cfg.seed, song_id, index);
  if (cfg.integer_pads) {
    const auto lo = static_cast<std::int64_t>(std::ceil(cfg.pad_min));
    const auto hi = static_cast<std::int64_t>(std::floor(cfg.pad_max));
    const double front = static_cast<double>(rng.uniform_int(lo, hi));
    const double rear = static_cast<double>(rng.uniform_int(lo, hi));
    return {front, rear};
  }
  const double width = cfg.pad_max - cfg.pad_min;
  const double front = cfg.pad_min + width * rng.uniform();
  const double rear = cfg.pad_min + width * rng.uniform();
  return {front, rear};
}

Excerpt excerpt_with_padding(const SectionRecord& rec, StructuralFunction label, const ExcerptConfig& cfg,
                             PaddingDraw pads, std::size_t index) {
  const double song_end = rec.song_duration;
  double start = std::max(0.0, snap_down(rec.start - pads.front));
  double end = std::min(song_end, rec.end + pads.rear);

  bool front_turn = true;
  while (end - start < cfg.min_duration && (start > 0.0 || end < song_end)) {
    const bool extend_front = front_turn ? start > 0.0 : !(end < song_end);
    if (extend_front) {
      start = std::max(0.0, start - 1.0);
    } else {
      end = std::min(song_end, end + 1.0);
    }
    front_turn = !front_turn;
  }

  return Excerpt{rec.song_id,
                 SongSpan{start, end},
                 Segment(rec.start - start, rec.end - start, label),
                 rec,
                 index,
                 cfg.seed};
}

Excerpt sample_excerpt(const SectionRecord& rec, StructuralFunction label, const ExcerptConfig& cfg,
                       std::size_t index) {
  return excerpt_with_padding(rec, label, cfg, draw_padding(cfg, rec.song_id, index), index);
}

Corpus generate_corpus(const std::vector<SectionRecord>& records, const ExcerptConfig& cfg,
                       std::optional<PaddingDraw> fixed_pads) {
  cfg.validate();
  Corpus corpus;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    auto label = try_map_label(rec.raw_label);
    if (!label) {
      ++corpus.rejected;
      ++corpus.rejected_labels[rec.raw_label.text()];
      continue;
    }
    auto ex = fixed_pads ? excerpt_with_padding(rec, *label, cfg, *fixed_pads, i) : sample_excerpt(rec, *label, cfg, i);
    PartialAnnotation ann(ex.id(), ex.song_span.length(), {ex.labeled_local},
                          fmt::format("excerpt of {} [{}, {})", rec.song_id, ex.song_span.start, ex.song_span.end));
    corpus.items.push_back({std::move(ex), std::move(ann)});
  }
  return corpus;
}

std::string write_excerpts_jsonl(const Corpus& corpus) {
  std::string out;
  for (const auto& item : corpus.items) {
    const auto& ex = item.excerpt;
    nlohmann::ordered_json j;
    j["song_id"] = ex.song_id;
    j["span_start_sec"] = ex.song_span.start;
    j["span_end_sec"] = ex.song_span.end;
    j["labeled_start_sec"] = ex.labeled_local.start();
    j["labeled_end_sec"] = ex.labeled_local.end();
    j["class_name"] = class_name(ex.labeled_local.label());
    j["source_index"] = ex.source_index;
    j["seed"] = ex.seed;
    out += j.dump();
    out += '\n';
  }
  return out;
}

std::vector<PartialAnnotation> read_excerpts_jsonl(std::istream& in) {
  using nlohmann::json;
  std::vector<PartialAnnotation> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw SchemaError(line_no, "not a JSON object");
    try {
      const auto song_id = j.at("song_id").get<std::string>();
      const auto index = j.at("source_index").get<std::size_t>();
      const double span_start = j.at("span_start_sec").get<double>();
      const double span_end = j.at("span_end_sec").get<double>();
      auto label = function_from_name(j.at("class_name").get<std::string>());
      if (!label) throw UnknownLabel(j.at("class_name").get<std::string>(), {line_no});
      Segment seg(j.at("labeled_start_sec").get<double>(), j.at("labeled_end_sec").get<double>(), *label);
      out.emplace_back(fmt::format("{}.{}", song_id, index), span_end - span_start, std::vector<Segment>{seg},
                       fmt::format("excerpt of {} [{}, {})", song_id, span_start, span_end));
    } catch (const json::exception& e) {
      throw SchemaError(line_no, e.what());
    }
  }
  return out;
}

}  // namespace msa
