#pragma once

#include <unistd.h>

#include <filesystem>
#include <fmt/format.h>
#include <json.hpp>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "msa/annotation.hpp"
#include "msa/io.hpp"
#include "msa/pipeline.hpp"
#include "msa/tensor_io.hpp"

namespace msa::test {

/// Fresh directory under the system temp dir, removed on scope exit.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("msakit_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

/// Redirects std::cout for the lifetime of the object.
class CaptureStdout {
 public:
  CaptureStdout() : old_(std::cout.rdbuf(buffer_.rdbuf())) {}
  ~CaptureStdout() { std::cout.rdbuf(old_); }
  std::string str() const { return buffer_.str(); }

 private:
  std::ostringstream buffer_;
  std::streambuf* old_;
};

/// Contiguous full-song annotation on a 0.1 s grid with every segment at least
/// `min_len` seconds long.
inline Annotation random_grid_annotation(std::mt19937_64& rng, const std::string& id, double min_len = 4.0,
                                         int max_segments = 8) {
  std::uniform_int_distribution<int> count_dist(1, max_segments);
  std::uniform_int_distribution<int> extra_ticks(0, 150);
  std::uniform_int_distribution<int> label_dist(0, kNumClasses - 1);
  const int count = count_dist(rng);
  const int min_ticks = static_cast<int>(std::lround(min_len * 10));
  std::vector<Segment> segs;
  int tick = 0;
  for (int i = 0; i < count; ++i) {
    const int len = min_ticks + extra_ticks(rng);
    segs.emplace_back(tick / 10.0, (tick + len) / 10.0, static_cast<StructuralFunction>(label_dist(rng)));
    tick += len;
  }
  return Annotation(id, tick / 10.0, std::move(segs));
}

/// Block features: one random unit direction per class plus small noise, so
/// novelty peaks sit on label changes.
inline Eigen::MatrixXd block_features(std::mt19937_64& rng, const Annotation& ann, double rate, int dims = 8) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::MatrixXd dirs(kNumClasses, dims);
  for (Eigen::Index c = 0; c < dirs.rows(); ++c) {
    for (int d = 0; d < dims; ++d) dirs(c, d) = n(rng);
  }
  const auto frames = static_cast<Eigen::Index>(std::ceil(ann.duration() * rate - 1e-9));
  Eigen::MatrixXd f(frames, dims);
  for (Eigen::Index i = 0; i < frames; ++i) {
    const Segment* s = ann.segment_at((static_cast<double>(i) + 0.5) / rate);
    const int c = s ? code(s->label()) : 0;
    for (int d = 0; d < dims; ++d) f(i, d) = dirs(c, d) + 0.05 * n(rng);
  }
  return f;
}

/// Writes <root>/<name>/{manifest.json, refs/*.lab, features/*} and returns the manifest.
inline NamedManifest write_fixture_dataset(const std::filesystem::path& root, const std::string& name, int songs,
                                           std::uint64_t seed, bool with_features = true) {
  std::mt19937_64 rng(seed);
  const auto dir = root / name;
  DatasetManifest m;
  m.name = name;
  for (int i = 0; i < songs; ++i) {
    const std::string id = fmt::format("{}_{:02d}", name, i);
    auto ann = random_grid_annotation(rng, id);
    const auto ref = dir / "refs" / (id + ".lab");
    write_file_atomic(ref, write_annotation(ann));
    ManifestEntry e{id, ref, ann.duration(), std::nullopt};
    if (with_features) {
      write_features(dir / "features", id, block_features(rng, ann, 10.0), 10.0);
      e.features = dir / "features" / (id + ".json");
    }
    m.entries.push_back(std::move(e));
  }
  const auto path = dir / "manifest.json";
  write_manifest(m, path);
  return {m, path};
}

/// HookTheory-style section records for `songs` songs, one JSON object per line.
inline std::string fixture_sections_jsonl(int songs, std::uint64_t seed) {
  static const char* kLabels[] = {"Intro", "Verse", "Pre-Chorus", "Chorus", "Bridge", "Solo", "Outro"};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::string out;
  for (int s = 0; s < songs; ++s) {
    const double duration = 60.0 + 180.0 * u(rng);
    double t = 0.0;
    while (true) {
      const double start = t + 10.0 * u(rng);
      const double end = start + 5.0 + 30.0 * u(rng);
      if (end > duration) break;
      nlohmann::ordered_json j;
      j["song_id"] = fmt::format("hk{:03d}", s);
      j["label"] = kLabels[rng() % 7];
      j["start_sec"] = start;
      j["end_sec"] = end;
      j["song_duration_sec"] = duration;
      out += j.dump() + "\n";
      t = end;
    }
  }
  return out;
}

}  // namespace msa::test
