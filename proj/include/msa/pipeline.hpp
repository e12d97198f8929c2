#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msa/annotation.hpp"
#include "msa/decoding.hpp"
#include "msa/metrics.hpp"
#include "msa/targets.hpp"

namespace msa {

namespace fs = std::filesystem;

enum class DatasetKind { kFullSong, kExcerpt };

struct ManifestEntry {
  SongId song_id;
  fs::path ref;
  double duration = 0.0;
  std::optional<fs::path> features;
};

/// A named dataset. Paths are absolute once loaded (relative entries resolve
/// against the manifest's directory).
struct DatasetManifest {
  std::string name;
  DatasetKind kind = DatasetKind::kFullSong;
  std::vector<ManifestEntry> entries;

  /// Unique ids, positive durations and, if check_files, existing ref/feature files.
  void validate(bool check_files = true) const;
};

DatasetManifest load_manifest(const fs::path& path);
/// Paths are written relative to the manifest file when they sit beneath it.
void write_manifest(const DatasetManifest& manifest, const fs::path& path);

enum class SplitMode { kKFold, kCrossDataset };

struct SplitPlan {
  SplitMode mode = SplitMode::kKFold;
  int k = 4;
  std::uint64_t seed = 0;
  /// k-fold: the dataset being folded. Cross-dataset: the test dataset.
  std::string primary;
  /// k-fold only: song_id -> fold index.
  std::map<SongId, int> assignments;
  /// Datasets always fully in training.
  std::vector<std::string> extra_train;
  /// Dataset name -> manifest path, for every dataset the plan references.
  std::map<std::string, fs::path> manifests;

  int fold_count() const noexcept { return mode == SplitMode::kKFold ? k : 1; }
};

struct NamedManifest {
  DatasetManifest manifest;
  fs::path path;
};

/// Seeded-hash fold assignment; fold sizes differ by at most one.
SplitPlan make_folds(const NamedManifest& primary, int k, std::uint64_t seed,
                     const std::vector<NamedManifest>& auxiliary = {});

/// One dataset held out as the test set, every other dataset in training.
SplitPlan make_cross_dataset(const std::string& test_name, const std::vector<NamedManifest>& all);

std::string plan_to_json(const SplitPlan& plan);
SplitPlan plan_from_json(const std::string& text);

/// Training/test song lists of one fold.
struct FoldView {
  std::vector<std::pair<std::string, ManifestEntry>> train;
  std::vector<std::pair<std::string, ManifestEntry>> test;
};
FoldView fold_view(const SplitPlan& plan, int fold, const std::map<std::string, DatasetManifest>& manifests);

/// The network slot: per-frame boundary and class likelihoods for a song.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual PredictionCurves predict(const SongId& song_id, const FrameGrid& grid) const = 0;
};

using AnnotationSource = std::function<Annotation(const SongId&)>;
using FeatureSource = std::function<Eigen::MatrixXd(const SongId&)>;

/// Ground-truth targets served as predictions.
std::unique_ptr<Predictor> oracle_predictor(AnnotationSource refs, double ramp_halfwidth = kDefaultRampHalfwidth);
std::unique_ptr<Predictor> oracle_predictor(const Annotation& ref, double ramp_halfwidth = kDefaultRampHalfwidth);

inline constexpr Index kDefaultNoveltyHalfwidth = 16;

/// Checkerboard novelty as boundary curve, uniform 1/7 class curves.
std::unique_ptr<Predictor> novelty_predictor(FeatureSource features, Index kernel_halfwidth = kDefaultNoveltyHalfwidth);
std::unique_ptr<Predictor> novelty_predictor(Eigen::MatrixXd features, Index kernel_halfwidth = kDefaultNoveltyHalfwidth);

enum class PredictorKind { kOracle, kNovelty };

struct RunConfig {
  PredictorKind predictor = PredictorKind::kOracle;
  double frame_rate = kDefaultFrameRate;
  double ramp_halfwidth = kDefaultRampHalfwidth;
  Index novelty_halfwidth = kDefaultNoveltyHalfwidth;
  DecodeConfig decode;
  EvalConfig eval;
  bool with_excerpts = false;
  std::optional<fs::path> excerpts;
  std::string excerpt_dataset = "hooktheory-excerpts";
};

struct RunResult {
  std::vector<EvalReport> folds;
  EvalReport pooled;
};

/// JSON lines of a fold's training set, excerpt entries appended when enabled.
std::string training_manifest_jsonl(const FoldView& view, const RunConfig& cfg);

/// Predict, decode and evaluate every test song of every fold; writes
/// fold_<i>/{report.csv,summary.json,train_manifest.jsonl}, pooled/ and run.log.
/// Failures are isolated per song.
RunResult run_experiment(const SplitPlan& plan, const RunConfig& cfg, const fs::path& out_dir);

}  // namespace msa
