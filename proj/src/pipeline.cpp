#include "msa/pipeline.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

#include "msa/error.hpp"
#include "msa/io.hpp"
#include "msa/novelty.hpp"
#include "msa/rng.hpp"
#include "msa/tensor_io.hpp"
#include "msa/version.hpp"

namespace msa {
namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string kind_name(DatasetKind k) { return k == DatasetKind::kFullSong ? "fullsong" : "excerpt"; }

DatasetKind kind_from_name(const std::string& s) {
  if (s == "fullsong") return DatasetKind::kFullSong;
  if (s == "excerpt") return DatasetKind::kExcerpt;
  throw InvalidArgument("unknown dataset kind '" + s + "'");
}

std::string relative_if_below(const fs::path& p, const fs::path& base) {
  auto rel = p.lexically_relative(base);
  if (!rel.empty() && *rel.begin() != "..") return rel.generic_string();
  return p.generic_string();
}

Eigen::MatrixXd read_features_file(const fs::path& sidecar) {
  if (!fs::exists(sidecar)) throw IoError("missing feature file " + sidecar.string());
  return read_features(sidecar.parent_path(), sidecar.stem().string());
}

class OraclePredictor final : public Predictor {
 public:
  OraclePredictor(AnnotationSource refs, double ramp) : refs_(std::move(refs)), ramp_(ramp) {}

  PredictionCurves predict(const SongId& song_id, const FrameGrid& grid) const override {
    const auto ref = refs_(song_id);
    return as_predictions(rasterize(ref, grid, ramp_));
  }

 private:
  AnnotationSource refs_;
  double ramp_;
};

class NoveltyPredictor final : public Predictor {
 public:
  NoveltyPredictor(FeatureSource features, Index halfwidth) : features_(std::move(features)), halfwidth_(halfwidth) {}

  PredictionCurves predict(const SongId& song_id, const FrameGrid& grid) const override {
    const Eigen::MatrixXd f = features_(song_id);
    if (f.rows() != grid.count()) {
      throw ShapeMismatch(fmt::format("{}: features have {} frames, grid has {}", song_id, f.rows(), grid.count()));
    }
    PredictionCurves out;
    out.boundary = checkerboard_novelty(f, halfwidth_);
    out.function = ClassMatrix<double>::Constant(kNumClasses, grid.count(), 1.0 / kNumClasses);
    return out;
  }

 private:
  FeatureSource features_;
  Index halfwidth_;
};

std::string fold_dir_name(int fold) { return fmt::format("fold_{}", fold); }

}  // namespace

void DatasetManifest::validate(bool check_files) const {
  if (name.empty()) throw InvalidArgument("dataset manifest needs a name");
  std::set<SongId> seen;
  for (const auto& e : entries) {
    if (e.song_id.empty()) throw InvalidArgument(name + ": empty song id");
    if (!seen.insert(e.song_id).second) throw InvalidArgument(name + ": duplicate song id " + e.song_id);
    if (!(e.duration > 0.0)) throw RangeError(name + ": non-positive duration for " + e.song_id);
    if (check_files) {
      if (!fs::exists(e.ref)) throw IoError(name + ": missing reference " + e.ref.string());
    }
  }
}

DatasetManifest load_manifest(const fs::path& path) {
  auto j = json::parse(read_file(path), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw IoError("not a JSON manifest: " + path.string());
  const auto base = fs::absolute(path).parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : (base / p).lexically_normal(); };
  DatasetManifest m;
  try {
    m.name = j.at("name").get<std::string>();
    m.kind = kind_from_name(j.value("kind", "fullsong"));
    for (const auto& e : j.at("entries")) {
      ManifestEntry entry;
      entry.song_id = e.at("song_id").get<std::string>();
      entry.ref = resolve(e.at("ref").get<std::string>());
      entry.duration = e.at("duration").get<double>();
      if (e.contains("features")) entry.features = resolve(e.at("features").get<std::string>());
      m.entries.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  m.validate(true);
  return m;
}

void write_manifest(const DatasetManifest& manifest, const fs::path& path) {
  const auto base = fs::absolute(path).parent_path();
  ordered_json j;
  j["name"] = manifest.name;
  j["kind"] = kind_name(manifest.kind);
  j["entries"] = ordered_json::array();
  for (const auto& e : manifest.entries) {
    ordered_json o;
    o["song_id"] = e.song_id;
    o["ref"] = relative_if_below(fs::absolute(e.ref), base);
    o["duration"] = e.duration;
    if (e.features) o["features"] = relative_if_below(fs::absolute(*e.features), base);
    j["entries"].push_back(std::move(o));
  }
  write_file_atomic(path, j.dump(2) + "\n");
}

SplitPlan make_folds(const NamedManifest& primary, int k, std::uint64_t seed,
                     const std::vector<NamedManifest>& auxiliary) {
  if (k < 2) throw InvalidArgument("k must be at least 2");
  const auto& entries = primary.manifest.entries;
  if (entries.empty() || entries.size() < static_cast<std::size_t>(k)) {
    throw TooFewSongs(fmt::format("{} has {} songs, fewer than k = {}", primary.manifest.name, entries.size(), k));
  }
  SplitPlan plan;
  plan.mode = SplitMode::kKFold;
  plan.k = k;
  plan.seed = seed;
  plan.primary = primary.manifest.name;
  plan.manifests[primary.manifest.name] = primary.path;

  std::vector<std::pair<std::uint64_t, SongId>> keyed;
  for (const auto& e : entries) keyed.emplace_back(derive_stream(seed, e.song_id, 0).next(), e.song_id);
  std::sort(keyed.begin(), keyed.end());
  for (std::size_t rank = 0; rank < keyed.size(); ++rank) {
    plan.assignments[keyed[rank].second] = static_cast<int>(rank % static_cast<std::size_t>(k));
  }
  for (const auto& aux : auxiliary) {
    if (plan.manifests.count(aux.manifest.name)) throw InvalidArgument("duplicate dataset " + aux.manifest.name);
    plan.extra_train.push_back(aux.manifest.name);
    plan.manifests[aux.manifest.name] = aux.path;
  }
  return plan;
}

SplitPlan make_cross_dataset(const std::string& test_name, const std::vector<NamedManifest>& all) {
  SplitPlan plan;
  plan.mode = SplitMode::kCrossDataset;
  plan.k = 1;
  plan.primary = test_name;
  bool found = false;
  for (const auto& m : all) {
    if (plan.manifests.count(m.manifest.name)) throw InvalidArgument("duplicate dataset " + m.manifest.name);
    plan.manifests[m.manifest.name] = m.path;
    if (m.manifest.name == test_name) {
      found = true;
    } else {
      plan.extra_train.push_back(m.manifest.name);
    }
  }
  if (!found) throw UnknownDataset(test_name);
  return plan;
}

std::string plan_to_json(const SplitPlan& plan) {
  ordered_json j;
  j["mode"] = plan.mode == SplitMode::kKFold ? "kfold" : "cross-dataset";
  j["k"] = plan.k;
  j["seed"] = plan.seed;
  j["primary"] = plan.primary;
  j["extra_train"] = plan.extra_train;
  ordered_json manifests = ordered_json::object();
  for (const auto& [name, path] : plan.manifests) manifests[name] = path.generic_string();
  j["manifests"] = manifests;
  ordered_json assignments = ordered_json::object();
  for (const auto& [song, fold] : plan.assignments) assignments[song] = fold;
  j["assignments"] = assignments;
  return j.dump(2) + "\n";
}

SplitPlan plan_from_json(const std::string& text) {
  auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw IoError("plan is not a JSON object");
  SplitPlan plan;
  try {
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "kfold") {
      plan.mode = SplitMode::kKFold;
    } else if (mode == "cross-dataset") {
      plan.mode = SplitMode::kCrossDataset;
    } else {
      throw InvalidArgument("unknown plan mode '" + mode + "'");
    }
    plan.k = j.at("k").get<int>();
    plan.seed = j.at("seed").get<std::uint64_t>();
    plan.primary = j.at("primary").get<std::string>();
    plan.extra_train = j.at("extra_train").get<std::vector<std::string>>();
    for (const auto& [name, path] : j.at("manifests").items()) plan.manifests[name] = path.get<std::string>();
    for (const auto& [song, fold] : j.at("assignments").items()) plan.assignments[song] = fold.get<int>();
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed plan: ") + e.what());
  }
  return plan;
}

FoldView fold_view(const SplitPlan& plan, int fold, const std::map<std::string, DatasetManifest>& manifests) {
  auto find = [&](const std::string& name) -> const DatasetManifest& {
    auto it = manifests.find(name);
    if (it == manifests.end()) throw UnknownDataset(name);
    return it->second;
  };
  FoldView view;
  const auto& primary = find(plan.primary);
  for (const auto& e : primary.entries) {
    bool is_test = true;
    if (plan.mode == SplitMode::kKFold) {
      auto it = plan.assignments.find(e.song_id);
      if (it == plan.assignments.end()) throw InvalidArgument("song without fold assignment: " + e.song_id);
      is_test = it->second == fold;
    }
    (is_test ? view.test : view.train).emplace_back(primary.name, e);
  }
  for (const auto& name : plan.extra_train) {
    for (const auto& e : find(name).entries) view.train.emplace_back(name, e);
  }
  return view;
}

std::unique_ptr<Predictor> oracle_predictor(AnnotationSource refs, double ramp_halfwidth) {
  return std::make_unique<OraclePredictor>(std::move(refs), ramp_halfwidth);
}

std::unique_ptr<Predictor> oracle_predictor(const Annotation& ref, double ramp_halfwidth) {
  return oracle_predictor([ref](const SongId&) { return ref; }, ramp_halfwidth);
}

std::unique_ptr<Predictor> novelty_predictor(FeatureSource features, Index kernel_halfwidth) {
  return std::make_unique<NoveltyPredictor>(std::move(features), kernel_halfwidth);
}

std::unique_ptr<Predictor> novelty_predictor(Eigen::MatrixXd features, Index kernel_halfwidth) {
  return novelty_predictor([f = std::move(features)](const SongId&) { return f; }, kernel_halfwidth);
}

std::string training_manifest_jsonl(const FoldView& view, const RunConfig& cfg) {
  std::string out;
  for (const auto& [dataset, e] : view.train) {
    ordered_json j;
    j["dataset"] = dataset;
    j["song_id"] = e.song_id;
    j["kind"] = "fullsong";
    j["ref"] = e.ref.generic_string();
    j["duration"] = e.duration;
    out += j.dump() + "\n";
  }
  if (cfg.with_excerpts) {
    if (!cfg.excerpts) throw InvalidArgument("--with-excerpts needs an excerpts file");
    std::istringstream in(read_file(*cfg.excerpts));
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      auto src = ordered_json::parse(line, nullptr, false);
      if (src.is_discarded() || !src.is_object()) throw SchemaError(line_no, "excerpt line is not a JSON object");
      ordered_json j;
      j["dataset"] = cfg.excerpt_dataset;
      j["song_id"] = fmt::format("{}.{}", src.value("song_id", ""), src.value("source_index", std::size_t{0}));
      j["kind"] = "excerpt";
      for (const auto& [key, value] : src.items()) {
        if (key != "song_id") j[key] = value;
      }
      j["source_song_id"] = src.value("song_id", "");
      out += j.dump() + "\n";
    }
  }
  return out;
}

RunResult run_experiment(const SplitPlan& plan, const RunConfig& cfg, const fs::path& out_dir) {
  std::map<std::string, DatasetManifest> manifests;
  for (const auto& [name, path] : plan.manifests) {
    auto m = load_manifest(path);
    if (m.name != name) throw InvalidArgument(fmt::format("plan names dataset '{}' but {} declares '{}'", name, path.string(), m.name));
    manifests.emplace(name, std::move(m));
  }

  std::ostringstream log;
  log << "msakit " << kVersion << "\n";
  log << "plan.mode=" << (plan.mode == SplitMode::kKFold ? "kfold" : "cross-dataset") << " k=" << plan.k
      << " seed=" << plan.seed << " primary=" << plan.primary << "\n";
  log << "predictor=" << (cfg.predictor == PredictorKind::kOracle ? "oracle" : "novelty")
      << fmt::format(" frame_rate={} ramp={} novelty_halfwidth={}", cfg.frame_rate, cfg.ramp_halfwidth,
                     cfg.novelty_halfwidth)
      << fmt::format(" threshold={} min_gap={} median_window={}", cfg.decode.peak_threshold, cfg.decode.min_gap,
                     cfg.decode.median_window)
      << fmt::format(" window={} frame={} trim={} with_excerpts={}\n", cfg.eval.window, cfg.eval.frame,
                     cfg.eval.trim, cfg.with_excerpts);

  RunResult result;
  std::vector<EvalPair> pooled;
  for (int fold = 0; fold < plan.fold_count(); ++fold) {
    const auto view = fold_view(plan, fold, manifests);
    const auto dir = out_dir / fold_dir_name(fold);
    write_file_atomic(dir / "train_manifest.jsonl", training_manifest_jsonl(view, cfg));

    std::map<SongId, const ManifestEntry*> by_id;
    for (const auto& [dataset, e] : view.test) by_id[e.song_id] = &e;
    auto load_ref = [&](const SongId& id) {
      const auto* e = by_id.at(id);
      ParseOptions opts;
      opts.duration = e->duration;
      auto ann = parse_reference_file(e->ref.string(), opts);
      return Annotation(id, ann.duration(), {ann.segments().begin(), ann.segments().end()});
    };
    std::unique_ptr<Predictor> predictor;
    if (cfg.predictor == PredictorKind::kOracle) {
      predictor = oracle_predictor(load_ref, cfg.ramp_halfwidth);
    } else {
      predictor = novelty_predictor(
          [&](const SongId& id) -> Eigen::MatrixXd {
            const auto* e = by_id.at(id);
            if (!e->features) throw IoError(id + ": manifest entry has no features");
            return read_features_file(*e->features);
          },
          cfg.novelty_halfwidth);
    }

    std::vector<EvalPair> pairs;
    for (const auto& [dataset, e] : view.test) {
      std::optional<Annotation> ref;
      try {
        ref = load_ref(e.song_id);
      } catch (const Error& err) {
        log << fmt::format("fold {} song {}: reference error: {}\n", fold, e.song_id, err.what());
        continue;
      }
      EvalPair pair{*ref, std::nullopt};
      try {
        const auto grid = FrameGrid::for_duration(ref->duration(), cfg.frame_rate);
        auto est = decode(predictor->predict(e.song_id, grid), grid, ref->duration(), cfg.decode, e.song_id);
        write_file_atomic(dir / "est" / (e.song_id + ".lab"), write_annotation(est));
        pair.est = std::move(est);
      } catch (const Error& err) {
        pair.error = err.what();
        log << fmt::format("fold {} song {}: {}\n", fold, e.song_id, err.what());
      }
      pairs.push_back(pair);
      pooled.push_back(std::move(pair));
    }
    auto report = evaluate_corpus(pairs, cfg.eval);
    write_file_atomic(dir / "report.csv", report_csv(report));
    write_file_atomic(dir / "summary.json", report_summary_json(report, cfg.eval));
    log << fmt::format("fold {}: {} test songs, {} evaluated, {} warnings\n", fold, view.test.size(),
                       report.rows.size(), report.warnings());
    result.folds.push_back(std::move(report));
  }
  result.pooled = evaluate_corpus(pooled, cfg.eval);
  write_file_atomic(out_dir / "pooled" / "report.csv", report_csv(result.pooled));
  write_file_atomic(out_dir / "pooled" / "summary.json", report_summary_json(result.pooled, cfg.eval));
  write_file_atomic(out_dir / "plan.json", plan_to_json(plan));
  write_file_atomic(out_dir / "run.log", log.str());
  return result;
}

}  // namespace msa
