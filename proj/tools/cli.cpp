#include "cli.hpp"

#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "msa/annotation.hpp"
#include "msa/error.hpp"
#include "msa/io.hpp"
#include "msa/tensor_io.hpp"
#include "msa/version.hpp"

namespace msa::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::shared_ptr<spdlog::logger> logger() {
  static auto log = [] {
    auto l = spdlog::stderr_color_mt("msakit");
    l->set_pattern("[%l] %v");
    return l;
  }();
  return log;
}

fs::path parent_or_cwd(const fs::path& p) { return p.has_parent_path() ? p.parent_path() : fs::path("."); }

void echo_config(const fs::path& dir, const std::string& command, const Options& o, ordered_json args) {
  ordered_json j;
  j["toolkit"] = "msakit";
  j["version"] = kVersion;
  j["command"] = command;
  j["global"] = {{"seed", o.seed}, {"frame_rate", o.frame_rate}, {"out_dir", o.out_dir}, {"log_level", o.log_level}};
  j["args"] = std::move(args);
  write_file_atomic(dir / (command + ".config.json"), j.dump(2) + "\n");
}

std::vector<SectionRecord> read_records(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  return parse_section_records(in);
}

int cmd_map_labels(const Options& o) {
  const auto& a = o.map_labels;
  const auto records = read_records(a.in);
  std::string mapped;
  std::size_t rejected = 0;
  std::map<std::string, std::size_t> by_label;
  std::vector<std::size_t> reject_indices;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    auto f = try_map_label(r.raw_label);
    if (!f) {
      ++rejected;
      ++by_label[r.raw_label.text()];
      reject_indices.push_back(i);
      continue;
    }
    ordered_json j;
    j["song_id"] = r.song_id;
    j["label"] = r.raw_label.text();
    j["class_name"] = class_name(*f);
    j["start_sec"] = r.start;
    j["end_sec"] = r.end;
    j["song_duration_sec"] = r.song_duration;
    mapped += j.dump() + "\n";
  }
  write_file_atomic(a.out, mapped);
  ordered_json report;
  report["records"] = records.size();
  report["accepted"] = records.size() - rejected;
  report["rejected"] = rejected;
  report["rejected_labels"] = by_label;
  report["rejected_records"] = reject_indices;
  const fs::path rejects = a.rejects.empty() ? fs::path(a.out + ".rejects.json") : fs::path(a.rejects);
  write_file_atomic(rejects, report.dump(2) + "\n");
  echo_config(parent_or_cwd(a.out), "map-labels", o,
              {{"in", a.in}, {"out", a.out}, {"rejects", rejects.string()}, {"strict", a.strict}});
  std::cout << fmt::format("mapped {} records, rejected {}\n", records.size() - rejected, rejected);
  for (const auto& [label, n] : by_label) logger()->warn("unknown label '{}' x{}", label, n);
  return rejected > 0 && a.strict ? kExitRejects : kExitOk;
}

int cmd_make_excerpts(const Options& o) {
  const auto& a = o.make_excerpts;
  ExcerptConfig cfg = a.cfg;
  cfg.seed = o.seed;
  std::optional<PaddingDraw> fixed;
  if (!a.fixed_pads.empty()) {
    if (a.fixed_pads.size() != 2) throw InvalidArgument("--fixed-pads takes FRONT REAR");
    fixed = PaddingDraw{a.fixed_pads[0], a.fixed_pads[1]};
  }
  const auto corpus = generate_corpus(read_records(a.in), cfg, fixed);
  write_file_atomic(a.out, write_excerpts_jsonl(corpus));
  ordered_json args = {{"in", a.in},
                       {"out", a.out},
                       {"pad_min", cfg.pad_min},
                       {"pad_max", cfg.pad_max},
                       {"min_dur", cfg.min_duration},
                       {"integer_pads", cfg.integer_pads}};
  if (fixed) args["fixed_pads"] = a.fixed_pads;
  echo_config(parent_or_cwd(a.out), "make-excerpts", o, std::move(args));
  std::cout << fmt::format("wrote {} excerpts, rejected {}\n", corpus.items.size(), corpus.rejected);
  return kExitOk;
}

int cmd_make_targets(const Options& o) {
  const auto& a = o.make_targets;
  const double rate = a.rate.value_or(o.frame_rate);
  if (!(rate > 0.0)) throw InvalidArgument(fmt::format("frame rate must be positive, got {}", rate));
  if (a.excerpts.empty() == a.refs.empty()) throw InvalidArgument("give exactly one of --excerpts or --refs");

  std::vector<std::pair<std::string, std::pair<std::vector<Segment>, double>>> items;
  if (!a.excerpts.empty()) {
    std::ifstream in(a.excerpts);
    if (!in) throw IoError("cannot open " + a.excerpts);
    for (const auto& p : read_excerpts_jsonl(in)) {
      items.push_back({p.song_id(), {{p.labeled().begin(), p.labeled().end()}, p.duration()}});
    }
  } else {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(a.refs)) {
      if (e.is_regular_file() && e.path().extension() == ".lab") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      auto ann = parse_reference_file(f.string());
      items.push_back({f.stem().string(), {{ann.segments().begin(), ann.segments().end()}, ann.duration()}});
    }
  }
  std::size_t total_masked = 0;
  for (const auto& [id, content] : items) {
    const auto& [segments, duration] = content;
    const auto grid = FrameGrid::for_duration(duration, rate);
    const auto t = rasterize(segments, duration, grid, a.ramp);
    write_target_tensor(a.out, id, t, grid, duration);
    const auto masked = static_cast<std::size_t>((t.function_mask != 0).count());
    total_masked += masked;
    std::cout << fmt::format("{} frames={} masked_frames={}\n", id, grid.count(), masked);
  }
  std::cout << fmt::format("wrote {} tensors, {} masked frames\n", items.size(), total_masked);
  echo_config(a.out, "make-targets", o,
              {{"excerpts", a.excerpts}, {"refs", a.refs}, {"rate", rate}, {"ramp", a.ramp}, {"out", a.out}});
  return kExitOk;
}

int cmd_decode(const Options& o) {
  const auto& a = o.decode;
  std::size_t written = 0;
  for (const auto& id : list_tensor_ids(a.pred)) {
    const auto m = read_raw_matrix(a.pred, id);
    if (a.rate && std::abs(*a.rate - m.rate) > 1e-12) {
      throw GridMismatch(fmt::format("{}: tensor rate {} differs from --rate {}", id, m.rate, *a.rate));
    }
    const FrameGrid grid(m.rate, m.data.cols());
    const double duration = m.duration.value_or(grid.span());
    const auto pred = read_prediction_curves(a.pred, id);
    const auto est = decode(pred, grid, duration, a.cfg, id);
    write_file_atomic(fs::path(a.out) / (id + ".lab"), write_annotation(est));
    ++written;
  }
  echo_config(a.out, "decode", o,
              {{"pred", a.pred},
               {"out", a.out},
               {"threshold", a.cfg.peak_threshold},
               {"min_gap", a.cfg.min_gap},
               {"median", a.cfg.median_window}});
  std::cout << fmt::format("decoded {} songs\n", written);
  return kExitOk;
}

int cmd_evaluate(const Options& o) {
  const auto& a = o.evaluate;
  std::vector<fs::path> refs;
  for (const auto& e : fs::directory_iterator(a.refs)) {
    if (e.is_regular_file() && e.path().extension() == ".lab") refs.push_back(e.path());
  }
  std::sort(refs.begin(), refs.end());
  std::vector<EvalPair> pairs;
  for (const auto& r : refs) {
    EvalPair p{parse_reference_file(r.string()), std::nullopt};
    const auto est_path = fs::path(a.est) / r.filename();
    if (fs::exists(est_path)) {
      try {
        p.est = parse_reference_file(est_path.string());
      } catch (const Error& e) {
        p.error = e.what();
      }
    }
    pairs.push_back(std::move(p));
  }
  const auto report = evaluate_corpus(pairs, a.cfg);
  write_file_atomic(a.out, report_csv(report));
  write_file_atomic(parent_or_cwd(a.out) / "summary.json", report_summary_json(report, a.cfg));
  for (const auto& id : report.missing) logger()->warn("missing estimate for {}", id);
  for (const auto& [id, why] : report.failures) logger()->warn("could not evaluate {}: {}", id, why);
  echo_config(parent_or_cwd(a.out), "evaluate", o,
              {{"refs", a.refs},
               {"est", a.est},
               {"window", a.cfg.window},
               {"frame", a.cfg.frame},
               {"trim", a.cfg.trim},
               {"duration_weighted", a.cfg.duration_weighted},
               {"out", a.out}});
  std::cout << fmt::format("songs={} hr5f={:.4f} acc={:.4f} chr5f={:.4f} cf1={:.4f} warnings={}\n", report.rows.size(),
                           report.mean.hr5f, report.mean.acc, report.mean.chr5f, report.mean.cf1, report.warnings());
  return kExitOk;
}

int cmd_folds(const Options& o) {
  const auto& a = o.folds;
  if (a.manifests.empty()) throw InvalidArgument("folds needs at least one --manifest");
  std::vector<NamedManifest> all;
  for (const auto& p : a.manifests) all.push_back({load_manifest(p), fs::absolute(p).lexically_normal()});
  SplitPlan plan;
  if (!a.test.empty()) {
    plan = make_cross_dataset(a.test, all);
  } else {
    std::vector<NamedManifest> aux(all.begin() + 1, all.end());
    plan = make_folds(all.front(), a.k, o.seed, aux);
  }
  write_file_atomic(a.out, plan_to_json(plan));
  echo_config(parent_or_cwd(a.out), "folds", o, {{"manifests", a.manifests}, {"test", a.test}, {"k", a.k}, {"out", a.out}});
  std::cout << fmt::format("wrote plan with {} fold(s) to {}\n", plan.fold_count(), a.out);
  return kExitOk;
}

int cmd_run(const Options& o) {
  const auto& a = o.run;
  RunConfig cfg = a.cfg;
  cfg.frame_rate = o.frame_rate;
  if (a.predictor == "oracle") {
    cfg.predictor = PredictorKind::kOracle;
  } else if (a.predictor == "novelty") {
    cfg.predictor = PredictorKind::kNovelty;
  } else {
    throw InvalidArgument("unknown predictor " + a.predictor);
  }
  if (!a.excerpts.empty()) cfg.excerpts = a.excerpts;
  const auto plan = plan_from_json(read_file(a.plan));
  const auto result = run_experiment(plan, cfg, o.out_dir);
  echo_config(o.out_dir, "run", o,
              {{"plan", a.plan},
               {"predictor", a.predictor},
               {"with_excerpts", cfg.with_excerpts},
               {"excerpts", a.excerpts},
               {"ramp", cfg.ramp_halfwidth},
               {"novelty_halfwidth", cfg.novelty_halfwidth},
               {"threshold", cfg.decode.peak_threshold},
               {"min_gap", cfg.decode.min_gap},
               {"median", cfg.decode.median_window},
               {"window", cfg.eval.window},
               {"frame", cfg.eval.frame},
               {"trim", cfg.eval.trim}});
  const auto& m = result.pooled.mean;
  std::cout << fmt::format("pooled songs={} hr5f={:.4f} acc={:.4f} chr5f={:.4f} cf1={:.4f} warnings={}\n",
                           result.pooled.rows.size(), m.hr5f, m.acc, m.chr5f, m.cf1, result.pooled.warnings());
  return kExitOk;
}

void add_decode_flags(CLI::App* sub, DecodeConfig& cfg) {
  sub->add_option("--threshold", cfg.peak_threshold, "Peak threshold on the smoothed boundary curve");
  sub->add_option("--min-gap", cfg.min_gap, "Minimum seconds between kept boundaries");
  sub->add_option("--median", cfg.median_window, "Median filter window in seconds");
}

void add_eval_flags(CLI::App* sub, EvalConfig& cfg) {
  sub->add_option("--window", cfg.window, "Hit-rate window in seconds");
  sub->add_option("--frame", cfg.frame, "Frame size in seconds for ACC and CF1");
  sub->add_flag("--trim", cfg.trim, "Drop first and last boundary before hit rates");
  sub->add_flag("--duration-weighted", cfg.duration_weighted, "Weight means by song duration");
}

}  // namespace

std::unique_ptr<CLI::App> build_app(Options& o) {
  auto app = std::make_unique<CLI::App>("Corpus preparation and evaluation for music structure analysis", "msakit");
  app->option_defaults()->always_capture_default();
  app->require_subcommand(1);
  app->set_version_flag("--version", kVersion);
  app->add_option("--seed", o.seed, "Seed for every random draw");
  app->add_option("--frame-rate", o.frame_rate, "Frames per second")->check(CLI::PositiveNumber);
  app->add_option("--out-dir", o.out_dir, "Output directory for run");
  app->add_option("--log-level", o.log_level, "trace, debug, info, warn, error or off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "off"}));

  auto* ml = app->add_subcommand("map-labels", "Map section labels onto the 7 structural classes");
  ml->add_option("--in", o.map_labels.in, "sections.jsonl")->required();
  ml->add_option("--out", o.map_labels.out, "mapped.jsonl")->required();
  ml->add_option("--rejects", o.map_labels.rejects, "Rejection report (default <out>.rejects.json)");
  ml->add_flag("--strict", o.map_labels.strict, "Exit 2 when any label is rejected");

  auto* me = app->add_subcommand("make-excerpts", "Sample padded excerpts around each section");
  me->add_option("--in", o.make_excerpts.in, "mapped.jsonl or sections.jsonl")->required();
  me->add_option("--out", o.make_excerpts.out, "excerpts.jsonl")->required();
  me->add_option("--pad-min", o.make_excerpts.cfg.pad_min, "Minimum context padding (s)");
  me->add_option("--pad-max", o.make_excerpts.cfg.pad_max, "Maximum context padding (s)");
  me->add_option("--min-dur", o.make_excerpts.cfg.min_duration, "Minimum excerpt duration (s)");
  me->add_flag("--integer-pads", o.make_excerpts.cfg.integer_pads, "Draw whole-second paddings");
  me->add_option("--fixed-pads", o.make_excerpts.fixed_pads, "Test hook: FRONT REAR paddings for every record")
      ->expected(2);

  auto* mt = app->add_subcommand("make-targets", "Rasterize annotations into target tensors");
  mt->add_option("--excerpts", o.make_targets.excerpts, "excerpts.jsonl");
  mt->add_option("--refs", o.make_targets.refs, "Directory of .lab references");
  mt->add_option("--rate", o.make_targets.rate, "Frame rate (default: --frame-rate)");
  mt->add_option("--ramp", o.make_targets.ramp, "Boundary pulse half-width (s)");
  mt->add_option("--out", o.make_targets.out, "Output directory")->required();

  auto* dc = app->add_subcommand("decode", "Decode prediction tensors into .lab estimates");
  dc->add_option("--pred", o.decode.pred, "Directory of prediction tensors")->required();
  dc->add_option("--rate", o.decode.rate, "Expected frame rate (default: from sidecar)");
  add_decode_flags(dc, o.decode.cfg);
  dc->add_option("--out", o.decode.out, "Output directory for .lab files")->required();

  auto* ev = app->add_subcommand("evaluate", "Score estimates against references");
  ev->add_option("--refs", o.evaluate.refs, "Directory of reference .lab files")->required();
  ev->add_option("--est", o.evaluate.est, "Directory of estimated .lab files")->required();
  add_eval_flags(ev, o.evaluate.cfg);
  ev->add_option("--out", o.evaluate.out, "Per-song CSV; summary.json is written next to it");

  auto* fo = app->add_subcommand("folds", "Write a k-fold or cross-dataset split plan");
  fo->add_option("--manifest", o.folds.manifests, "Dataset manifests; the first is folded, the rest train-only")
      ->required();
  fo->add_option("--k", o.folds.k, "Number of folds")->check(CLI::Range(2, 1000));
  fo->add_option("--test", o.folds.test, "Cross-dataset mode: name of the held-out dataset");
  fo->add_option("--out", o.folds.out, "plan.json");

  auto* ru = app->add_subcommand("run", "Predict, decode and evaluate every fold of a plan");
  ru->add_option("--plan", o.run.plan, "plan.json")->required();
  ru->add_option("--predictor", o.run.predictor, "oracle or novelty")->check(CLI::IsMember({"oracle", "novelty"}));
  ru->add_flag("--with-excerpts", o.run.cfg.with_excerpts, "Append excerpt entries to training manifests");
  ru->add_option("--excerpts", o.run.excerpts, "excerpts.jsonl for --with-excerpts");
  ru->add_option("--ramp", o.run.cfg.ramp_halfwidth, "Oracle boundary pulse half-width (s)");
  ru->add_option("--novelty-halfwidth", o.run.cfg.novelty_halfwidth, "Checkerboard kernel half-width (frames)");
  add_decode_flags(ru, o.run.cfg.decode);
  add_eval_flags(ru, o.run.cfg.eval);

  for (auto* sub : app->get_subcommands({})) sub->fallthrough();
  return app;
}

int run(const std::vector<std::string>& args) {
  Options o;
  auto app = build_app(o);
  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app->parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app->exit(e);
    return code == 0 ? kExitOk : kExitError;
  }
  logger()->set_level(spdlog::level::from_str(o.log_level));
  try {
    if (app->got_subcommand("map-labels")) return cmd_map_labels(o);
    if (app->got_subcommand("make-excerpts")) return cmd_make_excerpts(o);
    if (app->got_subcommand("make-targets")) return cmd_make_targets(o);
    if (app->got_subcommand("decode")) return cmd_decode(o);
    if (app->got_subcommand("evaluate")) return cmd_evaluate(o);
    if (app->got_subcommand("folds")) return cmd_folds(o);
    if (app->got_subcommand("run")) return cmd_run(o);
  } catch (const std::exception& e) {
    logger()->error("{}", e.what());
    return kExitError;
  }
  return kExitError;
}

}  // namespace msa::cli
