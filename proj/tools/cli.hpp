#pragma once

#include <CLI11.hpp>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "msa/decoding.hpp"
#include "msa/excerpting.hpp"
#include "msa/metrics.hpp"
#include "msa/pipeline.hpp"
#include "msa/targets.hpp"

namespace msa::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitRejects = 2;

/// Every flag of every subcommand, pre-filled with the library defaults.
struct Options {
  std::uint64_t seed = 0;
  double frame_rate = kDefaultFrameRate;
  std::string out_dir = ".";
  std::string log_level = "info";

  struct MapLabels {
    std::string in, out, rejects;
    bool strict = false;
  } map_labels;

  struct MakeExcerpts {
    std::string in, out;
    ExcerptConfig cfg;
    std::vector<double> fixed_pads;
  } make_excerpts;

  struct MakeTargets {
    std::string excerpts, refs, out;
    std::optional<double> rate;
    double ramp = kDefaultRampHalfwidth;
  } make_targets;

  struct Decode {
    std::string pred, out;
    std::optional<double> rate;
    DecodeConfig cfg;
  } decode;

  struct Evaluate {
    std::string refs, est, out = "report.csv";
    EvalConfig cfg;
  } evaluate;

  struct Folds {
    std::vector<std::string> manifests;
    std::string test, out = "plan.json";
    int k = 4;
  } folds;

  struct Run {
    std::string plan, predictor = "oracle", excerpts;
    RunConfig cfg;
  } run;
};

/// Builds the command tree bound to `opts`; dispatch happens after parsing.
std::unique_ptr<CLI::App> build_app(Options& opts);

/// Parses and executes; returns the process exit code.
int run(const std::vector<std::string>& args);

}  // namespace msa::cli
