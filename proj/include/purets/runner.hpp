#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "purets/data.hpp"
#include "purets/metrics.hpp"
#include "purets/model.hpp"
#include "purets/profile.hpp"
#include "purets/train.hpp"

namespace purets {

std::string model_kind_name(ModelKind k);
ModelKind parse_model_kind(const std::string& name);

/// Everything one command needs, assembled by the CLI from flags and an
/// optional key=value config file.
struct RunConfig {
  // Data source. "sine" synthesizes from the sine block; any other name is
  // looked up in the registry unless csv points straight at a file.
  std::string dataset = "sine";
  std::filesystem::path registry = "configs/datasets.json";
  std::filesystem::path csv;
  std::string split;  // policy override, e.g. "6/2/2" or "12/4/4m"
  int rows_per_day = 24;
  SineSpec sine;

  ModelKind kind = ModelKind::PureTS;
  int depth = 1;
  std::vector<Index> hidden;   // interior widths; empty means max(T, horizon)
  Index input_window = 0;      // 0 means: same as horizon
  Index horizon = 96;
  Index channels = 7;          // data-free commands (profile, bench) only
  bool per_channel = false;    // PureTS only: one stack per channel

  TrainConfig train;
  std::uint64_t seed = 0;  // weight init; shuffling derives its own stream
  std::filesystem::path out_dir = "out";
};

/// Loads, splits and normalizes the configured dataset. Unknown registry
/// names fail with "dataset not found: <name>".
SeriesDataset resolve_dataset(const RunConfig& cfg);

/// Model shaped per the config for a dataset with n_features channels.
LinearStack build_model(const RunConfig& cfg, Index n_features);

struct TrainArtifacts {
  MetricReport test_report;
  TrainResult result;  // per-channel runs: the channel 0 result
  std::vector<std::filesystem::path> files;
  std::vector<std::string> warnings;  // dataset quirks worth surfacing
};

/// Trains per config and writes checkpoint.bin, trace.csv, metrics.json
/// (test split) and predictions.csv (first test window) under out_dir.
TrainArtifacts run_train(const RunConfig& cfg);

struct EvalArtifacts {
  MetricReport report;
  std::vector<std::filesystem::path> files;
};

/// Scores a checkpoint on one split of the configured dataset; writes
/// metrics_<split>.json and predictions_<split>.csv under out_dir.
EvalArtifacts run_eval(const RunConfig& cfg,
                       const std::filesystem::path& checkpoint_path,
                       Split split);

struct ProfileArtifacts {
  std::vector<ProfileReport> reports;  // one per horizon, ascending
  std::vector<std::filesystem::path> files;
};

/// Profiles the configured model at horizons {48, 168, 336, 720}: one
/// profile_h<horizon>.json each plus scatter.csv with columns
/// horizon,macs,parameters,mean_latency_s,latency_std_s,mse. The mse column
/// is filled from <metrics_dir>/h<horizon>/metrics.json when present, nan
/// otherwise.
ProfileArtifacts run_profile(const RunConfig& cfg,
                             const std::filesystem::path& metrics_dir = {});

/// Single-configuration latency benchmark; writes bench.json under out_dir.
ProfileReport run_bench(const RunConfig& cfg, Index batch, Index warmup,
                        Index repeats);

struct Figure3Options {
  std::filesystem::path out_dir = "out/figure3";
  Index n_points = 4000;  // sine length; split 6/2/2
  // Short fixed budget on purpose: the sigmoid variant converges more
  // slowly, and its residual wobble is the effect the fifth condition
  // exists to show. Long budgets let it smooth out and hide the contrast.
  Index max_epochs = 4;
  double learning_rate = 1e-3;
  std::uint64_t seed = 0;
};

struct ConditionResult {
  std::string name;
  MetricReport report;  // test split
  TrainResult train;
};

struct Figure3Summary {
  std::vector<ConditionResult> conditions;
  double depth_mse_ratio = 0.0;  // max/min of depth-1 vs depth-2 test MSE
  double fi_linear = 0.0;        // fluctuation index, 2-layer linear
  double fi_sigmoid = 0.0;       // fluctuation index, sigmoid stack
  std::vector<std::filesystem::path> files;
};

/// The five-condition sine study: (1) one-step linear, (2) 64-step two-layer
/// linear, (3) 256-step linear, (4) one-layer vs two-layer at 64 steps,
/// (5) sigmoid-activated at 64 steps. Emits per-condition prediction CSVs,
/// traces, metric files and SVG overlays plus a shared convergence plot and
/// summary.json.
Figure3Summary run_figure3(const Figure3Options& opts);

}  // namespace purets
