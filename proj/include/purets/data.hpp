#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "purets/tensor.hpp"

namespace purets {

enum class Split { Train, Val, Test };

const char* split_name(Split s);
Split parse_split(const std::string& name);  // "train" | "val" | "test"

/// Declares how a CSV maps to channels. An empty value_columns list means
/// "every column after the date column" (or every column when has_date_column
/// is false).
struct CsvSchema {
  bool has_date_column = true;
  std::vector<std::string> value_columns;
};

/// Chronological split boundaries, either integer ratio parts (e.g. 7/1/2)
/// or calendar months at 30 days/month. The months policy truncates the
/// series after train+val+test months.
struct SplitPolicy {
  enum class Kind { Fractions, Months };
  Kind kind = Kind::Fractions;
  int train_part = 7, val_part = 1, test_part = 2;
  int rows_per_day = 24;  // months only

  static SplitPolicy fractions(int train, int val, int test);
  static SplitPolicy months(int train, int val, int test, int rows_per_day);

  /// "7/1/2", "6/2/2" (fraction parts) or "12/4/4m" (months).
  static SplitPolicy parse(const std::string& text, int rows_per_day = 24);
  std::string str() const;
};

/// A loaded multivariate series. After split_and_normalize, `values` holds
/// per-channel z-scores computed from train-split statistics only and the
/// split boundaries are set.
struct SeriesDataset {
  std::string name;
  Matrix values;  // time x n_features
  std::vector<std::string> timestamps;
  std::vector<std::string> channel_names;
  Vector channel_means;
  Vector channel_stds;
  Index train_end = 0;
  Index val_end = 0;
  bool normalized = false;
  std::vector<std::string> warnings;

  Index length() const { return values.rows(); }
  Index n_features() const { return values.cols(); }

  /// [begin, end) row range of a split.
  std::pair<Index, Index> split_range(Split s) const;

  /// Maps z-scores back to the raw scale.
  Matrix denormalize(const Matrix& z) const;
};

/// Parses a comma-separated file: first row header, optional leading date
/// column, remaining columns numeric. Returns the raw (unnormalized) series.
SeriesDataset load_csv(const std::filesystem::path& path,
                       const CsvSchema& schema);

/// Sets split bounds per the policy, computes per-channel mean/std on the
/// train rows, and stores standardized values. Zero-variance channels get
/// std 1 and a warning.
SeriesDataset split_and_normalize(SeriesDataset ds, const SplitPolicy& policy);

/// Copy of channel j as a single-channel dataset with the same split bounds
/// and normalization state.
SeriesDataset select_channel(const SeriesDataset& ds, Index j);

struct WindowBatch {
  Tensor3 inputs;   // B x T x N
  Tensor3 targets;  // B x T' x N, rows immediately following the input rows
};

/// Sliding (input, target) windows over one split; no window crosses the
/// split boundary. Window k covers rows [start(k), start(k)+T+T').
class WindowSet {
 public:
  WindowSet(const SeriesDataset& ds, Split split, Index input_window,
            Index horizon, Index stride = 1);

  Index count() const { return count_; }
  Index start_row(Index k) const { return begin_ + k * stride_; }
  Index input_window() const { return input_window_; }
  Index horizon() const { return horizon_; }

  WindowBatch make_batch(std::span<const Index> windows) const;
  WindowBatch all() const;

 private:
  const SeriesDataset* ds_;
  Index begin_ = 0;
  Index input_window_ = 0, horizon_ = 0, stride_ = 1;
  Index count_ = 0;
};

WindowSet make_windows(const SeriesDataset& ds, Split split,
                       Index input_window, Index horizon, Index stride = 1);

/// Synthetic single-channel trigonometric series:
/// x_i = amplitude * sin(phase + i*step) + noise, noise ~ N(0, noise_std^2)
/// drawn from the seeded source.
struct SineSpec {
  Index n_points = 1000;
  double step = 0.1;
  double amplitude = 1.0;
  double phase = 0.0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;
};

SeriesDataset generate_sine(const SineSpec& spec);

/// Dataset registry: JSON object mapping name -> {path, has_date, split,
/// rows_per_day, value_columns?}.
struct RegistryEntry {
  std::filesystem::path path;
  CsvSchema schema;
  SplitPolicy policy;
};

std::map<std::string, RegistryEntry> load_registry(
    const std::filesystem::path& path);

}  // namespace purets
