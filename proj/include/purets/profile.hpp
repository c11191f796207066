#pragma once

#include <cstdint>
#include <string>

#include "purets/model.hpp"

namespace purets {

/// Static cost counts plus measured single-thread inference latency.
struct ProfileReport {
  std::uint64_t parameter_count = 0;
  std::uint64_t mac_count = 0;
  std::uint64_t add_count = 0;  // bias adds, not counted as MACs
  Index batch = 1;
  Index warmup = 0;
  Index repeats = 0;
  double mean_latency_s = 0.0;
  double latency_std_s = 0.0;
  std::string shape_summary;
};

/// Total trainable scalars: sum of out*in + out over every layer.
std::uint64_t count_parameters(const LinearStack& model);

/// Multiply-accumulates for one forward pass on `batch` windows. Each
/// temporal layer costs batch * n_features * out * in, a spatial layer costs
/// batch * horizon * n_features^2. Bias adds are excluded; see
/// count_bias_adds.
std::uint64_t count_macs(const LinearStack& model, Index batch = 1);

/// Bias additions for one forward pass on `batch` windows.
std::uint64_t count_bias_adds(const LinearStack& model, Index batch = 1);

/// "temporal 336->720, channels 7" plus ", spatial 7x7" when present.
std::string shape_summary(const LinearStack& model);

/// Times forward passes on one fixed random batch: `warmup` untimed runs
/// (at least 1), then `repeats` timed ones (at least 5). Returns mean and
/// population standard deviation in seconds through the report's latency
/// fields.
ProfileReport profile_model(const LinearStack& model, Index batch = 1,
                            Index warmup = 3, Index repeats = 20,
                            std::uint64_t seed = 0);

std::string profile_report_to_json(const ProfileReport& r);

}  // namespace purets
