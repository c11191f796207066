#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include "purets/model.hpp"

namespace purets {

/// Model checkpoint container:
///   8-byte magic "PTSCKPT1"
///   u64 little-endian header length
///   JSON header (shapes, layer order, activation flags, producing config)
///   raw little-endian f64 buffers, one weight (row-major) then one bias per
///   layer, temporal layers first, spatial last.
struct Checkpoint {
  LinearStack model;
  std::map<std::string, std::string> config;
};

void save_checkpoint(const std::filesystem::path& path, const LinearStack& m,
                     const std::map<std::string, std::string>& config = {});

Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Number of 64-bit float values stored in the checkpoint's weight/bias
/// buffers (equals count_parameters of the model that wrote it).
std::size_t checkpoint_value_count(const std::filesystem::path& path);

}  // namespace purets
