#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace purets {

/// Shortest round-trip decimal form (std::to_chars); "nan"/"inf" spelled out.
std::string format_double(double v);

/// Fixed-precision form, e.g. format_double_fixed(1.5, 2) -> "1.50".
std::string format_double_fixed(double v, int precision);

std::string read_file(const std::filesystem::path& path);

/// Writes to a temp file in the target directory, then renames into place,
/// so a killed run never leaves a truncated file behind.
void write_file_atomic(const std::filesystem::path& path,
                       std::string_view content);

}  // namespace purets
