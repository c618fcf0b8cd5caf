#pragma once

// Artifact formats.
//
// PathBatch CSV:  optional `# ...` header lines, then `t,path_0,...,path_{P-1}`,
//                 one row per grid point.
// PathBatch bin:  little-endian; magic "SGPB" (4 bytes), u32 version,
//                 u64 M (grid points), u64 n_paths, u64 seed, then the table
//                 column-major as f64: the grid column followed by one column
//                 per path.
// Reals are written in the shortest form that round-trips to the same double.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "specgauss/expansion.hpp"

namespace specgauss {

inline constexpr std::string_view kVersion = "0.1.0";
inline constexpr std::uint32_t kBinaryVersion = 1;

std::string format_double(double x);

/// 64-bit FNV-1a, used for config fingerprints.
std::uint64_t fnv1a64(std::string_view text) noexcept;

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::string provenance_line(std::uint64_t seed, std::uint64_t config_hash);

void write_paths_csv(std::ostream& os, const PathBatch& batch, std::string_view header_line = {});
PathBatch read_paths_csv(std::istream& is);

void write_paths_bin(std::ostream& os, const PathBatch& batch);
PathBatch read_paths_bin(std::istream& is);

struct CheckRecord {
  std::string name;
  double statistic = 0.0;
  double bound = 0.0;
  bool pass = false;
};

/// {"version": ..., "passed": bool, "checks": [{"name", "statistic", "bound", "pass"}, ...]}
std::string validation_report_json(const std::vector<CheckRecord>& checks);

}  // namespace specgauss
