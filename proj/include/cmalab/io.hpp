#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cmalab/grid.hpp"

namespace cmalab {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Shortest deterministic decimal form that round-trips a double.
std::string format_double(double x);

// Flat little-endian float64 array at <base>.f64 with a JSON sidecar at
// <base>.json describing shape and tags.
void write_field(const std::filesystem::path& base, const PotentialField& u, const Grid& g,
                 const std::string& normalization, const std::string& extra_tag);
PotentialField read_field(const std::filesystem::path& base, Grid& g_out);

// Key = value configuration file (one pair per line, '#' comments).
// Returns pairs in file order.
std::vector<std::pair<std::string, std::string>> parse_config_file(
    const std::filesystem::path& path);

// Entry point used by the command-line tool. Returns the process exit code:
// 0 success, 2 validation error, 3 numerical non-convergence (partial
// outputs are still written).
int run_cli(int argc, const char* const* argv);

} // namespace cmalab
