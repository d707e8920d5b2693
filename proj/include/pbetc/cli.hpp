#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

namespace pbetc {

/// Provenance written next to every set of outputs.
struct RunManifest {
    std::filesystem::path config_path;
    std::filesystem::path output_dir;
    std::string git_hash;
    std::string timestamp;  ///< UTC, ISO 8601
    std::string subcommand;
};

void write_manifest(const RunManifest& manifest);

/// Exit codes returned by run_cli.
inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitViolation = 2;

/// Entry point behind the `pbetc` executable: parses argv, runs the
/// subcommand and maps failures to exit codes.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pbetc
