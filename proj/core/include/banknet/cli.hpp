#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace banknet::cli {

inline constexpr const char* kVersion = "0.1.0";

struct RunOptions {
    std::string command;        // calibrate | optimize-single | form | welfare | clear
    std::string config_path;
    std::string out_dir;
    std::optional<std::uint64_t> seed;      // overrides [simulation].seed
    std::optional<std::size_t> draws;       // overrides [simulation].draws
    int threads = 1;
};

/// Executes one batch command: reads the config, runs the pipeline, writes
/// CSV artifacts plus manifest.txt and report.txt into out_dir.
/// Returns 0 on success, 2 on a config/schema violation, 1 on any runtime
/// failure (diagnostics on stderr).
int run(const RunOptions& opts);

}  // namespace banknet::cli
