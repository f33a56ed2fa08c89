#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace annulus {

/// Flat `key = value` text with optional `[section]` headers. Top-level keys:
/// pipeline, seed, out, workers. Sections: map (family plus its parameters),
/// fixed_points, bricks, rotation, dichotomy. Unknown keys raise ConfigError.
struct ScenarioConfig {
    std::string pipeline = "dichotomy";
    std::uint64_t seed = 1;
    std::string out = "out";
    unsigned workers = 0;

    std::string family = "rigid";
    std::map<std::string, std::string> family_params;

    int fixed_point_grid = 512;
    double fixed_point_tol = 1e-10;

    int grid_n = 16;
    int max_depth = 12;
    int window = 16;
    int max_window = 128;
    int seed_bricks = 5;

    int rotation_samples = 100;
    long horizon = 10000;
    int resolution = 512;
    double threshold = 5.0;

    double neighbourhood_radius = 1e-3;
    std::size_t mc_samples = 100000;
    int dichotomy_fixed_point_grid = 256;
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);
/// The config back in the file format (every knob, defaults included).
/// Without `runtime_keys` the out directory and worker count are left out,
/// so the text depends only on what the run computes.
std::string format_config(const ScenarioConfig& cfg, bool runtime_keys = true);

const std::vector<std::string>& pipeline_names();

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct ManifestEntry {
    std::string path;  ///< relative to the output directory
    std::uintmax_t bytes = 0;
    std::uint64_t hash = 0;
};

struct RunReport {
    std::string pipeline;
    /// 0 success, 2 hypotheses fail, 3 inconclusive, 4 config.
    int exit_code = 0;
    std::vector<StageTiming> timings;
    std::vector<std::string> verdicts;
    std::vector<ManifestEntry> manifest;
};

/// Runs the configured pipeline and writes its artefacts under cfg.out.
/// Stage errors are caught and mapped to exit codes; ConfigError propagates.
RunReport run_scenario(const ScenarioConfig& cfg);

std::uint64_t fnv1a64(std::string_view bytes);
std::vector<ManifestEntry> build_manifest(const std::filesystem::path& dir);
void write_manifest(std::ostream& out, const std::vector<ManifestEntry>& m);

}  // namespace annulus
