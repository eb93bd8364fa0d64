#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace homlag {

/// Flat INI-style scene text: [section] headers, key = value lines, comma
/// lists for arrays, '#' comments. Unknown sections or keys are hard errors.
struct SceneText {
    // section -> ordered (key, value) pairs
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections;

    const std::vector<std::pair<std::string, std::string>>* find(const std::string& name) const;
    bool has(const std::string& section, const std::string& key) const;
    std::string get(const std::string& section, const std::string& key,
                    const std::string& fallback) const;
    std::string require(const std::string& section, const std::string& key) const;
};

SceneText parse_scene(const std::string& text);

struct CliOptions {
    std::uint64_t seed = 0;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<std::string> dng_normalization;  // "paper" | "cauchy-binet"
    std::optional<int> quadrature_order;
    std::optional<int> refine;
};

struct RunResult {
    int exit_code = 0;
    std::string payload;   // the data or report file contents
    std::string out_path;  // resolved from scene/flags; empty means stdout
    std::string human;     // one-line summary for stderr (may include wall time)
};

/// Exit-code contract: 0 pass, 1 config, 2 numeric/convergence, 3 I/O.
RunResult run_simulate(const std::string& scene_text, const CliOptions& opts);
RunResult run_diagnose(const std::string& scene_text, const CliOptions& opts);
RunResult run_brane(const std::string& scene_text, const CliOptions& opts);
RunResult run_sweep(const std::string& scene_text, const CliOptions& opts);

/// 17-significant-digit float formatting used in every output file.
std::string fmt17(double v);

/// FNV-1a hash of the scene text and seed; echoed into reports.
std::string config_hash(const std::string& scene_text, std::uint64_t seed);

int exit_code_for_error_code(int code);

}  // namespace homlag
