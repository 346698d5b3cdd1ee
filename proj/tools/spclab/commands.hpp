#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "manifest.hpp"

namespace spclab::cli {

/// Command-line values shared by the subcommands; each command reads the
/// ones it declares.
struct Args {
    std::vector<double> temps_K;
    std::vector<double> edges_cm;
    std::vector<double> grid_cm;
    std::optional<int> n_modes;
    std::optional<int> window;
    std::optional<double> e_max_cm;
    std::optional<double> temperature_K;
    std::optional<double> bin_cm;
    std::string generator;
    std::string preset = "two-band";
    std::optional<double> noise_rel;
    std::uint64_t seed = 0;
};

struct Outcome {
    /// Written to result.json; holds nothing that varies between identical runs.
    nlohmann::ordered_json result;
    std::vector<std::uint64_t> seeds;
};

/// Runs `command` ("spc fit", "synth", ...) and writes its CSV files into
/// out_dir. The manifest is absent only for synth.
Outcome run_command(const std::string& command, const Args& args, const Manifest* manifest,
                    const std::filesystem::path& out_dir);

/// Commands that take no manifest.
bool needs_manifest(const std::string& command);

/// Arguments a command actually reads, for run.json and the config hash.
nlohmann::ordered_json command_args(const std::string& command, const Args& args);

} // namespace spclab::cli
