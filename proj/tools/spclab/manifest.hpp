#pragma once

// Run description for the command-line tool: one JSON document naming the
// input files and the correction and fit settings.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spclab/anharm.hpp"
#include "spclab/ins.hpp"
#include "spclab/lattice.hpp"
#include "spclab/modes.hpp"
#include "spclab/relax.hpp"
#include "spclab/spc.hpp"

namespace spclab::cli {

inline constexpr int manifest_schema_version = 1;

struct SpectrumEntry {
    std::filesystem::path path;
    double temperature_K = 0.0;
};

struct RateEntry {
    std::filesystem::path path;
    std::string label;
    /// Fill-ins for rows that leave these columns empty.
    relax::Orientation orientation = relax::Orientation::unspecified;
    relax::Method method = relax::Method::unspecified;
};

struct TraceEntry {
    std::filesystem::path path;
    double temperature_K = 0.0;
    relax::TraceKind kind = relax::TraceKind::inversion;
    relax::Orientation orientation = relax::Orientation::unspecified;
};

struct PatternEntry {
    std::filesystem::path path;
    double temperature_K = 0.0;
};

struct FitConfig {
    std::vector<double> edges_cm{0.0, 185.0, 600.0};
    /// Empty: 25, 35, ..., 575.
    std::vector<double> cutoff_grid_cm;
    std::vector<double> normalization_cutoffs_cm{600.0};
    double e_max_cm = spc::default_e_max_cm;
    spc::FitOptions spc;
    relax::AssemblyPolicy assembly;
    relax::LocalModeOptions local_modes;
    relax::DebyeOptions debye;
    int slope_window = 5;
};

struct Manifest {
    int schema_version = manifest_schema_version;
    std::string dataset;
    std::filesystem::path base_dir;

    /// "raw" spectra go through the correction pipeline before use;
    /// "normalized" spectra are used as given.
    std::string spectra_stage = "raw";
    std::string representation = "instrument";
    std::vector<SpectrumEntry> spectra;
    std::optional<SpectrumEntry> background;

    std::vector<RateEntry> rates;
    std::vector<TraceEntry> traces;

    std::vector<PatternEntry> diffraction;
    std::vector<lattice::PeakSeed> diffraction_peaks;
    std::vector<std::optional<double>> reference_d_A;

    std::vector<anharm::PhononSeed> phonon_peaks;
    anharm::PeakFitOptions phonon_fit;

    std::optional<std::filesystem::path> modes;
    std::optional<modes::CoreSpec> core;

    ins::CorrectionConfig correction;
    FitConfig fit;
    std::vector<std::uint64_t> seeds;
    /// Ground truth carried by synthetic datasets; null otherwise.
    nlohmann::json truth;
    /// The document as read, used for the configuration hash.
    nlohmann::json document;
};

/// Throws ValidationError naming the offending field.
Manifest parse_manifest(const nlohmann::json& doc, const std::filesystem::path& base_dir);
/// Reads and parses; referenced files must exist (IoError otherwise).
Manifest read_manifest(const std::filesystem::path& file);

/// Spectra as a set, corrected first when the stage is "raw".
SpectrumSet load_spectra(const Manifest& m);
std::vector<relax::RecoveryTrace> load_traces(const Manifest& m);
/// One assembled series per rates entry, plus one from the fitted traces.
std::vector<relax::RateSeries> load_rate_series(const Manifest& m);
std::vector<lattice::DiffractionPattern> load_patterns(const Manifest& m);
modes::ModeSet load_modes(const Manifest& m);

} // namespace spclab::cli
