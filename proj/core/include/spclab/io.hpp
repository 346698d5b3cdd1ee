#pragma once

/// @file
///
/// Plain-text formats. CSV files carry a header row naming their columns;
/// lines starting with '#' are ignored. Numbers are written with 17
/// significant digits so files round-trip exactly.

#include <filesystem>
#include <string>
#include <vector>

#include "spclab/anharm.hpp"
#include "spclab/core.hpp"
#include "spclab/lattice.hpp"
#include "spclab/modes.hpp"
#include "spclab/relax.hpp"

namespace spclab::io {

/// Columns by header name; the first row is the header.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of a column, or -1.
    int column(std::string_view name) const;
    /// Numeric value; throws IoError naming the file, row and column.
    double number(std::size_t row, int col) const;
    std::string source;
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(const std::string& text, const std::string& source = "<memory>");
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

/// `energy_cm,intensity[,error]`, energies are bin centres.
Spectrum read_spectrum_csv(const std::filesystem::path& path, double temperature_K,
                           Provenance provenance = Provenance::raw);
std::string spectrum_csv(const Spectrum& spec);

/// `T_K,rate_per_us[,rate_err_per_us][,orientation][,method]`.
std::vector<relax::RatePoint> read_rate_csv(const std::filesystem::path& path);
std::string rate_csv(const relax::RateSeries& series);

/// `delay_us,signal`.
relax::RecoveryTrace read_trace_csv(const std::filesystem::path& path, relax::TraceKind kind);
std::string trace_csv(const relax::RecoveryTrace& trace);

/// `d_angstrom,intensity`.
lattice::DiffractionPattern read_pattern_csv(const std::filesystem::path& path, double temperature_K);
std::string pattern_csv(const lattice::DiffractionPattern& pattern);

/// `T_K,center_cm,center_err,fwhm_cm,fwhm_err`; missing points are omitted.
std::string phonon_track_csv(const anharm::PhononPeakTrack& track);

/// `{atoms:[{element,mass_amu,position_A,sigma_inc_barn}], modes:[{freq_cm,eigvec}]}`.
modes::ModeSet parse_mode_set_json(const std::string& text);
modes::ModeSet read_mode_set_json(const std::filesystem::path& path);
std::string mode_set_json(const modes::ModeSet& ms);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

} // namespace spclab::io
