#include "spclab/io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace spclab::io {

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(',', start);
        out.push_back(trim(std::string_view(line).substr(start, pos == std::string::npos ? pos : pos - start)));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string where(const CsvTable& t, std::size_t row) {
    std::ostringstream os;
    os << t.source << " row " << (row + 1);
    return os.str();
}

int require(const CsvTable& t, std::string_view name) {
    const int c = t.column(name);
    if (c < 0) throw IoError(t.source + ": missing column '" + std::string(name) + "'");
    return c;
}

} // namespace

int CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return static_cast<int>(i);
    return -1;
}

double CsvTable::number(std::size_t row, int col) const {
    const auto& r = rows.at(row);
    if (col < 0 || static_cast<std::size_t>(col) >= r.size() || r[static_cast<std::size_t>(col)].empty())
        throw IoError(where(*this, row) + ": missing value in column '" +
                      (col >= 0 && static_cast<std::size_t>(col) < header.size() ? header[static_cast<std::size_t>(col)]
                                                                                  : std::string("?")) +
                      "'");
    const std::string& s = r[static_cast<std::size_t>(col)];
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        throw IoError(where(*this, row) + ": '" + s + "' in column '" + header[static_cast<std::size_t>(col)] +
                      "' is not a number");
    return v;
}

CsvTable parse_csv(const std::string& text, const std::string& source) {
    CsvTable t;
    t.source = source;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string s = trim(line);
        if (s.empty() || s.front() == '#') continue;
        if (!have_header) {
            t.header = split(s);
            have_header = true;
            continue;
        }
        auto cells = split(s);
        if (cells.size() > t.header.size()) {
            std::ostringstream os;
            os << source << ": row with " << cells.size() << " cells for " << t.header.size() << " columns";
            throw IoError(os.str());
        }
        t.rows.push_back(std::move(cells));
    }
    if (!have_header) throw IoError(source + ": no header row");
    return t;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for reading");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open '" + path.string() + "' for writing");
    f << text;
    if (!f) throw IoError("failed writing '" + path.string() + "'");
}

CsvTable read_csv(const std::filesystem::path& path) { return parse_csv(read_text(path), path.string()); }

std::string format_number(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return ec == std::errc() ? std::string(buf, ptr) : std::string("nan");
}

Spectrum read_spectrum_csv(const std::filesystem::path& path, double T, Provenance prov) {
    const auto t = read_csv(path);
    const int ce = require(t, "energy_cm");
    const int ci = require(t, "intensity");
    std::vector<double> e, v;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        e.push_back(t.number(r, ce));
        v.push_back(t.number(r, ci));
    }
    try {
        Spectrum s{EnergyGrid::from_centers(e), std::move(v), T, prov};
        s.validate();
        return s;
    } catch (const ValidationError& err) {
        throw ValidationError(path.string() + ": " + err.what());
    }
}

std::string spectrum_csv(const Spectrum& spec) {
    std::string out = "energy_cm,intensity\n";
    for (std::size_t i = 0; i < spec.intensity.size(); ++i)
        out += format_number(spec.grid.centers()[i]) + "," + format_number(spec.intensity[i]) + "\n";
    return out;
}

std::vector<relax::RatePoint> read_rate_csv(const std::filesystem::path& path) {
    const auto t = read_csv(path);
    const int ct = require(t, "T_K");
    const int cr = require(t, "rate_per_us");
    const int ce = t.column("rate_err_per_us");
    const int co = t.column("orientation");
    const int cm = t.column("method");
    std::vector<relax::RatePoint> out;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        relax::RatePoint p;
        p.temperature_K = t.number(r, ct);
        p.rate_per_us = t.number(r, cr);
        const auto& row = t.rows[r];
        auto cell = [&](int c) -> std::string {
            return c >= 0 && static_cast<std::size_t>(c) < row.size() ? row[static_cast<std::size_t>(c)] : "";
        };
        if (!cell(ce).empty()) p.rate_err_per_us = t.number(r, ce);
        try {
            p.orientation = relax::orientation_from_string(cell(co));
            p.method = relax::method_from_string(cell(cm));
            p.validate();
        } catch (const ValidationError& err) {
            throw ValidationError(where(t, r) + ": " + err.what());
        }
        out.push_back(p);
    }
    return out;
}

std::string rate_csv(const relax::RateSeries& s) {
    std::string out = "T_K,rate_per_us,rate_err_per_us,orientation,method\n";
    for (const auto& p : s.points) {
        out += format_number(p.temperature_K) + "," + format_number(p.rate_per_us) + ",";
        if (p.rate_err_per_us) out += format_number(*p.rate_err_per_us);
        out += "," + std::string(relax::to_string(p.orientation)) + "," + std::string(relax::to_string(p.method)) +
               "\n";
    }
    return out;
}

relax::RecoveryTrace read_trace_csv(const std::filesystem::path& path, relax::TraceKind kind) {
    const auto t = read_csv(path);
    const int cd = require(t, "delay_us");
    const int cs = require(t, "signal");
    relax::RecoveryTrace tr;
    tr.kind = kind;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        tr.delays_us.push_back(t.number(r, cd));
        tr.signal.push_back(t.number(r, cs));
    }
    return tr;
}

std::string trace_csv(const relax::RecoveryTrace& tr) {
    std::string out = "delay_us,signal\n";
    for (std::size_t i = 0; i < tr.delays_us.size(); ++i)
        out += format_number(tr.delays_us[i]) + "," + format_number(tr.signal[i]) + "\n";
    return out;
}

lattice::DiffractionPattern read_pattern_csv(const std::filesystem::path& path, double T) {
    const auto t = read_csv(path);
    const int cd = require(t, "d_angstrom");
    const int ci = require(t, "intensity");
    lattice::DiffractionPattern p;
    p.temperature_K = T;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        p.d_A.push_back(t.number(r, cd));
        p.intensity.push_back(t.number(r, ci));
    }
    return p;
}

std::string pattern_csv(const lattice::DiffractionPattern& p) {
    std::string out = "d_angstrom,intensity\n";
    for (std::size_t i = 0; i < p.d_A.size(); ++i)
        out += format_number(p.d_A[i]) + "," + format_number(p.intensity[i]) + "\n";
    return out;
}

std::string phonon_track_csv(const anharm::PhononPeakTrack& track) {
    std::string out = "T_K,center_cm,center_err,fwhm_cm,fwhm_err\n";
    for (const auto& p : track.points) {
        if (p.missing) continue;
        out += format_number(p.temperature_K) + "," + format_number(p.center_cm) + "," +
               format_number(p.center_err_cm) + "," + format_number(p.fwhm_cm) + "," + format_number(p.fwhm_err_cm) +
               "\n";
    }
    return out;
}

modes::ModeSet parse_mode_set_json(const std::string& text) {
    using nlohmann::json;
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw IoError(std::string("mode set JSON: ") + e.what());
    }
    modes::ModeSet ms;
    try {
        for (std::size_t a = 0; a < j.at("atoms").size(); ++a) {
            const auto& ja = j["atoms"][a];
            modes::Atom atom;
            atom.element = ja.at("element").get<std::string>();
            atom.mass_amu = ja.at("mass_amu").get<double>();
            const auto pos = ja.at("position_A").get<std::vector<double>>();
            if (pos.size() != 3) throw ValidationError("atoms[" + std::to_string(a) + "].position_A needs 3 values");
            atom.position_A = {pos[0], pos[1], pos[2]};
            atom.sigma_inc_barn = ja.value("sigma_inc_barn", 0.0);
            ms.atoms.push_back(std::move(atom));
        }
        for (const auto& jm : j.at("modes")) {
            modes::Mode m;
            m.freq_cm = jm.at("freq_cm").get<double>();
            m.eigvec = jm.at("eigvec").get<std::vector<double>>();
            ms.modes.push_back(std::move(m));
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("mode set JSON: ") + e.what());
    }
    ms.validate();
    return ms;
}

modes::ModeSet read_mode_set_json(const std::filesystem::path& path) {
    try {
        return parse_mode_set_json(read_text(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string mode_set_json(const modes::ModeSet& ms) {
    nlohmann::ordered_json j;
    j["atoms"] = nlohmann::ordered_json::array();
    for (const auto& a : ms.atoms) {
        nlohmann::ordered_json ja;
        ja["element"] = a.element;
        ja["mass_amu"] = a.mass_amu;
        ja["position_A"] = {a.position_A[0], a.position_A[1], a.position_A[2]};
        ja["sigma_inc_barn"] = a.sigma_inc_barn;
        j["atoms"].push_back(ja);
    }
    j["modes"] = nlohmann::ordered_json::array();
    for (const auto& m : ms.modes) {
        nlohmann::ordered_json jm;
        jm["freq_cm"] = m.freq_cm;
        jm["eigvec"] = m.eigvec;
        j["modes"].push_back(jm);
    }
    return j.dump(2) + "\n";
}

} // namespace spclab::io
