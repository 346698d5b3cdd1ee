#include "manifest.hpp"

#include <cmath>
#include <set>

#include "spclab/error.hpp"
#include "spclab/io.hpp"
#include "spclab/parallel.hpp"

namespace spclab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& field, const std::string& what) {
    throw ValidationError("manifest field '" + field + "': " + what);
}

void allow_keys(const json& j, const std::string& field, std::initializer_list<const char*> keys) {
    if (!j.is_object()) bad(field, "expected an object");
    for (const auto& [k, v] : j.items()) {
        bool known = false;
        for (const char* a : keys) known = known || k == a;
        if (!known) bad(field.empty() ? k : field + "." + k, "unknown key");
    }
}

std::string sub(const std::string& field, const std::string& key) { return field.empty() ? key : field + "." + key; }
std::string at(const std::string& field, std::size_t i) { return field + "[" + std::to_string(i) + "]"; }

double number(const json& j, const std::string& field) {
    if (!j.is_number()) bad(field, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) bad(field, "must be finite");
    return v;
}

double positive(const json& j, const std::string& field) {
    const double v = number(j, field);
    if (!(v > 0.0)) bad(field, "must be > 0");
    return v;
}

std::string text(const json& j, const std::string& field) {
    if (!j.is_string()) bad(field, "expected a string");
    return j.get<std::string>();
}

bool boolean(const json& j, const std::string& field) {
    if (!j.is_boolean()) bad(field, "expected true or false");
    return j.get<bool>();
}

std::size_t index(const json& j, const std::string& field) {
    if (!j.is_number_integer() || j.get<long long>() < 0) bad(field, "expected a non-negative integer");
    return j.get<std::size_t>();
}

std::vector<double> numbers(const json& j, const std::string& field) {
    if (!j.is_array()) bad(field, "expected an array of numbers");
    std::vector<double> v;
    for (std::size_t i = 0; i < j.size(); ++i) v.push_back(number(j[i], at(field, i)));
    return v;
}

const json& required(const json& j, const std::string& field, const char* key) {
    if (!j.contains(key)) bad(sub(field, key), "required");
    return j.at(key);
}

template <class F>
auto convert(const json& j, const std::string& field, F from_string) {
    try {
        return from_string(text(j, field));
    } catch (const ValidationError& e) {
        bad(field, e.what());
    }
}

fs::path resolve(const fs::path& base, const json& j, const std::string& field) {
    const fs::path p = text(j, field);
    if (p.empty()) bad(field, "empty path");
    return p.is_absolute() ? p : base / p;
}

void unique_temperatures(const std::vector<double>& t, const std::string& field) {
    std::set<double> seen;
    for (double v : t)
        if (!seen.insert(v).second) bad(field, "duplicate temperature " + io::format_number(v) + " K");
}

SpectrumEntry spectrum_entry(const json& j, const std::string& field, const fs::path& base) {
    allow_keys(j, field, {"path", "temperature_K"});
    return {resolve(base, required(j, field, "path"), sub(field, "path")),
            positive(required(j, field, "temperature_K"), sub(field, "temperature_K"))};
}

void parse_spectra(const json& j, Manifest& m) {
    const std::string f = "spectra";
    allow_keys(j, f, {"stage", "representation", "entries", "background"});
    if (j.contains("stage")) {
        m.spectra_stage = text(j["stage"], "spectra.stage");
        if (m.spectra_stage != "raw" && m.spectra_stage != "normalized")
            bad("spectra.stage", "expected \"raw\" or \"normalized\"");
    }
    if (j.contains("representation")) m.representation = text(j["representation"], "spectra.representation");
    const json& e = required(j, f, "entries");
    if (!e.is_array()) bad("spectra.entries", "expected an array");
    std::vector<double> temps;
    for (std::size_t i = 0; i < e.size(); ++i) {
        m.spectra.push_back(spectrum_entry(e[i], at("spectra.entries", i), m.base_dir));
        temps.push_back(m.spectra.back().temperature_K);
    }
    unique_temperatures(temps, "spectra.entries");
    if (j.contains("background")) m.background = spectrum_entry(j["background"], "spectra.background", m.base_dir);
}

void parse_rates(const json& j, Manifest& m) {
    if (!j.is_array()) bad("rates", "expected an array");
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string f = at("rates", i);
        allow_keys(j[i], f, {"path", "label", "orientation", "method"});
        RateEntry r;
        r.path = resolve(m.base_dir, required(j[i], f, "path"), sub(f, "path"));
        r.label = j[i].contains("label") ? text(j[i]["label"], sub(f, "label")) : r.path.stem().string();
        if (j[i].contains("orientation"))
            r.orientation = convert(j[i]["orientation"], sub(f, "orientation"), relax::orientation_from_string);
        if (j[i].contains("method")) r.method = convert(j[i]["method"], sub(f, "method"), relax::method_from_string);
        m.rates.push_back(r);
    }
}

void parse_traces(const json& j, Manifest& m) {
    if (!j.is_array()) bad("traces", "expected an array");
    std::vector<std::string> keys;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string f = at("traces", i);
        allow_keys(j[i], f, {"path", "temperature_K", "kind", "orientation"});
        TraceEntry t;
        t.path = resolve(m.base_dir, required(j[i], f, "path"), sub(f, "path"));
        t.temperature_K = positive(required(j[i], f, "temperature_K"), sub(f, "temperature_K"));
        t.kind = convert(required(j[i], f, "kind"), sub(f, "kind"), relax::trace_kind_from_string);
        if (j[i].contains("orientation"))
            t.orientation = convert(j[i]["orientation"], sub(f, "orientation"), relax::orientation_from_string);
        const std::string key = io::format_number(t.temperature_K) + "/" + std::string(relax::to_string(t.kind)) +
                                "/" + std::string(relax::to_string(t.orientation));
        for (const auto& k : keys)
            if (k == key) bad(f, "duplicate (temperature_K, kind, orientation)");
        keys.push_back(key);
        m.traces.push_back(t);
    }
}

void parse_diffraction(const json& j, Manifest& m) {
    allow_keys(j, "diffraction", {"patterns", "peaks"});
    const json& p = required(j, "diffraction", "patterns");
    if (!p.is_array()) bad("diffraction.patterns", "expected an array");
    std::vector<double> temps;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const std::string f = at("diffraction.patterns", i);
        const auto e = spectrum_entry(p[i], f, m.base_dir);
        m.diffraction.push_back({e.path, e.temperature_K});
        temps.push_back(e.temperature_K);
    }
    unique_temperatures(temps, "diffraction.patterns");
    const json& s = required(j, "diffraction", "peaks");
    if (!s.is_array()) bad("diffraction.peaks", "expected an array");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string f = at("diffraction.peaks", i);
        allow_keys(s[i], f, {"d0_A", "half_width_A", "label", "reference_d_A"});
        lattice::PeakSeed seed;
        seed.d0_A = positive(required(s[i], f, "d0_A"), sub(f, "d0_A"));
        seed.half_width_A = positive(required(s[i], f, "half_width_A"), sub(f, "half_width_A"));
        if (s[i].contains("label")) seed.label = text(s[i]["label"], sub(f, "label"));
        m.diffraction_peaks.push_back(seed);
        m.reference_d_A.push_back(s[i].contains("reference_d_A")
                                      ? std::optional<double>(positive(s[i]["reference_d_A"], sub(f, "reference_d_A")))
                                      : std::nullopt);
    }
}

void parse_phonon_peaks(const json& j, Manifest& m) {
    const std::string f = "phonon_peaks";
    allow_keys(j, f, {"profile", "resolution_fwhm_cm", "seeds"});
    if (j.contains("profile")) m.phonon_fit.profile = convert(j["profile"], sub(f, "profile"), peakfit::profile_from_string);
    if (j.contains("resolution_fwhm_cm"))
        m.phonon_fit.resolution_fwhm_cm = number(j["resolution_fwhm_cm"], sub(f, "resolution_fwhm_cm"));
    const json& s = required(j, f, "seeds");
    if (!s.is_array()) bad(sub(f, "seeds"), "expected an array");
    for (std::size_t i = 0; i < s.size(); ++i) {
        const std::string g = at(sub(f, "seeds"), i);
        allow_keys(s[i], g, {"center_cm", "half_width_cm", "label"});
        anharm::PhononSeed seed;
        seed.center_cm = positive(required(s[i], g, "center_cm"), sub(g, "center_cm"));
        seed.half_width_cm = positive(required(s[i], g, "half_width_cm"), sub(g, "half_width_cm"));
        if (s[i].contains("label")) seed.label = text(s[i]["label"], sub(g, "label"));
        m.phonon_peaks.push_back(seed);
    }
}

void parse_modes(const json& j, Manifest& m) {
    allow_keys(j, "modes", {"path", "core"});
    m.modes = resolve(m.base_dir, required(j, "modes", "path"), "modes.path");
    if (!j.contains("core")) return;
    const json& c = j["core"];
    allow_keys(c, "modes.core", {"center", "ligands", "normal"});
    modes::CoreSpec core;
    core.center = index(required(c, "modes.core", "center"), "modes.core.center");
    const json& l = required(c, "modes.core", "ligands");
    if (!l.is_array() || l.size() != 4) bad("modes.core.ligands", "expected 4 atom indices");
    for (std::size_t i = 0; i < 4; ++i) core.ligands[i] = index(l[i], at("modes.core.ligands", i));
    if (c.contains("normal")) {
        const auto n = numbers(c["normal"], "modes.core.normal");
        if (n.size() != 3) bad("modes.core.normal", "expected 3 components");
        core.normal = {n[0], n[1], n[2]};
    }
    m.core = core;
}

void parse_correction(const json& j, Manifest& m) {
    const std::string f = "correction";
    allow_keys(j, f,
               {"elastic_cutoff_cm", "normalization_cutoff_cm", "multiphonon_order", "multiphonon_strength",
                "multiphonon_tolerance", "allow_elastic_override"});
    auto& c = m.correction;
    if (j.contains("elastic_cutoff_cm")) c.elastic_cutoff_cm = number(j["elastic_cutoff_cm"], sub(f, "elastic_cutoff_cm"));
    if (j.contains("normalization_cutoff_cm"))
        c.normalization_cutoff_cm = number(j["normalization_cutoff_cm"], sub(f, "normalization_cutoff_cm"));
    if (j.contains("multiphonon_order")) {
        if (!j["multiphonon_order"].is_number_integer()) bad(sub(f, "multiphonon_order"), "expected an integer");
        c.multiphonon_order = j["multiphonon_order"].get<int>();
    }
    if (j.contains("multiphonon_strength"))
        c.multiphonon_strength = number(j["multiphonon_strength"], sub(f, "multiphonon_strength"));
    if (j.contains("multiphonon_tolerance"))
        c.multiphonon_tolerance = number(j["multiphonon_tolerance"], sub(f, "multiphonon_tolerance"));
    if (j.contains("allow_elastic_override"))
        c.allow_elastic_override = boolean(j["allow_elastic_override"], sub(f, "allow_elastic_override"));
    try {
        c.validate();
    } catch (const ValidationError& e) {
        bad(f, e.what());
    }
}

void parse_fit(const json& j, Manifest& m) {
    const std::string f = "fit";
    allow_keys(j, f,
               {"edges_cm", "cutoff_grid_cm", "normalization_cutoffs_cm", "e_max_cm", "t_floor_K", "include_direct",
                "spectrum_mode", "weighted", "excluded_below_cm", "switch_temperature_K", "orientation",
                "local_modes", "debye", "slope_window"});
    auto& c = m.fit;
    if (j.contains("edges_cm")) c.edges_cm = numbers(j["edges_cm"], sub(f, "edges_cm"));
    if (j.contains("cutoff_grid_cm")) c.cutoff_grid_cm = numbers(j["cutoff_grid_cm"], sub(f, "cutoff_grid_cm"));
    if (j.contains("normalization_cutoffs_cm"))
        c.normalization_cutoffs_cm = numbers(j["normalization_cutoffs_cm"], sub(f, "normalization_cutoffs_cm"));
    if (j.contains("e_max_cm")) c.e_max_cm = positive(j["e_max_cm"], sub(f, "e_max_cm"));
    if (j.contains("t_floor_K")) c.spc.t_floor_K = number(j["t_floor_K"], sub(f, "t_floor_K"));
    if (j.contains("include_direct")) c.spc.include_direct = boolean(j["include_direct"], sub(f, "include_direct"));
    if (j.contains("spectrum_mode"))
        c.spc.mode = convert(j["spectrum_mode"], sub(f, "spectrum_mode"), spc::spectrum_mode_from_string);
    if (j.contains("weighted")) c.spc.weighted = boolean(j["weighted"], sub(f, "weighted"));
    if (j.contains("excluded_below_cm") && !j["excluded_below_cm"].is_null())
        c.spc.excluded_below_cm = number(j["excluded_below_cm"], sub(f, "excluded_below_cm"));
    if (j.contains("switch_temperature_K"))
        c.assembly.switch_temperature_K = positive(j["switch_temperature_K"], sub(f, "switch_temperature_K"));
    if (j.contains("orientation"))
        c.assembly.orientation = convert(j["orientation"], sub(f, "orientation"), relax::orientation_from_string);
    if (j.contains("slope_window")) {
        if (!j["slope_window"].is_number_integer()) bad(sub(f, "slope_window"), "expected an integer");
        c.slope_window = j["slope_window"].get<int>();
    }
    if (j.contains("local_modes")) {
        const json& l = j["local_modes"];
        const std::string g = sub(f, "local_modes");
        allow_keys(l, g, {"n_modes", "include_direct", "e_min_cm", "e_max_cm", "merge_threshold_cm", "weighted"});
        auto& o = c.local_modes;
        if (l.contains("n_modes")) o.n_modes = static_cast<int>(index(l["n_modes"], sub(g, "n_modes")));
        if (l.contains("include_direct")) o.include_direct = boolean(l["include_direct"], sub(g, "include_direct"));
        if (l.contains("e_min_cm")) o.e_min_cm = positive(l["e_min_cm"], sub(g, "e_min_cm"));
        if (l.contains("e_max_cm")) o.e_max_cm = positive(l["e_max_cm"], sub(g, "e_max_cm"));
        if (l.contains("merge_threshold_cm"))
            o.merge_threshold_cm = number(l["merge_threshold_cm"], sub(g, "merge_threshold_cm"));
        if (l.contains("weighted")) o.weighted = boolean(l["weighted"], sub(g, "weighted"));
    }
    if (j.contains("debye")) {
        const json& d = j["debye"];
        const std::string g = sub(f, "debye");
        allow_keys(d, g, {"include_direct", "theta_min_K", "theta_max_K", "weighted"});
        auto& o = c.debye;
        if (d.contains("include_direct")) o.include_direct = boolean(d["include_direct"], sub(g, "include_direct"));
        if (d.contains("theta_min_K")) o.theta_min_K = positive(d["theta_min_K"], sub(g, "theta_min_K"));
        if (d.contains("theta_max_K")) o.theta_max_K = positive(d["theta_max_K"], sub(g, "theta_max_K"));
        if (d.contains("weighted")) o.weighted = boolean(d["weighted"], sub(g, "weighted"));
    }
}

void require_exists(const fs::path& p, const std::string& field) {
    if (!fs::exists(p)) throw IoError("manifest field '" + field + "': file '" + p.string() + "' does not exist");
}

} // namespace

Manifest parse_manifest(const json& doc, const fs::path& base_dir) {
    allow_keys(doc, "",
               {"schema_version", "dataset", "spectra", "rates", "traces", "diffraction", "phonon_peaks", "modes",
                "correction", "fit", "seeds", "truth"});
    Manifest m;
    m.base_dir = base_dir;
    m.document = doc;
    const json& v = required(doc, "", "schema_version");
    if (!v.is_number_integer()) bad("schema_version", "expected an integer");
    m.schema_version = v.get<int>();
    if (m.schema_version != manifest_schema_version)
        bad("schema_version", "unsupported version " + std::to_string(m.schema_version) + " (this build reads " +
                                  std::to_string(manifest_schema_version) + ")");
    if (doc.contains("dataset")) m.dataset = text(doc["dataset"], "dataset");
    if (doc.contains("spectra")) parse_spectra(doc["spectra"], m);
    if (doc.contains("rates")) parse_rates(doc["rates"], m);
    if (doc.contains("traces")) parse_traces(doc["traces"], m);
    if (doc.contains("diffraction")) parse_diffraction(doc["diffraction"], m);
    if (doc.contains("phonon_peaks")) parse_phonon_peaks(doc["phonon_peaks"], m);
    if (doc.contains("modes")) parse_modes(doc["modes"], m);
    if (doc.contains("correction")) parse_correction(doc["correction"], m);
    if (doc.contains("fit")) parse_fit(doc["fit"], m);
    m.fit.spc.normalization_cutoff_cm = m.correction.normalization_cutoff_cm;
    if (doc.contains("seeds")) {
        const json& s = doc["seeds"];
        if (!s.is_array()) bad("seeds", "expected an array of non-negative integers");
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (!s[i].is_number_unsigned()) bad(at("seeds", i), "expected a non-negative integer");
            m.seeds.push_back(s[i].get<std::uint64_t>());
        }
    }
    if (doc.contains("truth")) m.truth = doc["truth"];
    return m;
}

Manifest read_manifest(const fs::path& file) {
    json doc;
    try {
        doc = json::parse(io::read_text(file));
    } catch (const json::parse_error& e) {
        throw ValidationError(file.string() + ": not valid JSON: " + e.what());
    }
    auto base = file.parent_path();
    if (base.empty()) base = ".";
    Manifest m = parse_manifest(doc, base);
    for (std::size_t i = 0; i < m.spectra.size(); ++i) require_exists(m.spectra[i].path, at("spectra.entries", i) + ".path");
    if (m.background) require_exists(m.background->path, "spectra.background.path");
    for (std::size_t i = 0; i < m.rates.size(); ++i) require_exists(m.rates[i].path, at("rates", i) + ".path");
    for (std::size_t i = 0; i < m.traces.size(); ++i) require_exists(m.traces[i].path, at("traces", i) + ".path");
    for (std::size_t i = 0; i < m.diffraction.size(); ++i)
        require_exists(m.diffraction[i].path, at("diffraction.patterns", i) + ".path");
    if (m.modes) require_exists(*m.modes, "modes.path");
    return m;
}

namespace {

void need(bool have, const char* what) {
    if (!have) throw ValidationError(std::string("manifest has no ") + what);
}

} // namespace

SpectrumSet load_spectra(const Manifest& m) {
    need(!m.spectra.empty(), "spectra.entries");
    const Provenance prov = m.spectra_stage == "raw" ? Provenance::raw : Provenance::normalized;
    std::vector<Spectrum> v;
    for (const auto& e : m.spectra) v.push_back(io::read_spectrum_csv(e.path, e.temperature_K, prov));
    SpectrumSet set(std::move(v), m.representation);
    if (prov == Provenance::normalized) return set;
    auto cfg = m.correction;
    if (m.background) cfg.background = io::read_spectrum_csv(m.background->path, m.background->temperature_K);
    return ins::correct(set, cfg);
}

std::vector<relax::RecoveryTrace> load_traces(const Manifest& m) {
    std::vector<relax::RecoveryTrace> out;
    for (const auto& t : m.traces) out.push_back(io::read_trace_csv(t.path, t.kind));
    return out;
}

std::vector<relax::RateSeries> load_rate_series(const Manifest& m) {
    need(!m.rates.empty() || !m.traces.empty(), "rates or traces");
    std::vector<relax::RateSeries> out;
    for (const auto& r : m.rates) {
        auto pts = io::read_rate_csv(r.path);
        for (auto& p : pts) {
            if (p.orientation == relax::Orientation::unspecified) p.orientation = r.orientation;
            if (p.method == relax::Method::unspecified) p.method = r.method;
        }
        auto policy = m.fit.assembly;
        policy.label = r.label;
        out.push_back(relax::assemble_rate_series(pts, policy));
    }
    if (!m.traces.empty()) {
        const auto traces = load_traces(m);
        std::vector<relax::TraceFit> fits(traces.size());
        parallel_for(traces.size(), [&](std::size_t i) { fits[i] = relax::fit_recovery_trace(traces[i]); });
        std::vector<relax::RatePoint> pts;
        for (std::size_t i = 0; i < traces.size(); ++i) {
            relax::RatePoint p;
            p.temperature_K = m.traces[i].temperature_K;
            p.rate_per_us = 1.0 / fits[i].t1_us;
            p.rate_err_per_us = fits[i].t1_err_us / (fits[i].t1_us * fits[i].t1_us);
            p.orientation = m.traces[i].orientation;
            p.method = m.traces[i].kind == relax::TraceKind::inversion ? relax::Method::inversion
                                                                       : relax::Method::saturation;
            pts.push_back(p);
        }
        auto policy = m.fit.assembly;
        policy.label = "traces";
        out.push_back(relax::assemble_rate_series(pts, policy));
    }
    return out;
}

std::vector<lattice::DiffractionPattern> load_patterns(const Manifest& m) {
    need(!m.diffraction.empty(), "diffraction.patterns");
    std::vector<lattice::DiffractionPattern> out;
    for (const auto& p : m.diffraction) out.push_back(io::read_pattern_csv(p.path, p.temperature_K));
    return out;
}

modes::ModeSet load_modes(const Manifest& m) {
    need(m.modes.has_value(), "modes.path");
    return io::read_mode_set_json(*m.modes);
}

} // namespace spclab::cli
