#include "commands.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "spclab/error.hpp"
#include "spclab/io.hpp"
#include "spclab/parallel.hpp"
#include "spclab/synth.hpp"
#include "spclab/thermal.hpp"

namespace spclab::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string num(double v) { return io::format_number(v); }

ojson opt(const std::optional<double>& v) { return v ? ojson(*v) : ojson(nullptr); }

std::string temp_tag(double T) { return num(T) + "K"; }

std::string safe(std::string s) {
    for (char& c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '-' && c != '_' && c != '.') c = '_';
    return s.empty() ? "series" : s;
}

struct Run {
    const Args& args;
    const Manifest* m;
    fs::path out;
    Outcome outcome;

    const Manifest& manifest() const { return *m; }

    void write(const std::string& name, const std::string& text) {
        io::write_text(out / name, text);
        outcome.result["files"].push_back(name);
    }
};

ojson series_json(const relax::RateSeries& s) {
    ojson j;
    j["label"] = s.label;
    j["n_points"] = s.points.size();
    j["t_min_K"] = s.points.front().temperature_K;
    j["t_max_K"] = s.points.back().temperature_K;
    return j;
}

// correct / boseweight ------------------------------------------------------

void cmd_correct(Run& r) {
    const auto& m = r.manifest();
    const auto set = load_spectra(m);
    auto& res = r.outcome.result;
    res["stage_in"] = m.spectra_stage;
    res["representation"] = set.representation();
    res["normalization_cutoff_cm"] = m.correction.normalization_cutoff_cm;
    res["spectra"] = ojson::array();
    for (const auto& s : set.spectra()) {
        const std::string name = "corrected_" + temp_tag(s.temperature_K) + ".csv";
        r.write(name, io::spectrum_csv(s));
        ojson e;
        e["temperature_K"] = s.temperature_K;
        e["integral_to_cutoff"] =
            integrate_range(s.intensity, s.grid, s.grid.lo(), std::min(m.correction.normalization_cutoff_cm, s.grid.hi()));
        e["non_negative"] = s.non_negative();
        e["file"] = name;
        res["spectra"].push_back(e);
    }
}

void cmd_boseweight(Run& r) {
    const auto set = load_spectra(r.manifest());
    const auto temps = r.args.temps_K.empty() ? set.temperatures() : r.args.temps_K;
    auto& res = r.outcome.result;
    res["spectra"] = ojson::array();
    for (double T : temps) {
        const auto spec = ins::interpolate_temperature(set, T);
        const auto bw = thermal::bose_weight(spec);
        std::string csv = "energy_cm,intensity,bose_weighted\n";
        for (std::size_t i = 0; i < bw.grid.size(); ++i)
            csv += num(bw.grid.centers()[i]) + "," + num(spec.intensity[i]) + "," + num(bw.intensity[i]) + "\n";
        const std::string name = "boseweight_" + temp_tag(T) + ".csv";
        r.write(name, csv);
        ojson e;
        e["temperature_K"] = T;
        e["integral"] = integrate(bw.intensity, bw.grid);
        e["file"] = name;
        res["spectra"].push_back(e);
    }
}

// t1 ------------------------------------------------------------------------

void cmd_t1_fit_traces(Run& r) {
    const auto& m = r.manifest();
    if (m.traces.empty()) throw ValidationError("manifest has no traces");
    const auto traces = load_traces(m);
    std::vector<relax::TraceFit> fits(traces.size());
    parallel_for(traces.size(), [&](std::size_t i) { fits[i] = relax::fit_recovery_trace(traces[i]); });
    auto& res = r.outcome.result;
    res["traces"] = ojson::array();
    std::string csv = "T_K,kind,orientation,t1_us,t1_err_us,beta,beta_err,rate_per_us,rate_err_per_us,rms_residual\n";
    for (std::size_t i = 0; i < fits.size(); ++i) {
        const auto& f = fits[i];
        const auto& t = m.traces[i];
        const double rate = 1.0 / f.t1_us, rate_err = f.t1_err_us / (f.t1_us * f.t1_us);
        ojson e;
        e["temperature_K"] = t.temperature_K;
        e["kind"] = relax::to_string(t.kind);
        e["orientation"] = relax::to_string(t.orientation);
        e["t1_us"] = f.t1_us;
        e["t1_err_us"] = f.t1_err_us;
        e["beta"] = f.beta;
        e["beta_err"] = f.beta_err;
        e["rate_per_us"] = rate;
        e["rate_err_per_us"] = rate_err;
        e["rms_residual"] = f.rms_residual;
        res["traces"].push_back(e);
        csv += num(t.temperature_K) + "," + std::string(relax::to_string(t.kind)) + "," +
               std::string(relax::to_string(t.orientation)) + "," + num(f.t1_us) + "," + num(f.t1_err_us) + "," +
               num(f.beta) + "," + num(f.beta_err) + "," + num(rate) + "," + num(rate_err) + "," +
               num(f.rms_residual) + "\n";
    }
    r.write("trace_fits.csv", csv);
}

void cmd_t1_assemble(Run& r) {
    auto& res = r.outcome.result;
    res["series"] = ojson::array();
    for (const auto& s : load_rate_series(r.manifest())) {
        const std::string name = "rates_" + safe(s.label) + ".csv";
        r.write(name, io::rate_csv(s));
        auto j = series_json(s);
        j["file"] = name;
        res["series"].push_back(j);
    }
}

template <class Fit>
std::string model_csv(const relax::RateSeries& s, const Fit& fit) {
    std::string csv = "T_K,rate_per_us,model_per_us\n";
    for (const auto& p : s.points)
        csv += num(p.temperature_K) + "," + num(p.rate_per_us) + "," + num(fit.rate(p.temperature_K)) + "\n";
    return csv;
}

void cmd_t1_localmode(Run& r) {
    auto opts = r.manifest().fit.local_modes;
    if (r.args.n_modes) opts.n_modes = *r.args.n_modes;
    auto& res = r.outcome.result;
    res["n_modes"] = opts.n_modes;
    res["include_direct"] = opts.include_direct;
    res["fits"] = ojson::array();
    for (const auto& s : load_rate_series(r.manifest())) {
        const auto f = relax::fit_local_modes(s, opts);
        auto j = series_json(s);
        j["a_dir_per_us_per_K"] = f.a_dir_per_us_per_K;
        j["a_dir_err_per_us_per_K"] = f.a_dir_err;
        j["modes"] = ojson::array();
        for (const auto& k : f.modes)
            j["modes"].push_back({{"energy_cm", k.energy_cm},
                                  {"energy_err_cm", k.energy_err_cm},
                                  {"amplitude_per_us", k.amplitude_per_us},
                                  {"amplitude_err_per_us", k.amplitude_err_per_us}});
        j["rmse_log10"] = f.rmse_log;
        j["starts"] = f.starts;
        j["warnings"] = f.warnings;
        const std::string name = "localmode_" + safe(s.label) + ".csv";
        r.write(name, model_csv(s, f));
        j["file"] = name;
        res["fits"].push_back(j);
    }
}

void cmd_t1_debye(Run& r) {
    const auto opts = r.manifest().fit.debye;
    auto& res = r.outcome.result;
    res["include_direct"] = opts.include_direct;
    res["fits"] = ojson::array();
    for (const auto& s : load_rate_series(r.manifest())) {
        const auto f = relax::fit_debye_raman(s, opts);
        auto j = series_json(s);
        j["a_dir_per_us_per_K"] = f.a_dir_per_us_per_K;
        j["a_dir_err_per_us_per_K"] = f.a_dir_err;
        j["c_raman_per_us_per_K9"] = f.c_raman;
        j["c_raman_rel_err"] = f.c_raman_rel_err;
        j["theta_D_K"] = f.theta_D_K;
        j["theta_D_err_K"] = f.theta_D_err_K;
        j["rmse_log10"] = f.rmse_log;
        const std::string name = "debye_" + safe(s.label) + ".csv";
        r.write(name, model_csv(s, f));
        j["file"] = name;
        res["fits"].push_back(j);
    }
}

void cmd_t1_slope(Run& r) {
    const int window = r.args.window.value_or(r.manifest().fit.slope_window);
    auto& res = r.outcome.result;
    res["window_points"] = window;
    res["series"] = ojson::array();
    for (const auto& s : load_rate_series(r.manifest())) {
        const auto sl = relax::log_slope(s, window);
        std::string csv = "T_K,dlnrate_dlnT\n";
        ojson pts = ojson::array();
        for (const auto& p : sl) {
            csv += num(p.temperature_K) + "," + num(p.slope) + "\n";
            pts.push_back({{"temperature_K", p.temperature_K}, {"slope", p.slope}});
        }
        const std::string name = "slope_" + safe(s.label) + ".csv";
        r.write(name, csv);
        auto j = series_json(s);
        j["points"] = pts;
        j["file"] = name;
        res["series"].push_back(j);
    }
}

// spc -----------------------------------------------------------------------

ojson crossovers_json(const std::vector<spc::Crossover>& cs) {
    ojson a = ojson::array();
    for (const auto& c : cs) {
        ojson j;
        j["lower_window"] = c.lower_window;
        j["status"] = spc::to_string(c.status);
        j["temperature_K"] = c.status == spc::CrossoverStatus::found ? ojson(c.temperature_K) : ojson(nullptr);
        a.push_back(j);
    }
    return a;
}

ojson fit_json(const spc::SpcFit& f) {
    ojson j;
    j["edges_cm"] = f.profile.edges_cm;
    j["lambdas_per_us"] = f.profile.lambdas_per_us;
    j["lambda_errs_per_us"] = f.lambda_err_per_us;
    j["include_direct"] = f.include_direct;
    j["a_dir_per_us_per_K"] = f.include_direct ? ojson(f.a_dir_per_us_per_K) : ojson(nullptr);
    j["a_dir_err_per_us_per_K"] = f.include_direct ? ojson(f.a_dir_err) : ojson(nullptr);
    j["excluded_below_cm"] = opt(f.profile.excluded_below_cm);
    j["rmse_log10"] = f.rmse_log;
    j["n_points"] = f.n_points;
    j["t_min_K"] = f.t_min_K;
    j["t_max_K"] = f.t_max_K;
    j["representation"] = f.representation;
    j["normalization_cutoff_cm"] = f.normalization_cutoff_cm;
    j["spectrum_mode"] = spc::to_string(f.mode);
    j["crossovers"] = crossovers_json(f.crossovers);
    return j;
}

spc::FitOptions fit_options(const Manifest& m) {
    auto o = m.fit.spc;
    return o;
}

std::vector<double> edges_for(const Run& r) { return r.args.edges_cm.empty() ? r.manifest().fit.edges_cm : r.args.edges_cm; }

void cmd_spc_fit(Run& r) {
    const auto& m = r.manifest();
    const auto set = load_spectra(m);
    const auto series = load_rate_series(m);
    const auto edges = edges_for(r);
    std::vector<std::optional<spc::SpcFit>> fits(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) fits[i] = spc::fit_lambda_windows(series[i], set, edges, fit_options(m));
    auto& res = r.outcome.result;
    res["fits"] = ojson::array();
    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& f = *fits[i];
        auto j = series_json(series[i]);
        j.update(fit_json(f));
        std::string csv = "T_K,rate_per_us,model_per_us";
        for (std::size_t w = 0; w < f.profile.windows(); ++w) csv += ",window" + std::to_string(w) + "_per_us";
        csv += "\n";
        for (const auto& p : series[i].points) {
            if (p.temperature_K < m.fit.spc.t_floor_K) continue;
            csv += num(p.temperature_K) + "," + num(p.rate_per_us) + "," + num(f.rate(set, p.temperature_K));
            for (double c : spc::window_contributions(f.profile, set, p.temperature_K, f.mode)) csv += "," + num(c);
            csv += "\n";
        }
        const std::string name = "spc_fit_" + safe(series[i].label) + ".csv";
        r.write(name, csv);
        j["file"] = name;
        res["fits"].push_back(j);
    }
}

void cmd_spc_scan(Run& r) {
    const auto& m = r.manifest();
    const auto set = load_spectra(m);
    const auto series = load_rate_series(m);
    auto grid = r.args.grid_cm.empty() ? m.fit.cutoff_grid_cm : r.args.grid_cm;
    if (grid.empty()) grid = spc::default_cutoff_grid();
    spc::CutoffScanOptions opts;
    opts.fit = fit_options(m);
    opts.e_max_cm = m.fit.e_max_cm;
    const auto scan = spc::cutoff_scan(series, set, grid, opts);
    auto& res = r.outcome.result;
    res["series"] = ojson::array();
    for (const auto& s : series) res["series"].push_back(series_json(s));
    res["e_max_cm"] = opts.e_max_cm;
    res["selected_cutoff_cm"] = scan.selected_cutoff_cm;
    res["weakly_identified"] = scan.weakly_identified;
    res["unique_coarse_minimum"] = scan.unique_coarse_minimum;
    res["coarse_points"] = scan.coarse_size;
    res["failures"] = scan.failures;
    std::string csv = "cutoff_cm,coarse";
    for (const auto& s : series) csv += ",rmse_log10_" + safe(s.label);
    csv += ",total_rmse_log10\n";
    ojson pts = ojson::array();
    for (std::size_t c = 0; c < scan.cutoffs_cm.size(); ++c) {
        csv += num(scan.cutoffs_cm[c]) + "," + (c < scan.coarse_size ? "1" : "0");
        for (const auto& v : scan.rmse_log[c]) csv += "," + (v ? num(*v) : std::string());
        csv += "," + (scan.total_rmse_log[c] ? num(*scan.total_rmse_log[c]) : std::string()) + "\n";
        pts.push_back({{"cutoff_cm", scan.cutoffs_cm[c]}, {"total_rmse_log10", opt(scan.total_rmse_log[c])}});
    }
    res["scan"] = pts;
    r.write("cutoff_scan.csv", csv);
}

void cmd_spc_density(Run& r) {
    const auto& m = r.manifest();
    const auto set = load_spectra(m);
    const auto series = load_rate_series(m);
    const auto fit = spc::fit_lambda_windows(series.front(), set, edges_for(r), fit_options(m));
    const auto temps = r.args.temps_K.empty() ? set.temperatures() : r.args.temps_K;
    auto& res = r.outcome.result;
    res["series"] = series_json(series.front());
    res["fit"] = fit_json(fit);
    res["densities"] = ojson::array();
    const auto& g = set.grid();
    for (double T : temps) {
        const auto d = spc::spectral_density(fit.profile, set, T, fit.mode);
        std::string csv = "energy_cm,density_per_us_per_cm\n";
        for (std::size_t i = 0; i < g.size(); ++i) csv += num(g.centers()[i]) + "," + num(d[i]) + "\n";
        const std::string name = "density_" + temp_tag(T) + ".csv";
        r.write(name, csv);
        ojson j;
        j["temperature_K"] = T;
        j["integral_per_us"] = integrate(d, g);
        j["forward_rate_per_us"] = spc::forward_rate(fit.profile, set, T, fit.mode);
        j["window_contributions_per_us"] = spc::window_contributions(fit.profile, set, T, fit.mode);
        j["file"] = name;
        res["densities"].push_back(j);
    }
}

SpectrumSet dos_set(const modes::ModeSet& ms, const SpectrumSet& like, double cutoff) {
    std::vector<Spectrum> v;
    for (double T : like.temperatures())
        v.push_back(modes::neutron_weighted_dos(ms, like.grid(), {5.0, cutoff, T}).normalized);
    return SpectrumSet(std::move(v), "dos");
}

void cmd_spc_sweep(Run& r) {
    const auto& m = r.manifest();
    const auto set = load_spectra(m);
    const auto series = load_rate_series(m);
    std::vector<spc::NamedSet> sets{{set.representation(), set}};
    if (m.modes) sets.push_back({"dos", dos_set(load_modes(m), set, m.correction.normalization_cutoff_cm)});
    auto& res = r.outcome.result;
    res["normalization_cutoffs_cm"] = m.fit.normalization_cutoffs_cm;
    res["edges_cm"] = edges_for(r);
    res["series"] = ojson::array();
    std::string csv = "series,set,normalization_cutoff_cm,ok";
    const std::size_t nw = edges_for(r).size() - 1;
    for (std::size_t w = 0; w < nw; ++w) csv += ",lambda" + std::to_string(w) + "_per_us";
    csv += ",rmse_log10,error\n";
    for (const auto& s : series) {
        const auto cells = spc::robustness_sweep(s, sets, m.fit.normalization_cutoffs_cm, edges_for(r), fit_options(m));
        auto j = series_json(s);
        j["cells"] = ojson::array();
        for (const auto& c : cells) {
            ojson e;
            e["set"] = c.set_name;
            e["normalization_cutoff_cm"] = c.normalization_cutoff_cm;
            e["lambdas_per_us"] = c.fit ? ojson(c.fit->profile.lambdas_per_us) : ojson(nullptr);
            e["lambda_ratios"] = c.lambda_ratios;
            e["rmse_log10"] = c.fit ? ojson(c.fit->rmse_log) : ojson(nullptr);
            e["error"] = c.error;
            j["cells"].push_back(e);
            csv += safe(s.label) + "," + c.set_name + "," + num(c.normalization_cutoff_cm) + "," + (c.fit ? "1" : "0");
            for (std::size_t w = 0; w < nw; ++w) csv += "," + (c.fit ? num(c.fit->profile.lambdas_per_us[w]) : "");
            csv += "," + (c.fit ? num(c.fit->rmse_log) : std::string()) + ",\"" + c.error + "\"\n";
        }
        res["series"].push_back(j);
    }
    r.write("sweep.csv", csv);
}

// lattice / anharm ----------------------------------------------------------

lattice::VolumeTrack volume(Run& r, bool write) {
    const auto& m = r.manifest();
    if (m.diffraction_peaks.empty()) throw ValidationError("manifest has no diffraction.peaks");
    const auto tracks = lattice::track_peaks(load_patterns(m), m.diffraction_peaks);
    const auto v = lattice::volume_expansion(tracks, m.reference_d_A);
    if (!write) return v;
    auto& res = r.outcome.result;
    res["tracks"] = ojson::array();
    std::string tcsv = "label,T_K,missing,center_A,center_err_A,fwhm_A,fwhm_err_A\n";
    for (std::size_t k = 0; k < tracks.size(); ++k) {
        ojson j;
        j["label"] = tracks[k].label;
        j["reference_d_A"] = v.reference_d_A[k];
        j["reference_from_fit"] = static_cast<bool>(v.reference_from_fit[k]);
        j["points"] = ojson::array();
        for (const auto& p : tracks[k].points) {
            j["points"].push_back({{"temperature_K", p.temperature_K},
                                   {"missing", p.missing},
                                   {"center_A", p.missing ? ojson(nullptr) : ojson(p.center_A)},
                                   {"fwhm_A", p.missing ? ojson(nullptr) : ojson(p.fwhm_A)}});
            tcsv += tracks[k].label + "," + num(p.temperature_K) + "," + (p.missing ? "1" : "0") + "," +
                    num(p.center_A) + "," + num(p.center_err_A) + "," + num(p.fwhm_A) + "," + num(p.fwhm_err_A) + "\n";
        }
        res["tracks"].push_back(j);
    }
    res["reference_temperature_K"] = opt(v.reference_temperature_K);
    res["volume"] = ojson::array();
    std::string vcsv = "T_K,dV_over_V,spread,n_tracks\n";
    for (const auto& p : v.points) {
        res["volume"].push_back({{"temperature_K", p.temperature_K},
                                 {"dV_over_V", opt(p.dv_over_v)},
                                 {"spread", p.spread},
                                 {"n_tracks", p.n_tracks}});
        vcsv += num(p.temperature_K) + "," + (p.dv_over_v ? num(*p.dv_over_v) : std::string()) + "," + num(p.spread) +
                "," + std::to_string(p.n_tracks) + "\n";
    }
    r.write("peak_tracks.csv", tcsv);
    r.write("volume.csv", vcsv);
    return v;
}

void cmd_lattice_volume(Run& r) { volume(r, true); }

std::vector<anharm::PhononPeakTrack> phonon_tracks(Run& r) {
    const auto& m = r.manifest();
    if (m.phonon_peaks.empty()) throw ValidationError("manifest has no phonon_peaks.seeds");
    const auto tracks = anharm::fit_phonon_peaks(load_spectra(m), m.phonon_peaks, m.phonon_fit);
    auto& res = r.outcome.result;
    res["profile"] = peakfit::to_string(m.phonon_fit.profile);
    res["resolution_fwhm_cm"] = opt(m.phonon_fit.resolution_fwhm_cm);
    res["tracks"] = ojson::array();
    for (std::size_t k = 0; k < tracks.size(); ++k) {
        const auto& t = tracks[k];
        const std::string name = "phonon_" + (t.label.empty() ? std::to_string(k) : safe(t.label)) + ".csv";
        r.write(name, io::phonon_track_csv(t));
        ojson j;
        j["label"] = t.label;
        j["base_temperature_K"] = opt(t.base_temperature_K);
        j["points"] = ojson::array();
        for (const auto& p : t.points) {
            if (p.missing) {
                j["points"].push_back({{"temperature_K", p.temperature_K}, {"missing", true}});
                continue;
            }
            j["points"].push_back({{"temperature_K", p.temperature_K},
                                   {"missing", false},
                                   {"center_cm", p.center_cm},
                                   {"center_err_cm", p.center_err_cm},
                                   {"fwhm_cm", p.fwhm_cm},
                                   {"fwhm_err_cm", p.fwhm_err_cm},
                                   {"d_center_cm", p.d_center_cm},
                                   {"d_fwhm_cm", p.d_fwhm_cm}});
        }
        j["file"] = name;
        res["tracks"].push_back(j);
    }
    return tracks;
}

void cmd_anharm_peaks(Run& r) { phonon_tracks(r); }

void cmd_anharm_gruneisen(Run& r) {
    const auto tracks = phonon_tracks(r);
    const auto v = volume(r, false);
    auto& res = r.outcome.result;
    res["gruneisen"] = ojson::array();
    std::string csv = "label,mode_energy_cm,gamma,gamma_err,linearity_residual,origin_residual,n_points\n";
    for (const auto& t : tracks) {
        const auto g = anharm::gruneisen(t, v);
        res["gruneisen"].push_back({{"label", t.label},
                                    {"mode_energy_cm", g.mode_energy_cm},
                                    {"base_temperature_K", g.base_temperature_K},
                                    {"gamma", g.gamma},
                                    {"gamma_err", g.gamma_err},
                                    {"linearity_residual", g.linearity_residual},
                                    {"origin_residual", g.origin_residual},
                                    {"n_points", g.n_points}});
        csv += t.label + "," + num(g.mode_energy_cm) + "," + num(g.gamma) + "," + num(g.gamma_err) + "," +
               num(g.linearity_residual) + "," + num(g.origin_residual) + "," + std::to_string(g.n_points) + "\n";
    }
    r.write("gruneisen.csv", csv);
}

// modes ---------------------------------------------------------------------

void cmd_modes_rmsd(Run& r) {
    const auto& m = r.manifest();
    const auto ms = load_modes(m);
    const double T = r.args.temperature_K.value_or(0.0);
    const double emax = r.args.e_max_cm.value_or(m.fit.e_max_cm);
    const auto rmsd = modes::rmsd_per_atom(ms, T, emax);
    auto& res = r.outcome.result;
    res["temperature_K"] = T;
    res["e_max_cm"] = emax;
    std::string csv = "atom,element,rmsd_A\n";
    ojson atoms = ojson::array();
    for (std::size_t a = 0; a < rmsd.size(); ++a) {
        csv += std::to_string(a) + "," + ms.atoms[a].element + "," + num(rmsd[a]) + "\n";
        atoms.push_back({{"atom", a}, {"element", ms.atoms[a].element}, {"rmsd_A", rmsd[a]}});
    }
    res["atoms"] = atoms;
    if (m.core) {
        res["core_mean_rmsd_A"] = modes::mean_over(rmsd, m.core->atoms());
        res["center_rmsd_A"] = rmsd.at(m.core->center);
    }
    r.write("rmsd.csv", csv);
}

void cmd_modes_stretch(Run& r) {
    const auto& m = r.manifest();
    if (!m.core) throw ValidationError("manifest field 'modes.core': required for stretch character");
    const auto ms = load_modes(m);
    const auto scores = modes::stretch_character(ms, *m.core);
    std::string csv = "rank,mode,freq_cm,score\n";
    ojson a = ojson::array();
    for (std::size_t i = 0; i < scores.size(); ++i) {
        csv += std::to_string(i + 1) + "," + std::to_string(scores[i].mode_index) + "," + num(scores[i].freq_cm) + "," +
               num(scores[i].score) + "\n";
        a.push_back({{"mode", scores[i].mode_index}, {"freq_cm", scores[i].freq_cm}, {"score", scores[i].score}});
    }
    r.outcome.result["ranking"] = a;
    r.write("stretch.csv", csv);
}

void cmd_modes_dos(Run& r) {
    const auto& m = r.manifest();
    const auto ms = load_modes(m);
    const double emax = r.args.e_max_cm.value_or(m.fit.e_max_cm + 100.0);
    const double bin = r.args.bin_cm.value_or(1.0);
    if (!(bin > 0.0) || !(emax > bin)) throw ValidationError("--bin must be positive and below --emax");
    const auto grid = EnergyGrid::uniform(0.0, emax, static_cast<std::size_t>(std::ceil(emax / bin)));
    const double T = r.args.temperature_K.value_or(300.0);
    const auto dos = modes::neutron_weighted_dos(ms, grid, {5.0, m.correction.normalization_cutoff_cm, T});
    std::string csv = "energy_cm,intensity\n";
    for (std::size_t i = 0; i < grid.size(); ++i) csv += num(grid.centers()[i]) + "," + num(dos.normalized.intensity[i]) + "\n";
    auto& res = r.outcome.result;
    res["temperature_K"] = T;
    res["e_max_cm"] = emax;
    res["bin_cm"] = bin;
    res["mode_weights"] = dos.mode_weights;
    r.write("dos.csv", csv);
}

// synth ---------------------------------------------------------------------

const std::vector<double> truth_edges{0.0, 185.0, 600.0};
const std::vector<double> truth_lambdas{0.068, 127.0};

synth::SynthSpec preset_spec(const std::string& preset, std::uint64_t seed) {
    if (preset == "two-band") return synth::two_band_spec(seed);
    if (preset == "comb") return synth::comb_spec(seed);
    throw ValidationError("--preset: expected two-band or comb, got '" + preset + "'");
}

ojson write_spectra(Run& r, const SpectrumSet& set, const std::string& prefix) {
    ojson entries = ojson::array();
    for (const auto& s : set.spectra()) {
        const std::string name = prefix + temp_tag(s.temperature_K) + ".csv";
        r.write(name, io::spectrum_csv(s));
        entries.push_back({{"path", name}, {"temperature_K", s.temperature_K}});
    }
    return entries;
}

spc::LambdaProfile truth_profile() {
    spc::LambdaProfile p;
    p.edges_cm = truth_edges;
    p.lambdas_per_us = truth_lambdas;
    return p;
}

void synth_dataset(Run& r, std::uint64_t seed) {
    const double noise = r.args.noise_rel.value_or(0.02);
    auto& res = r.outcome.result;
    const auto set = synth::generate_spectrum_set(synth::two_band_spec(seed));
    const auto spectra = write_spectra(r, set, "spectrum_");

    const auto temps = synth::log_spaced_temperatures(10.0, 300.0, 20);
    auto rates = synth::generate_rate_series(truth_profile(), set, temps, noise, seed + 1);
    for (auto& p : rates.points) {
        p.orientation = relax::Orientation::perpendicular;
        p.method = p.temperature_K < 30.0 ? relax::Method::saturation : relax::Method::inversion;
    }
    r.write("rates.csv", io::rate_csv(rates));

    ojson traces = ojson::array();
    const auto trace_temps = synth::log_spaced_temperatures(10.0, 300.0, 10);
    for (std::size_t i = 0; i < trace_temps.size(); ++i) {
        const double T = trace_temps[i];
        const double t1 = 1.0 / spc::forward_rate(truth_profile(), set, T);
        const auto kind = T < 30.0 ? relax::TraceKind::saturation : relax::TraceKind::inversion;
        const auto tr = synth::generate_recovery_trace(t1, 1.0, kind, 0.01, seed + 10 + i);
        const std::string name = "trace_" + temp_tag(T) + ".csv";
        r.write(name, io::trace_csv(tr));
        traces.push_back({{"path", name},
                          {"temperature_K", T},
                          {"kind", relax::to_string(kind)},
                          {"orientation", "perpendicular"}});
    }

    const std::vector<synth::SynthReflection> refl{{3.34, 0.02, 100.0, 1.5e-5}, {4.12, 0.025, 60.0, 2.0e-5}};
    std::vector<double> d_grid;
    for (int i = 0; i <= 2200; ++i) d_grid.push_back(3.2 + 0.0005 * i);
    ojson patterns = ojson::array();
    const std::vector<double> pattern_temps{5.0, 50.0, 100.0, 150.0, 200.0, 250.0, 300.0};
    for (std::size_t i = 0; i < pattern_temps.size(); ++i) {
        const double T = pattern_temps[i];
        const auto p = synth::generate_diffraction_pattern(refl, T, 300.0, d_grid, 0.005, seed + 20 + i);
        const std::string name = "pattern_" + temp_tag(T) + ".csv";
        r.write(name, io::pattern_csv(p));
        patterns.push_back({{"path", name}, {"temperature_K", T}});
    }

    const auto ms = synth::planar_core_mode_set();
    r.write("modes.json", io::mode_set_json(ms));

    ojson man;
    man["schema_version"] = manifest_schema_version;
    man["dataset"] = "two_band";
    man["spectra"] = {{"stage", "normalized"}, {"representation", "instrument"}, {"entries", spectra}};
    man["rates"] = ojson::array({{{"path", "rates.csv"}, {"label", "rates"}}});
    man["traces"] = traces;
    man["diffraction"] = {
        {"patterns", patterns},
        {"peaks",
         ojson::array({{{"d0_A", 3.34}, {"half_width_A", 0.05}, {"label", "d334"}, {"reference_d_A", 3.34}},
                       {{"d0_A", 4.12}, {"half_width_A", 0.06}, {"label", "d412"}, {"reference_d_A", 4.12}}})}};
    man["phonon_peaks"] = {{"profile", "gaussian"},
                           {"seeds", ojson::array({{{"center_cm", 320.0}, {"half_width_cm", 45.0}, {"label", "band320"}},
                                                   {{"center_cm", 450.0}, {"half_width_cm", 60.0}, {"label", "band450"}}})}};
    man["modes"] = {{"path", "modes.json"}, {"core", {{"center", 0}, {"ligands", {1, 2, 3, 4}}}}};
    man["correction"] = {{"normalization_cutoff_cm", 600.0}};
    man["fit"] = {{"edges_cm", truth_edges},
                  {"t_floor_K", 10.0},
                  {"normalization_cutoffs_cm", {500.0, 600.0, 700.0}},
                  {"switch_temperature_K", 30.0}};
    man["seeds"] = {seed};
    man["truth"] = {{"edges_cm", truth_edges},
                    {"lambdas_per_us", truth_lambdas},
                    {"rate_noise_rel", noise},
                    {"trace_t1_us", ojson::array()},
                    {"reflections", ojson::array()}};
    for (double T : trace_temps) man["truth"]["trace_t1_us"].push_back(1.0 / spc::forward_rate(truth_profile(), set, T));
    for (const auto& x : refl)
        man["truth"]["reflections"].push_back({{"d0_A", x.d0_A}, {"alpha_per_K", x.alpha_per_K}, {"reference_temperature_K", 300.0}});
    r.write("manifest.json", man.dump(2) + "\n");
    res["dataset"] = "two_band";
    res["truth"] = man["truth"];
}

void cmd_synth(Run& r) {
    const auto& a = r.args;
    const std::uint64_t seed = a.seed;
    r.outcome.seeds = {seed};
    auto& res = r.outcome.result;
    res["generator"] = a.generator;
    res["seed"] = seed;
    res["rng_algorithm"] = synth::rng_algorithm;
    const auto temps = a.temps_K.empty() ? synth::log_spaced_temperatures(10.0, 300.0, 20) : a.temps_K;
    if (a.generator == "spectra") {
        auto spec = preset_spec(a.preset, seed);
        if (a.noise_rel) spec.noise_rel = *a.noise_rel;
        res["preset"] = a.preset;
        res["spectra"] = write_spectra(r, synth::generate_spectrum_set(spec), "spectrum_");
    } else if (a.generator == "rates") {
        const auto set = synth::generate_spectrum_set(preset_spec(a.preset, seed));
        const double noise = a.noise_rel.value_or(0.05);
        auto p = truth_profile();
        if (!a.edges_cm.empty()) p.edges_cm = a.edges_cm;
        p.validate();
        r.write("rates.csv", io::rate_csv(synth::generate_rate_series(p, set, temps, noise, seed)));
        res["preset"] = a.preset;
        res["edges_cm"] = p.edges_cm;
        res["lambdas_per_us"] = p.lambdas_per_us;
        res["noise_rel"] = noise;
    } else if (a.generator == "localmode") {
        const double noise = a.noise_rel.value_or(0.05);
        const std::vector<synth::LocalModeTruth> modes{{2.0e-2, 42.5}, {40.0, 264.8}};
        r.write("rates.csv", io::rate_csv(synth::generate_local_mode_series(1e-5, modes, temps, noise, seed)));
        res["a_dir_per_us_per_K"] = 1e-5;
        res["modes"] = ojson::array();
        for (const auto& m : modes) res["modes"].push_back({{"amplitude_per_us", m.amplitude_per_us}, {"energy_cm", m.energy_cm}});
        res["noise_rel"] = noise;
    } else if (a.generator == "debye") {
        const double noise = a.noise_rel.value_or(0.05);
        r.write("rates.csv", io::rate_csv(synth::generate_debye_series(1e-5, 1e-16, 120.0, temps, noise, seed)));
        res["a_dir_per_us_per_K"] = 1e-5;
        res["c_raman_per_us_per_K9"] = 1e-16;
        res["theta_D_K"] = 120.0;
        res["noise_rel"] = noise;
    } else if (a.generator == "traces") {
        const double noise = a.noise_rel.value_or(0.01);
        res["traces"] = ojson::array();
        const std::vector<double> t1s{1e4, 1e3, 1e2, 10.0};
        for (std::size_t i = 0; i < t1s.size(); ++i) {
            const auto kind = i < 2 ? relax::TraceKind::saturation : relax::TraceKind::inversion;
            const std::string name = "trace_" + std::to_string(i) + ".csv";
            r.write(name, io::trace_csv(synth::generate_recovery_trace(t1s[i], 1.0, kind, noise, seed + i)));
            res["traces"].push_back({{"file", name}, {"t1_us", t1s[i]}, {"kind", relax::to_string(kind)}});
        }
    } else if (a.generator == "dataset") {
        synth_dataset(r, seed);
    } else {
        throw ValidationError("synth: unknown generator '" + a.generator +
                              "' (expected spectra, rates, localmode, debye, traces or dataset)");
    }
}

using Handler = std::function<void(Run&)>;

const std::map<std::string, Handler>& handlers() {
    static const std::map<std::string, Handler> h{
        {"correct", cmd_correct},
        {"boseweight", cmd_boseweight},
        {"t1 fit-traces", cmd_t1_fit_traces},
        {"t1 assemble", cmd_t1_assemble},
        {"t1 localmode", cmd_t1_localmode},
        {"t1 debye", cmd_t1_debye},
        {"t1 slope", cmd_t1_slope},
        {"spc fit", cmd_spc_fit},
        {"spc scan", cmd_spc_scan},
        {"spc density", cmd_spc_density},
        {"spc sweep", cmd_spc_sweep},
        {"lattice volume", cmd_lattice_volume},
        {"anharm peaks", cmd_anharm_peaks},
        {"anharm gruneisen", cmd_anharm_gruneisen},
        {"modes rmsd", cmd_modes_rmsd},
        {"modes stretch", cmd_modes_stretch},
        {"modes dos", cmd_modes_dos},
        {"synth", cmd_synth},
    };
    return h;
}

} // namespace

bool needs_manifest(const std::string& command) { return command != "synth"; }

ojson command_args(const std::string& command, const Args& a) {
    ojson j = ojson::object();
    auto put = [&](const char* key, const auto& v) { j[key] = v; };
    auto put_opt = [&](const char* key, const auto& v) {
        if (v) j[key] = *v;
    };
    if (command == "boseweight" || command == "spc density") put("temps_K", a.temps_K);
    if (command.rfind("spc ", 0) == 0 && command != "spc scan") put("edges_cm", a.edges_cm);
    if (command == "spc scan") put("grid_cm", a.grid_cm);
    if (command == "t1 localmode") put_opt("n_modes", a.n_modes);
    if (command == "t1 slope") put_opt("window", a.window);
    if (command.rfind("modes ", 0) == 0) {
        put_opt("e_max_cm", a.e_max_cm);
        put_opt("temperature_K", a.temperature_K);
    }
    if (command == "modes dos") put_opt("bin_cm", a.bin_cm);
    if (command == "synth") {
        put("generator", a.generator);
        put("preset", a.preset);
        put("seed", a.seed);
        put("temps_K", a.temps_K);
        put("edges_cm", a.edges_cm);
        put_opt("noise_rel", a.noise_rel);
    }
    return j;
}

Outcome run_command(const std::string& command, const Args& args, const Manifest* manifest, const fs::path& out_dir) {
    const auto& h = handlers();
    const auto it = h.find(command);
    if (it == h.end()) throw ValidationError("unknown command '" + command + "'");
    if (needs_manifest(command) && manifest == nullptr) throw ValidationError("--manifest is required for " + command);
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());
    Run run{args, manifest, out_dir, {}};
    run.outcome.result["command"] = command;
    if (manifest) {
        run.outcome.result["dataset"] = manifest->dataset;
        run.outcome.seeds = manifest->seeds;
    }
    run.outcome.result["files"] = ojson::array();
    it->second(run);
    // Keep the file list last for readability.
    auto files = run.outcome.result["files"];
    run.outcome.result.erase("files");
    run.outcome.result["files"] = files;
    return run.outcome;
}

} // namespace spclab::cli
