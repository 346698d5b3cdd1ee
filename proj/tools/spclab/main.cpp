#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "commands.hpp"
#include "spclab/error.hpp"
#include "spclab/io.hpp"
#include "spclab/parallel.hpp"
#include "spclab/synth.hpp"

namespace {

using spclab::cli::Args;
using ojson = nlohmann::ordered_json;

constexpr int exit_validation = 2;
constexpr int exit_convergence = 3;
constexpr int exit_io = 4;

std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return out;
}

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spin-phonon coupling analysis from vibrational spectra and relaxation data", "spclab"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    app.set_version_flag("--version", SPCLAB_VERSION);

    std::string manifest_path;
    std::string out_dir = ".";
    std::optional<int> threads;
    app.add_option("--manifest,-m", manifest_path, "Run manifest (JSON)");
    app.add_option("--out,-o", out_dir, "Output directory")->capture_default_str();
    app.add_option("--threads", threads, "Worker thread cap (sets SPCLAB_THREADS)")->check(CLI::PositiveNumber);

    Args a;
    std::string command;
    auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& full, const std::string& help) {
        auto* s = parent->add_subcommand(name, help);
        s->fallthrough();
        s->callback([&command, full] { command = full; });
        return s;
    };
    auto group = [&](const std::string& name, const std::string& help) {
        auto* g = app.add_subcommand(name, help);
        g->fallthrough();
        g->require_subcommand(1);
        return g;
    };

    leaf(&app, "correct", "correct", "Run the spectrum correction pipeline and write corrected spectra");
    leaf(&app, "boseweight", "boseweight", "Bose-weight spectra at given temperatures")
        ->add_option("--temps", a.temps_K, "Temperatures in K (default: the measured ones)");

    auto* t1 = group("t1", "Spin-lattice relaxation analysis");
    leaf(t1, "fit-traces", "t1 fit-traces", "Fit T1 to recovery traces");
    leaf(t1, "assemble", "t1 assemble", "Assemble rate series from rate files and traces");
    leaf(t1, "localmode", "t1 localmode", "Direct + local-mode fit")
        ->add_option("--modes", a.n_modes, "Number of local modes")
        ->check(CLI::Range(1, 4));
    leaf(t1, "debye", "t1 debye", "Direct + Debye Raman fit");
    leaf(t1, "slope", "t1 slope", "Local log-log slope of the rate")
        ->add_option("--window", a.window, "Points per regression window (odd, >= 3)");

    auto* spc = group("spc", "Windowed spin-phonon coupling coefficients");
    auto* fit = leaf(spc, "fit", "spc fit", "Fit lambda per energy window");
    fit->add_option("--edges", a.edges_cm, "Window edges in cm^-1")->delimiter(',');
    leaf(spc, "scan", "spc scan", "Scan the two-window cutoff")
        ->add_option("--grid", a.grid_cm, "Cutoffs in cm^-1 (default 25..575 step 10)")
        ->delimiter(',');
    auto* dens = leaf(spc, "density", "spc density", "Spectral density of the fitted rate");
    dens->add_option("--temps", a.temps_K, "Temperatures in K")->delimiter(',');
    dens->add_option("--edges", a.edges_cm, "Window edges in cm^-1")->delimiter(',');
    leaf(spc, "sweep", "spc sweep", "Refit across representations and normalization cutoffs")
        ->add_option("--edges", a.edges_cm, "Window edges in cm^-1")
        ->delimiter(',');

    auto* lat = group("lattice", "Diffraction peak tracking");
    leaf(lat, "volume", "lattice volume", "Track peaks and estimate volume expansion");

    auto* anh = group("anharm", "Phonon anharmonicity");
    leaf(anh, "peaks", "anharm peaks", "Track phonon peak centres and widths");
    leaf(anh, "gruneisen", "anharm gruneisen", "Mode Grueneisen parameters");

    auto* mod = group("modes", "Phonon mode analysis");
    auto* rmsd = leaf(mod, "rmsd", "modes rmsd", "Per-atom RMS displacement");
    rmsd->add_option("--emax", a.e_max_cm, "Mode energy ceiling in cm^-1");
    rmsd->add_option("--temp", a.temperature_K, "Temperature in K (default 0)");
    leaf(mod, "stretch", "modes stretch", "Rank modes by symmetric-stretch character");
    auto* dos = leaf(mod, "dos", "modes dos", "Neutron-weighted density of states");
    dos->add_option("--emax", a.e_max_cm, "Upper grid edge in cm^-1");
    dos->add_option("--temp", a.temperature_K, "Temperature label in K");
    dos->add_option("--bin", a.bin_cm, "Bin width in cm^-1");

    auto* syn = leaf(&app, "synth", "synth", "Generate synthetic data");
    syn->add_option("generator", a.generator, "spectra, rates, localmode, debye, traces or dataset")->required();
    syn->add_option("--seed", a.seed, "RNG seed")->capture_default_str();
    syn->add_option("--preset", a.preset, "Spectrum preset: two-band or comb")->capture_default_str();
    syn->add_option("--noise", a.noise_rel, "Relative noise level");
    syn->add_option("--temps", a.temps_K, "Temperatures in K")->delimiter(',');
    syn->add_option("--edges", a.edges_cm, "Window edges in cm^-1 (rates)")->delimiter(',');

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_validation;
    }

    if (threads) setenv("SPCLAB_THREADS", std::to_string(*threads).c_str(), 1);

    try {
        std::optional<spclab::cli::Manifest> manifest;
        if (!manifest_path.empty()) manifest = spclab::cli::read_manifest(manifest_path);
        const auto outcome = spclab::cli::run_command(command, a, manifest ? &*manifest : nullptr, out_dir);
        const auto args = spclab::cli::command_args(command, a);

        const std::string doc = manifest ? manifest->document.dump() : std::string("null");
        ojson run;
        run["tool"] = "spclab";
        run["version"] = SPCLAB_VERSION;
        run["command"] = command;
        run["args"] = args;
        run["manifest"] = manifest_path.empty() ? ojson(nullptr) : ojson(manifest_path);
        run["schema_version"] = spclab::cli::manifest_schema_version;
        run["config_hash_fnv1a64"] = hex(fnv1a64(doc + "\n" + command + "\n" + args.dump()));
        run["seeds"] = outcome.seeds;
        run["rng_algorithm"] = spclab::synth::rng_algorithm;
        run["threads"] = spclab::max_threads();
        run["timestamp_utc"] = utc_now();

        spclab::io::write_text(std::filesystem::path(out_dir) / "result.json", outcome.result.dump(2) + "\n");
        spclab::io::write_text(std::filesystem::path(out_dir) / "run.json", run.dump(2) + "\n");
        return 0;
    } catch (const spclab::ConvergenceError& e) {
        std::cerr << "spclab: fit did not converge: " << e.what() << "\n";
        return exit_convergence;
    } catch (const spclab::IoError& e) {
        std::cerr << "spclab: I/O error: " << e.what() << "\n";
        return exit_io;
    } catch (const spclab::ValidationError& e) {
        std::cerr << "spclab: invalid input: " << e.what() << "\n";
        return exit_validation;
    } catch (const std::exception& e) {
        std::cerr << "spclab: error: " << e.what() << "\n";
        return 1;
    }
}
