// fwmpairs command line: binds config files to the experiment drivers.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "fwmpairs/errors.hpp"
#include "fwmpairs/harness.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string out_dir;
    std::vector<std::string> overrides;
    std::uint64_t seed = 0;
    bool seed_set = false;
    unsigned workers = 0;
    bool workers_set = false;
    bool analytic_only = false;
};

std::string default_out_dir() {
    if (const char* env = std::getenv("FWMPAIRS_OUT")) return env;
    return ".";
}

fwm::ExperimentConfig load_with_overrides(const CommonOpts& opts) {
    fwm::ExperimentConfig cfg = opts.config_path.empty()
                                    ? fwm::ExperimentConfig{}
                                    : fwm::load_config_file(opts.config_path);
    for (const auto& o : opts.overrides) fwm::apply_override(cfg, o);
    if (opts.seed_set) cfg.run.master_seed = opts.seed;
    if (opts.workers_set) cfg.run.workers = opts.workers;
    cfg.validate();
    return cfg;
}

void write_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw fwm::ConfigError("cannot write " + path.string());
    out << contents;
}

void write_outputs(const fwm::ScanResult& result, const fwm::ExperimentConfig& cfg,
                   const CommonOpts& opts, const std::string& stem) {
    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / (stem + ".csv"), fwm::to_csv(result.table));
    write_file(dir / (stem + ".meta.json"), fwm::metadata_json(result, cfg, opts.overrides));
}

int run_calibrate(const CommonOpts& opts) {
    fwm::ExperimentConfig cfg = load_with_overrides(opts);
    const fwm::CalibratedModels models = fwm::ensure_models(cfg);

    fwm::ExperimentConfig derived = cfg;
    derived.dispersion = models.dispersion;
    derived.source = models.source;

    const std::filesystem::path dir(opts.out_dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "calibrated.cfg", fwm::serialize_config(derived));

    // Cross-prediction at the low-power check point, against the configured
    // measured values.
    const double p_check = cfg.calibration.crosscheck_power_W;
    const fwm::AnalyticRates an =
        fwm::analytic_rates(models.source, p_check, cfg.detection, cfg.pump, cfg.fiber);
    const double r_s = (an.d_c - an.d_a) / (cfg.detection.eta_i * an.d_s);
    const double r_i = (an.d_c - an.d_a) / (cfg.detection.eta_s * an.d_i);

    std::cout << "calibrated dispersion: beta2 = " << fwm::format_double(models.dispersion.beta2_s2_per_m)
              << " s^2/m, beta4 = " << fwm::format_double(models.dispersion.beta4_s4_per_m) << " s^4/m\n";
    std::cout << "calibrated source: kappa = " << fwm::format_double(models.source.kappa)
              << ", raman_s = " << fwm::format_double(models.source.c_raman_s_per_W)
              << " /W, raman_i = " << fwm::format_double(models.source.c_raman_i_per_W) << " /W\n";
    std::cout << "cross-check at " << fwm::format_double(p_check * 1e3) << " mW:\n";
    std::cout << "  R_s predicted " << fwm::format_double(r_s) << " vs measured "
              << fwm::format_double(cfg.calibration.crosscheck_ratio_signal) << "\n";
    std::cout << "  R_i predicted " << fwm::format_double(r_i) << " vs measured "
              << fwm::format_double(cfg.calibration.crosscheck_ratio_idler) << "\n";
    std::cout << "wrote " << (dir / "calibrated.cfg").string() << "\n";

    nlohmann::json j;
    j["tool"] = "fwmpairs";
    j["version"] = fwm::kVersion;
    j["subcommand"] = "calibrate";
    j["config_hash"] = fwm::config_hash(derived);
    j["kappa"] = models.source.kappa;
    j["beta2_s2_per_m"] = models.dispersion.beta2_s2_per_m;
    j["beta4_s4_per_m"] = models.dispersion.beta4_s4_per_m;
    j["crosscheck"] = {{"power_mW", p_check * 1e3},
                       {"R_s_predicted", r_s},
                       {"R_s_measured", cfg.calibration.crosscheck_ratio_signal},
                       {"R_i_predicted", r_i},
                       {"R_i_measured", cfg.calibration.crosscheck_ratio_idler}};
    write_file(dir / "calibrate.meta.json", j.dump(2) + "\n");
    return 0;
}

int run_sweep(const CommonOpts& opts) {
    const fwm::ExperimentConfig cfg = load_with_overrides(opts);
    const fwm::ScanResult result = fwm::run_power_sweep(cfg, opts.analytic_only);
    const char* c_col = opts.analytic_only ? "an_D_c_hz" : "mc_D_c_hz";
    const char* k_col = opts.analytic_only ? "an_contrast" : "mc_contrast";
    for (std::size_t r = 0; r < result.table.rows.size(); ++r) {
        std::cout << "P = " << fwm::format_double(result.table.at(r, "power_mW"))
                  << " mW: D_c = " << fwm::format_double(result.table.at(r, c_col))
                  << " Hz, C/A = " << fwm::format_double(result.table.at(r, k_col)) << "\n";
    }
    for (const auto& [name, value] : result.scalars)
        std::cout << name << " = " << fwm::format_double(value) << "\n";
    write_outputs(result, cfg, opts, "sweep-power");
    return 0;
}

int run_scan(const CommonOpts& opts) {
    const fwm::ExperimentConfig cfg = load_with_overrides(opts);
    const fwm::ScanResult result = fwm::run_spectral_scan(cfg, opts.analytic_only);
    const char* k_col = opts.analytic_only ? "an_contrast" : "mc_contrast";
    for (std::size_t r = 0; r < result.table.rows.size(); ++r) {
        std::cout << "offset = " << fwm::format_double(result.table.at(r, "offset_nm"))
                  << " nm: C/A = " << fwm::format_double(result.table.at(r, k_col)) << "\n";
    }
    if (result.gaussian_fit)
        std::cout << "gaussian fit: center = " << fwm::format_double(result.gaussian_fit->center)
                  << " nm, FWHM = " << fwm::format_double(result.gaussian_fit->fwhm) << " nm\n";
    else if (!result.fit_error.empty())
        std::cout << "gaussian fit failed: " << result.fit_error << "\n";
    write_outputs(result, cfg, opts, "scan-spectrum");
    return 0;
}

int run_zwm_cmd(const CommonOpts& opts) {
    const fwm::ExperimentConfig cfg = load_with_overrides(opts);
    const fwm::ScanResult result = fwm::run_zwm(cfg, opts.analytic_only);
    const char* v_col = opts.analytic_only ? "an_V_hz" : "mc_V_hz";
    const char* r_col = opts.analytic_only ? "an_V_over_sigma" : "mc_V_over_sigma";
    for (std::size_t r = 0; r < result.table.rows.size(); ++r) {
        std::cout << "P = " << fwm::format_double(result.table.at(r, "power_mW"))
                  << " mW: V = " << fwm::format_double(result.table.at(r, v_col))
                  << " Hz, V/sigma = " << fwm::format_double(result.table.at(r, r_col)) << "\n";
    }
    write_outputs(result, cfg, opts, "zwm-test");
    return 0;
}

int run_selftest_cmd(const CommonOpts& opts) {
    const fwm::ExperimentConfig cfg = load_with_overrides(opts);
    const auto checks = fwm::run_selftest(cfg);
    bool all_pass = true;
    for (const auto& c : checks) {
        std::cout << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  (" << c.detail << ")\n";
        all_pass = all_pass && c.pass;
    }
    return all_pass ? 0 : 4;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Correlated photon-pair simulator for four-wave mixing in microstructure fiber"};
    app.require_subcommand(1);

    CommonOpts opts;
    opts.out_dir = default_out_dir();

    auto add_common = [&opts](CLI::App* sub, bool config_required) {
        auto* c = sub->add_option("-c,--config", opts.config_path, "Experiment config file");
        if (config_required) c->required()->check(CLI::ExistingFile);
        sub->add_option("-o,--out", opts.out_dir, "Output directory");
        sub->add_option("--set", opts.overrides, "Override a config key (key=value), repeatable");
        sub->add_option("--seed", opts.seed, "Master seed override")
            ->each([&opts](const std::string&) { opts.seed_set = true; });
        sub->add_option("--workers", opts.workers, "Worker thread count (0 = hardware)")
            ->each([&opts](const std::string&) { opts.workers_set = true; });
        sub->add_flag("--analytic-only", opts.analytic_only,
                      "Skip Monte Carlo; emit analytic columns only");
    };

    auto* calibrate = app.add_subcommand("calibrate", "Derive dispersion and source models");
    add_common(calibrate, true);
    auto* sweep = app.add_subcommand("sweep-power", "Rates and contrast vs pump power");
    add_common(sweep, true);
    auto* scan = app.add_subcommand("scan-spectrum", "C/A vs signal window offset");
    add_common(scan, true);
    auto* zwm = app.add_subcommand("zwm-test", "Zou-Wang-Mandel V statistic vs pump power");
    add_common(zwm, true);
    auto* selftest = app.add_subcommand("selftest", "Reduced-scale internal consistency checks");
    add_common(selftest, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (calibrate->parsed()) return run_calibrate(opts);
        if (sweep->parsed()) return run_sweep(opts);
        if (scan->parsed()) return run_scan(opts);
        if (zwm->parsed()) return run_zwm_cmd(opts);
        if (selftest->parsed()) return run_selftest_cmd(opts);
    } catch (const fwm::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const fwm::CalibrationError& e) {
        std::cerr << "calibration error: " << e.what() << "\n";
        return 3;
    } catch (const fwm::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
