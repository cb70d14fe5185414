#include "fwmpairs/harness.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "fwmpairs/errors.hpp"

namespace fwm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Rates, contrast and ratios without the strict undefined-value errors of
// to_metrics; drivers emit NaN for columns a short run could not populate.
MetricsRecord lenient_metrics(const CountsRecord& counts, const DetectionSpec& det) {
    MetricsRecord m;
    m.label = counts.label;
    m.integration_s = counts.integration_s;
    const double t = counts.integration_s;
    m.d_s = static_cast<double>(counts.n_s) / t;
    m.d_i = static_cast<double>(counts.n_i) / t;
    m.d_c = static_cast<double>(counts.n_c) / t;
    m.d_a = static_cast<double>(counts.n_a) / t;
    m.d_s_sigma = std::sqrt(static_cast<double>(counts.n_s)) / t;
    m.d_i_sigma = std::sqrt(static_cast<double>(counts.n_i)) / t;
    m.d_c_sigma = std::sqrt(static_cast<double>(counts.n_c)) / t;
    m.d_a_sigma = std::sqrt(static_cast<double>(counts.n_a)) / t;
    m.contrast = counts.n_a > 0 ? static_cast<double>(counts.n_c) / counts.n_a : kNaN;
    if (counts.label == RecordLabel::cross) {
        m.r_s = counts.n_s > 0 ? (m.d_c - m.d_a) / (det.eta_i * m.d_s) : kNaN;
        m.r_i = counts.n_i > 0 ? (m.d_c - m.d_a) / (det.eta_s * m.d_i) : kNaN;
    } else {
        m.r_s = m.r_i = kNaN;
    }
    m.v = m.sigma_v = m.v_over_sigma = kNaN;
    return m;
}

// Expected-count Poisson sigmas attached to the analytic rates.
MetricsRecord analytic_metrics(const AnalyticRates& r, const DetectionSpec& det, double t,
                               RecordLabel label) {
    MetricsRecord m;
    m.label = label;
    m.integration_s = t;
    m.d_s = r.d_s;
    m.d_i = r.d_i;
    m.d_c = r.d_c;
    m.d_a = r.d_a;
    m.d_s_sigma = std::sqrt(r.d_s / t);
    m.d_i_sigma = std::sqrt(r.d_i / t);
    m.d_c_sigma = std::sqrt(r.d_c / t);
    m.d_a_sigma = std::sqrt(r.d_a / t);
    m.contrast = r.d_a > 0.0 ? r.d_c / r.d_a : kNaN;
    if (label == RecordLabel::cross) {
        m.r_s = r.d_s > 0.0 ? (r.d_c - r.d_a) / (det.eta_i * r.d_s) : kNaN;
        m.r_i = r.d_i > 0.0 ? (r.d_c - r.d_a) / (det.eta_s * r.d_i) : kNaN;
    } else {
        m.r_s = m.r_i = kNaN;
    }
    m.v = m.sigma_v = m.v_over_sigma = kNaN;
    return m;
}

MetricsRecord analytic_self_metrics(const AnalyticSelfRates& r, double t, RecordLabel label) {
    AnalyticRates as;
    as.d_s = r.d_single;
    as.d_i = r.d_single;
    as.d_c = r.d_c;
    as.d_a = r.d_a;
    DetectionSpec unused;
    return analytic_metrics(as, unused, t, label);
}

}  // namespace

CalibratedModels ensure_models(const ExperimentConfig& cfg) {
    cfg.validate();
    CalibratedModels models;
    if (cfg.dispersion) {
        models.dispersion = *cfg.dispersion;
    } else {
        models.dispersion =
            calibrate_dispersion(cfg.pump, cfg.fiber, cfg.calibration.matched_signal_m,
                                 cfg.calibration.walkoff_s, cfg.calibration.power_W);
    }
    if (cfg.source) {
        models.source = *cfg.source;
    } else {
        models.source = calibrate_source(cfg.calibration.reference, cfg.detection, cfg.pump,
                                         cfg.fiber, cfg.collection);
    }
    return models;
}

std::uint64_t pulses_for(const ExperimentConfig& cfg, double power_W) {
    const double t = cfg.integration.seconds_for(power_W);
    const double n = std::round(t * cfg.pump.repetition_rate_hz);
    if (!(n >= 1.0)) throw ConfigError("integration time yields no pulses");
    return static_cast<std::uint64_t>(n);
}

std::uint64_t scenario_id(std::string_view label) { return fnv1a64(label); }

CountsRecord to_counts_record(const ClickCounts& c, RecordLabel label, double repetition_rate_hz) {
    CountsRecord rec;
    rec.label = label;
    rec.n_s = c.s;
    rec.n_i = c.i;
    rec.n_c = c.c;
    rec.n_a = c.a;
    rec.n_pulses = c.pulses;
    rec.integration_s = static_cast<double>(c.pulses) / repetition_rate_hz;
    return rec;
}

std::size_t Table::column_index(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return i;
    throw std::out_of_range("Table: no column named '" + std::string(name) + "'");
}

double Table::at(std::size_t row, std::string_view name) const {
    return rows.at(row).at(column_index(name));
}

std::string to_csv(const Table& table) {
    std::string out;
    for (std::size_t i = 0; i < table.columns.size(); ++i) {
        if (i) out += ',';
        out += table.columns[i];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

// ---------------------------------------------------------------------------
// Power sweep (Fig 2(b)-(d) analogue)
// ---------------------------------------------------------------------------

ScanResult run_power_sweep(const ExperimentConfig& cfg, bool analytic_only) {
    const CalibratedModels models = ensure_models(cfg);
    ScanResult result;
    result.provenance = {config_hash(cfg), cfg.run.master_seed, kVersion, "sweep-power"};

    Table& t = result.table;
    t.columns = {"power_mW", "integration_s", "pulses"};
    if (!analytic_only) {
        for (const char* c :
             {"mc_D_s_hz", "mc_D_s_sigma_hz", "mc_D_i_hz", "mc_D_i_sigma_hz", "mc_D_c_hz",
              "mc_D_c_sigma_hz", "mc_D_a_hz", "mc_D_a_sigma_hz", "mc_contrast", "mc_R_s", "mc_R_i"})
            t.columns.push_back(c);
    }
    for (const char* c : {"an_D_s_hz", "an_D_i_hz", "an_D_c_hz", "an_D_a_hz", "an_contrast",
                          "an_R_s", "an_R_i"})
        t.columns.push_back(c);

    for (std::size_t idx = 0; idx < cfg.sweep_powers_W.size(); ++idx) {
        const double power = cfg.sweep_powers_W[idx];
        const auto components = make_components(models.source, power, cfg.fiber, cfg.pump);
        const std::uint64_t pulses = pulses_for(cfg, power);
        const double t_int = static_cast<double>(pulses) / cfg.pump.repetition_rate_hz;
        const AnalyticRates an = analytic_rates(components, cfg.detection, cfg.pump.repetition_rate_hz);
        const MetricsRecord an_m = analytic_metrics(an, cfg.detection, t_int, RecordLabel::cross);

        std::vector<double> row{power * 1e3, t_int, static_cast<double>(pulses)};
        if (!analytic_only) {
            const PulseSampler sampler(components, cfg.detection);
            const CrossClickKernel kernel(sampler);
            const ClickCounts counts = execute_batches(
                pulses, cfg.run.batch_size, cfg.run.workers, cfg.run.master_seed,
                scenario_id("sweep/" + std::to_string(idx) + "/cross"), kernel);
            const MetricsRecord mc =
                lenient_metrics(to_counts_record(counts, RecordLabel::cross,
                                                 cfg.pump.repetition_rate_hz),
                                cfg.detection);
            for (double v : {mc.d_s, mc.d_s_sigma, mc.d_i, mc.d_i_sigma, mc.d_c, mc.d_c_sigma,
                             mc.d_a, mc.d_a_sigma, mc.contrast, mc.r_s, mc.r_i})
                row.push_back(v);
        }
        for (double v : {an_m.d_s, an_m.d_i, an_m.d_c, an_m.d_a, an_m.contrast, an_m.r_s, an_m.r_i})
            row.push_back(v);
        t.rows.push_back(std::move(row));
    }

    // Log-log slopes over the high-power half of the axis.
    const char* s_col = analytic_only ? "an_D_s_hz" : "mc_D_s_hz";
    const char* i_col = analytic_only ? "an_D_i_hz" : "mc_D_i_hz";
    std::vector<std::pair<double, double>> sig_pts, idl_pts;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double p_mw = t.at(r, "power_mW");
        if (p_mw < 0.4 - 1e-12 || p_mw > 1.0 + 1e-12) continue;
        const double ds = t.at(r, s_col), di = t.at(r, i_col);
        if (ds > 0.0) sig_pts.push_back({p_mw, ds});
        if (di > 0.0) idl_pts.push_back({p_mw, di});
    }
    try {
        if (sig_pts.size() >= 3) result.scalars["signal_exponent"] = fit_power_law(sig_pts);
        if (idl_pts.size() >= 3) result.scalars["idler_exponent"] = fit_power_law(idl_pts);
    } catch (const NumericalError& e) {
        result.fit_error = e.what();
    }
    return result;
}

// ---------------------------------------------------------------------------
// Spectral scan (Fig 2(a) analogue)
// ---------------------------------------------------------------------------

ScanResult run_spectral_scan(const ExperimentConfig& cfg, bool analytic_only) {
    const CalibratedModels models = ensure_models(cfg);
    ScanResult result;
    result.provenance = {config_hash(cfg), cfg.run.master_seed, kVersion, "scan-spectrum"};

    PumpSpec pump = cfg.pump;
    pump.average_power_W = cfg.scan.power_W;
    const double power = cfg.scan.power_W;
    const auto [mu_rs, mu_ri] = raman_means(power, models.source);
    const double mu_f = mean_pair_number(power, models.source, cfg.fiber, pump);
    const std::uint64_t pulses = pulses_for(cfg, power);
    const double t_int = static_cast<double>(pulses) / cfg.pump.repetition_rate_hz;

    Table& t = result.table;
    t.columns = {"offset_nm", "integration_s", "pulses", "w_joint", "w_signal"};
    if (!analytic_only) {
        for (const char* c : {"mc_D_s_hz", "mc_D_s_sigma_hz", "mc_D_i_hz", "mc_D_c_hz",
                              "mc_D_c_sigma_hz", "mc_D_a_hz", "mc_D_a_sigma_hz", "mc_contrast"})
            t.columns.push_back(c);
    }
    for (const char* c : {"an_D_s_hz", "an_D_i_hz", "an_D_c_hz", "an_D_a_hz", "an_contrast"})
        t.columns.push_back(c);

    const auto offsets = cfg.scan.offsets_m();
    std::vector<FitPoint> fit_points;
    for (std::size_t idx = 0; idx < offsets.size(); ++idx) {
        const double offset = offsets[idx];
        const double wj =
            spectral_weight(offset, pump, cfg.fiber, models.dispersion, cfg.collection);
        const double ws = spectral_weight_signal_marginal(offset, pump, cfg.fiber,
                                                          models.dispersion, cfg.collection);
        // Pairs follow the joint weight; photons whose partner misses the fixed
        // idler window stay behind as uncorrelated background in their own arm.
        std::vector<ArmComponent> components{
            {mu_f * wj, models.source.pair_modes, true, true},
            {mu_f * std::max(ws - wj, 0.0), models.source.pair_modes, true, false},
            {mu_f * std::max(1.0 - wj, 0.0), models.source.pair_modes, false, true},
            {mu_rs, models.source.modes_s, true, false},
            {mu_ri, models.source.modes_i, false, true},
        };
        const AnalyticRates an =
            analytic_rates(components, cfg.detection, cfg.pump.repetition_rate_hz);

        std::vector<double> row{offset * 1e9, t_int, static_cast<double>(pulses), wj, ws};
        double mc_contrast = kNaN, mc_contrast_sigma = kNaN;
        if (!analytic_only) {
            const PulseSampler sampler(components, cfg.detection);
            const CrossClickKernel kernel(sampler);
            const ClickCounts counts = execute_batches(
                pulses, cfg.run.batch_size, cfg.run.workers, cfg.run.master_seed,
                scenario_id("scan/" + std::to_string(idx) + "/cross"), kernel);
            const MetricsRecord mc =
                lenient_metrics(to_counts_record(counts, RecordLabel::cross,
                                                 cfg.pump.repetition_rate_hz),
                                cfg.detection);
            for (double v : {mc.d_s, mc.d_s_sigma, mc.d_i, mc.d_c, mc.d_c_sigma, mc.d_a,
                             mc.d_a_sigma, mc.contrast})
                row.push_back(v);
            mc_contrast = mc.contrast;
            if (counts.c > 0 && counts.a > 0)
                mc_contrast_sigma =
                    mc.contrast * std::sqrt(1.0 / counts.c + 1.0 / counts.a);
        }
        const double an_contrast = an.d_a > 0.0 ? an.d_c / an.d_a : kNaN;
        for (double v : {an.d_s, an.d_i, an.d_c, an.d_a, an_contrast}) row.push_back(v);
        t.rows.push_back(std::move(row));

        const double y = analytic_only ? an_contrast : mc_contrast;
        if (std::isfinite(y))
            fit_points.push_back({offset * 1e9, y,
                                  analytic_only || !std::isfinite(mc_contrast_sigma)
                                      ? 0.0
                                      : mc_contrast_sigma});
    }

    try {
        result.gaussian_fit = fit_gaussian(fit_points);
    } catch (const NumericalError& e) {
        result.fit_error = e.what();
    }
    return result;
}

// ---------------------------------------------------------------------------
// ZWM nonclassicality test (Fig 3 analogue)
// ---------------------------------------------------------------------------

ScanResult run_zwm(const ExperimentConfig& cfg, bool analytic_only) {
    const CalibratedModels models = ensure_models(cfg);
    ScanResult result;
    result.provenance = {config_hash(cfg), cfg.run.master_seed, kVersion, "zwm-test"};

    Table& t = result.table;
    t.columns = {"power_mW", "integration_s", "pulses"};
    if (!analytic_only) {
        for (const char* c :
             {"mc_D_c_hz", "mc_D_a_hz", "mc_self_s_c_hz", "mc_self_s_a_hz", "mc_self_i_c_hz",
              "mc_self_i_a_hz", "mc_self_contrast_s", "mc_self_contrast_i", "mc_V_hz",
              "mc_sigma_V_hz", "mc_V_over_sigma"})
            t.columns.push_back(c);
    }
    for (const char* c : {"an_D_c_hz", "an_D_a_hz", "an_self_s_c_hz", "an_self_s_a_hz",
                          "an_self_i_c_hz", "an_self_i_a_hz", "an_self_contrast_s",
                          "an_self_contrast_i", "an_V_hz", "an_sigma_V_hz", "an_V_over_sigma"})
        t.columns.push_back(c);

    for (std::size_t idx = 0; idx < cfg.zwm_powers_W.size(); ++idx) {
        const double power = cfg.zwm_powers_W[idx];
        const auto components = make_components(models.source, power, cfg.fiber, cfg.pump);
        const std::uint64_t pulses = pulses_for(cfg, power);
        const double t_int = static_cast<double>(pulses) / cfg.pump.repetition_rate_hz;
        const double rep = cfg.pump.repetition_rate_hz;

        const AnalyticRates an_cross = analytic_rates(components, cfg.detection, rep);
        const AnalyticSelfRates an_ss = analytic_self_rates(components, cfg.detection, rep, true);
        const AnalyticSelfRates an_si = analytic_self_rates(components, cfg.detection, rep, false);
        const MetricsRecord an_cross_m =
            analytic_metrics(an_cross, cfg.detection, t_int, RecordLabel::cross);
        const MetricsRecord an_ss_m = analytic_self_metrics(an_ss, t_int, RecordLabel::self_signal);
        const MetricsRecord an_si_m = analytic_self_metrics(an_si, t_int, RecordLabel::self_idler);
        const ZwmResult an_v = zwm_v(an_cross_m, an_ss_m, an_si_m);

        std::vector<double> row{power * 1e3, t_int, static_cast<double>(pulses)};
        if (!analytic_only) {
            const PulseSampler sampler(components, cfg.detection);
            const PulseSampler sig_arm = sampler.arm_only(true);
            const PulseSampler idl_arm = sampler.arm_only(false);
            const std::string base = "zwm/" + std::to_string(idx) + "/";
            const ClickCounts cross_counts = execute_batches(
                pulses, cfg.run.batch_size, cfg.run.workers, cfg.run.master_seed,
                scenario_id(base + "cross"), CrossClickKernel(sampler));
            const ClickCounts ss_counts = execute_batches(
                pulses, cfg.run.batch_size, cfg.run.workers, cfg.run.master_seed,
                scenario_id(base + "self_s"), SelfClickKernel(sig_arm, true));
            const ClickCounts si_counts = execute_batches(
                pulses, cfg.run.batch_size, cfg.run.workers, cfg.run.master_seed,
                scenario_id(base + "self_i"), SelfClickKernel(idl_arm, false));
            const MetricsRecord mc_cross = lenient_metrics(
                to_counts_record(cross_counts, RecordLabel::cross, rep), cfg.detection);
            const MetricsRecord mc_ss = lenient_metrics(
                to_counts_record(ss_counts, RecordLabel::self_signal, rep), cfg.detection);
            const MetricsRecord mc_si = lenient_metrics(
                to_counts_record(si_counts, RecordLabel::self_idler, rep), cfg.detection);
            const ZwmResult mc_v = zwm_v(mc_cross, mc_ss, mc_si);
            for (double v : {mc_cross.d_c, mc_cross.d_a, mc_ss.d_c, mc_ss.d_a, mc_si.d_c,
                             mc_si.d_a, mc_ss.contrast, mc_si.contrast, mc_v.v, mc_v.sigma,
                             mc_v.v_over_sigma})
                row.push_back(v);
        }
        const double an_cs = an_ss.d_a > 0.0 ? an_ss.d_c / an_ss.d_a : kNaN;
        const double an_ci = an_si.d_a > 0.0 ? an_si.d_c / an_si.d_a : kNaN;
        for (double v : {an_cross.d_c, an_cross.d_a, an_ss.d_c, an_ss.d_a, an_si.d_c, an_si.d_a,
                         an_cs, an_ci, an_v.v, an_v.sigma, an_v.v_over_sigma})
            row.push_back(v);
        t.rows.push_back(std::move(row));
    }
    return result;
}

std::string metadata_json(const ScanResult& result, const ExperimentConfig& cfg,
                          const std::vector<std::string>& overrides) {
    nlohmann::json j;
    j["tool"] = "fwmpairs";
    j["version"] = result.provenance.version;
    j["subcommand"] = result.provenance.subcommand;
    j["config_hash"] = result.provenance.config_hash;
    j["master_seed"] = result.provenance.master_seed;
    j["workers"] = cfg.run.workers;
    j["batch_size"] = cfg.run.batch_size;
    j["overrides"] = overrides;
    if (result.gaussian_fit) {
        const auto& f = *result.gaussian_fit;
        j["gaussian_fit"] = {{"center_nm", f.center}, {"fwhm_nm", f.fwhm},
                             {"amplitude", f.amplitude}, {"baseline", f.baseline},
                             {"residual", f.residual}, {"converged", f.converged},
                             {"iterations", f.iterations}};
    }
    if (!result.fit_error.empty()) j["fit_error"] = result.fit_error;
    for (const auto& [name, value] : result.scalars) j[name] = value;
    return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Selftest
// ---------------------------------------------------------------------------

namespace {

struct MomentCounts {
    std::uint64_t pulses = 0;
    std::uint64_t sum = 0;
    std::uint64_t sum_sq = 0;
    std::uint64_t sum_pair = 0;     // n*(n-1)
    std::uint64_t sum_pair_sq = 0;  // (n*(n-1))^2

    void merge(const MomentCounts& o) {
        pulses += o.pulses;
        sum += o.sum;
        sum_sq += o.sum_sq;
        sum_pair += o.sum_pair;
        sum_pair_sq += o.sum_pair_sq;
    }
};

}  // namespace

std::vector<CheckResult> run_selftest(const ExperimentConfig& cfg, const SelftestFixture& fx) {
    std::vector<CheckResult> checks;
    auto add = [&checks](const std::string& name, bool pass, const std::string& detail) {
        checks.push_back({name, pass, detail});
    };

    // 1. Solver against the beta2 = 0 closed form.
    try {
        DispersionModel model;
        model.reference_wavelength_m = cfg.pump.wavelength_m;
        model.beta2_s2_per_m = 0.0;
        model.beta4_s4_per_m = fx.beta4_sign * 1e-55;
        PumpSpec pump = cfg.pump;
        pump.average_power_W = 6.4e-4;  // peak power 1 W at the default duty factor
        const double pk = peak_power(pump);
        const auto [ls, li] = solve_phase_matched_signal(pump, cfg.fiber, model);
        (void)li;
        const double w = signal_detuning(ls, model.reference_wavelength_m);
        const double closed =
            std::pow(24.0 * cfg.fiber.gamma_per_W_m * pk / std::abs(model.beta4_s4_per_m), 0.25);
        const double rel = std::abs(w - closed) / closed;
        add("solver-closed-form", rel < 1e-6, "relative error " + format_double(rel));
    } catch (const std::exception& e) {
        add("solver-closed-form", false, e.what());
    }

    // 2. Negative-binomial sample moments at 5 sigma (reduced scale).
    try {
        const double mean = 0.1, modes = 2.5;
        const NbTable table(mean, modes);
        Xoshiro256StarStar rng = make_stream(cfg.run.master_seed, scenario_id("selftest/nb"), 0);
        MomentCounts mc;
        mc.pulses = fx.pulses;
        for (std::uint64_t k = 0; k < fx.pulses; ++k) {
            const std::uint64_t n = table.sample(rng);
            mc.sum += n;
            mc.sum_sq += n * n;
            const std::uint64_t pair = n * (n - (n > 0 ? 1 : 0));
            mc.sum_pair += pair;
            mc.sum_pair_sq += pair * pair;
        }
        const double n = static_cast<double>(mc.pulses);
        const double mean_hat = static_cast<double>(mc.sum) / n;
        const double var_hat = static_cast<double>(mc.sum_sq) / n - mean_hat * mean_hat;
        const double se_mean = std::sqrt(var_hat / n);
        const bool mean_ok = std::abs(mean_hat - mean) < 5.0 * se_mean;
        const double pair_hat = static_cast<double>(mc.sum_pair) / n;
        const double pair_expect = mean * mean * (1.0 + 1.0 / modes);  // E n(n-1) of the NB
        const double pair_var =
            static_cast<double>(mc.sum_pair_sq) / n - pair_hat * pair_hat;
        const bool pair_ok = std::abs(pair_hat - pair_expect) < 5.0 * std::sqrt(pair_var / n);
        add("nb-moments", mean_ok && pair_ok,
            "mean " + format_double(mean_hat) + " vs " + format_double(mean) + ", E[n(n-1)] " +
                format_double(pair_hat) + " vs " + format_double(pair_expect));
    } catch (const std::exception& e) {
        add("nb-moments", false, e.what());
    }

    // 3. Accidentals factorize across pulses (reduced scale).
    try {
        const CalibratedModels models = ensure_models(cfg);
        const auto components =
            make_components(models.source, cfg.calibration.reference.power_W, cfg.fiber, cfg.pump);
        const PulseSampler sampler(components, cfg.detection);
        const CrossClickKernel kernel(sampler);
        const ClickCounts counts =
            execute_batches(fx.pulses, cfg.run.batch_size, cfg.run.workers, cfg.run.master_seed,
                            scenario_id("selftest/accidentals"), kernel);
        const double n = static_cast<double>(counts.pulses);
        const double expected = (static_cast<double>(counts.s) / n) *
                                (static_cast<double>(counts.i) / n) * n;
        const double sigma = std::sqrt(std::max(expected, 1.0));
        const bool ok = std::abs(static_cast<double>(counts.a) - expected) < 5.0 * sigma;
        add("accidental-factorization", ok,
            "N_a " + std::to_string(counts.a) + " vs " + format_double(expected));
    } catch (const std::exception& e) {
        add("accidental-factorization", false, e.what());
    }

    // 4. Dispersion calibration round trip.
    try {
        const DispersionModel model =
            calibrate_dispersion(cfg.pump, cfg.fiber, cfg.calibration.matched_signal_m,
                                 cfg.calibration.walkoff_s, cfg.calibration.power_W);
        PumpSpec pump = cfg.pump;
        pump.average_power_W = cfg.calibration.power_W;
        const auto [ls, li] = solve_phase_matched_signal(pump, cfg.fiber, model);
        const double wo = group_delay_walkoff(ls, li, model, cfg.fiber.length_m);
        const double rel_l = std::abs(ls - cfg.calibration.matched_signal_m) /
                             cfg.calibration.matched_signal_m;
        const double rel_w =
            std::abs(wo - cfg.calibration.walkoff_s) / std::abs(cfg.calibration.walkoff_s);
        add("calibration-roundtrip", rel_l < 1e-6 && rel_w < 1e-6,
            "wavelength rel " + format_double(rel_l) + ", walkoff rel " + format_double(rel_w));
    } catch (const std::exception& e) {
        add("calibration-roundtrip", false, e.what());
    }

    return checks;
}

}  // namespace fwm
