// Acceptance suite: runs every calibration/prediction criterion at its stated
// tolerance and prints one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "fwmpairs/config.hpp"
#include "fwmpairs/counting.hpp"
#include "fwmpairs/harness.hpp"

using namespace fwm;

namespace {

int g_failures = 0;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void report(int number, const std::string& name, bool pass, const std::string& detail) {
    std::printf("%s  criterion %2d: %s (%s)\n", pass ? "PASS" : "FAIL", number, name.c_str(),
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

struct Band {
    double lo, hi;
    bool contains(double v) const { return v >= lo && v <= hi; }
};

MetricsRecord raw_metrics(const CountsRecord& c) {
    MetricsRecord m;
    m.label = c.label;
    m.integration_s = c.integration_s;
    const double t = c.integration_s;
    m.d_s = static_cast<double>(c.n_s) / t;
    m.d_i = static_cast<double>(c.n_i) / t;
    m.d_c = static_cast<double>(c.n_c) / t;
    m.d_a = static_cast<double>(c.n_a) / t;
    m.d_s_sigma = std::sqrt(static_cast<double>(c.n_s)) / t;
    m.d_i_sigma = std::sqrt(static_cast<double>(c.n_i)) / t;
    m.d_c_sigma = std::sqrt(static_cast<double>(c.n_c)) / t;
    m.d_a_sigma = std::sqrt(static_cast<double>(c.n_a)) / t;
    return m;
}

bool within_3se(double count, double n, double p, std::string& why, const char* what) {
    const double expected = n * p;
    const double sigma = std::sqrt(std::max(n * p * (1.0 - p), 0.0));
    if (std::abs(count - expected) <= 3.0 * sigma + 1.0) return true;
    std::ostringstream ss;
    ss << what << " " << count << " vs " << expected << " +- " << sigma;
    why = ss.str();
    return false;
}

}  // namespace

int main() {
    const ExperimentConfig cfg;  // measured operating point of the source
    const FiberSpec& fiber = cfg.fiber;
    const PumpSpec& pump = cfg.pump;
    const DetectionSpec& det = cfg.detection;
    const double rep = pump.repetition_rate_hz;

    // ---- 1. phase matching --------------------------------------------------
    DispersionModel dispersion;
    {
        const auto t0 = std::chrono::steady_clock::now();
        dispersion = calibrate_dispersion(pump, fiber, cfg.calibration.matched_signal_m,
                                          cfg.calibration.walkoff_s, cfg.calibration.power_W);
        PumpSpec at_cal = pump;
        at_cal.average_power_W = cfg.calibration.power_W;
        const auto [ls, li] = solve_phase_matched_signal(at_cal, fiber, dispersion);
        const double wo = group_delay_walkoff(ls, li, dispersion, fiber.length_m);
        const double dt = seconds_since(t0);
        const bool ok = std::abs(ls - 688.5e-9) <= 0.5e-9 && std::abs(li - 789.8e-9) <= 0.5e-9 &&
                        std::abs(std::abs(wo) - 2e-12) <= 0.05 * 2e-12 && dt < 1.0;
        std::ostringstream ss;
        ss << "lambda_s = " << ls * 1e9 << " nm, lambda_i = " << li * 1e9
           << " nm, walkoff = " << wo * 1e12 << " ps, " << dt << " s";
        report(1, "phase matching", ok, ss.str());
    }

    // ---- 2. power shift -----------------------------------------------------
    {
        const double shift_nm =
            signal_shift_per_power(688.5e-9, 1e-3, pump, fiber) * 1e9;
        const bool ok = Band{1.5e-5, 2.5e-5}.contains(shift_nm);
        report(2, "power shift", ok, "delta lambda = " + format_double(shift_nm) + " nm/mW");
    }

    // ---- 3. cw theory rate anchor at kappa = 1 ------------------------------
    {
        SourceModel unit;
        unit.kappa = 1.0;
        unit.modes_i = mode_count(cfg.collection.bandwidth_m, cfg.collection.idler_wavelength_m,
                                  pump.pulse_width_s);
        unit.modes_s = mode_count(cfg.collection.bandwidth_m, cfg.collection.signal_wavelength_m,
                                  pump.pulse_width_s);
        unit.pair_modes = unit.modes_i;
        const double rate_i = det.eta_pair * mean_pair_number(1e-3, unit, fiber, pump) * rep;
        unit.pair_modes = unit.modes_s;
        const double rate_s = det.eta_pair * mean_pair_number(1e-3, unit, fiber, pump) * rep;
        const Band band{140e3, 210e3};
        const bool ok = band.contains(rate_i) && band.contains(rate_s);
        report(3, "cw theory rate anchor", ok,
               "idler-bandwidth reading " + format_double(rate_i / 1e3) +
                   " kHz, signal-bandwidth reading " + format_double(rate_s / 1e3) + " kHz");
    }

    // ---- 4. calibration cross-prediction ------------------------------------
    SourceModel source;
    {
        const auto t0 = std::chrono::steady_clock::now();
        source = calibrate_source(cfg.calibration.reference, det, pump, fiber, cfg.collection);
        const AnalyticRates low = analytic_rates(source, 0.05e-3, det, pump, fiber);
        const double r_s = (low.d_c - low.d_a) / (det.eta_i * low.d_s);
        const double r_i = (low.d_c - low.d_a) / (det.eta_s * low.d_i);
        const double dt = seconds_since(t0);
        const bool ok =
            Band{0.50, 0.63}.contains(r_s) && Band{0.03, 0.07}.contains(r_i) && dt < 1.0;
        report(4, "calibration cross-prediction", ok,
               "R_s(50uW) = " + format_double(r_s) + ", R_i(50uW) = " + format_double(r_i) +
                   ", " + format_double(dt) + " s");
    }

    // ---- 5. contrast trend ---------------------------------------------------
    {
        const AnalyticRates mid = analytic_rates(source, 0.6e-3, det, pump, fiber);
        const AnalyticRates low = analytic_rates(source, 0.05e-3, det, pump, fiber);
        const double ca_mid = mid.d_c / mid.d_a;
        const double ca_low = low.d_c / low.d_a;
        const bool ok = Band{14, 30}.contains(ca_mid) && Band{120, 600}.contains(ca_low);
        report(5, "contrast trend", ok,
               "C/A(0.6 mW) = " + format_double(ca_mid) + ", C/A(50 uW) = " + format_double(ca_low));
    }

    // ---- 6. MC-analytic equivalence ------------------------------------------
    {
        const auto t0 = std::chrono::steady_clock::now();
        bool ok = true;
        std::string why = "all rates within 3 SE at 1e7 pulses";
        const std::uint64_t n = 10000000;
        for (double power : {0.05e-3, 0.6e-3, 1.0e-3}) {
            const auto comps = make_components(source, power, fiber, pump);
            const PulseSampler sampler(comps, det);
            const AnalyticRates an = analytic_rates(comps, det, rep);
            const std::string tag = "acc6/" + format_double(power);
            const ClickCounts cc =
                execute_batches(n, cfg.run.batch_size, 0, cfg.run.master_seed,
                                scenario_id(tag + "/cross"), CrossClickKernel(sampler));
            ok = ok && within_3se(static_cast<double>(cc.s), static_cast<double>(n), an.d_s / rep, why, "D_s");
            ok = ok && within_3se(static_cast<double>(cc.i), static_cast<double>(n), an.d_i / rep, why, "D_i");
            ok = ok && within_3se(static_cast<double>(cc.c), static_cast<double>(n), an.d_c / rep, why, "D_c");
            ok = ok && within_3se(static_cast<double>(cc.a), static_cast<double>(n), an.d_a / rep, why, "D_a");
            for (bool signal_arm : {true, false}) {
                const PulseSampler arm = sampler.arm_only(signal_arm);
                const AnalyticSelfRates self = analytic_self_rates(comps, det, rep, signal_arm);
                const ClickCounts sc = execute_batches(
                    n, cfg.run.batch_size, 0, cfg.run.master_seed,
                    scenario_id(tag + (signal_arm ? "/self_s" : "/self_i")),
                    SelfClickKernel(arm, signal_arm));
                const char* label = signal_arm ? "self_s" : "self_i";
                ok = ok && within_3se(static_cast<double>(sc.c), static_cast<double>(n), self.d_c / rep, why, label);
                ok = ok && within_3se(static_cast<double>(sc.a), static_cast<double>(n), self.d_a / rep, why, label);
            }
            if (!ok) break;
        }
        const double dt = seconds_since(t0);
        ok = ok && dt < 120.0;
        report(6, "MC-analytic equivalence", ok, why + ", " + format_double(dt) + " s");
    }

    // ---- 7+8. full-scale ZWM test and bunching -------------------------------
    {
        const auto t0 = std::chrono::steady_clock::now();
        const double power = 1.0e-3;
        const std::uint64_t pulses = pulses_for(cfg, power);  // 30 s -> 2.4e9
        const auto comps = make_components(source, power, fiber, pump);
        const PulseSampler sampler(comps, det);
        const PulseSampler sig = sampler.arm_only(true);
        const PulseSampler idl = sampler.arm_only(false);

        const ClickCounts cc =
            execute_batches(pulses, cfg.run.batch_size, 0, cfg.run.master_seed,
                            scenario_id("acc7/cross"), CrossClickKernel(sampler));
        const ClickCounts cs =
            execute_batches(pulses, cfg.run.batch_size, 0, cfg.run.master_seed,
                            scenario_id("acc7/self_s"), SelfClickKernel(sig, true));
        const ClickCounts ci =
            execute_batches(pulses, cfg.run.batch_size, 0, cfg.run.master_seed,
                            scenario_id("acc7/self_i"), SelfClickKernel(idl, false));
        const MetricsRecord mc = raw_metrics(to_counts_record(cc, RecordLabel::cross, rep));
        const MetricsRecord ms = raw_metrics(to_counts_record(cs, RecordLabel::self_signal, rep));
        const MetricsRecord mi = raw_metrics(to_counts_record(ci, RecordLabel::self_idler, rep));
        const ZwmResult zwm = zwm_v(mc, ms, mi);

        bool control_ok = true;
        SourceModel classical = source;
        classical.kappa = 0.0;
        const auto comps0 = make_components(classical, power, fiber, pump);
        const PulseSampler sampler0(comps0, det);
        const PulseSampler sig0 = sampler0.arm_only(true);
        const PulseSampler idl0 = sampler0.arm_only(false);
        double worst_ratio = -1e9;
        for (std::uint64_t seed = 1; seed <= 20 && control_ok; ++seed) {
            const std::uint64_t n0 = 50000000;
            const ClickCounts c0 = execute_batches(n0, cfg.run.batch_size, 0, seed,
                                                   scenario_id("acc7/ctrl/cross"),
                                                   CrossClickKernel(sampler0));
            const ClickCounts s0 = execute_batches(n0, cfg.run.batch_size, 0, seed,
                                                   scenario_id("acc7/ctrl/self_s"),
                                                   SelfClickKernel(sig0, true));
            const ClickCounts i0 = execute_batches(n0, cfg.run.batch_size, 0, seed,
                                                   scenario_id("acc7/ctrl/self_i"),
                                                   SelfClickKernel(idl0, false));
            const ZwmResult z0 =
                zwm_v(raw_metrics(to_counts_record(c0, RecordLabel::cross, rep)),
                      raw_metrics(to_counts_record(s0, RecordLabel::self_signal, rep)),
                      raw_metrics(to_counts_record(i0, RecordLabel::self_idler, rep)));
            control_ok = z0.v <= 3.0 * z0.sigma;
            worst_ratio = std::max(worst_ratio, z0.v / z0.sigma);
        }
        const double dt = seconds_since(t0);
        const bool ok7 = zwm.v > 0.0 && Band{100, 3000}.contains(zwm.v_over_sigma) && control_ok;
        std::ostringstream ss7;
        ss7 << "V = " << zwm.v << " Hz, V/sigma = " << zwm.v_over_sigma
            << ", worst control V/sigma = " << worst_ratio << ", " << dt << " s";
        report(7, "ZWM violation with classical control", ok7, ss7.str());

        // Criterion 8 reuses the full-scale self records.
        bool ok8 = true;
        std::ostringstream ss8;
        const auto [mu_rs, mu_ri] = raman_means(power, source);
        const double mu_f = mean_pair_number(power, source, fiber, pump);
        struct ArmCheck {
            const ClickCounts* counts;
            double mu_r, modes_arm;
            const char* name;
        };
        const ArmCheck arms[2] = {{&cs, mu_rs, source.modes_s, "signal"},
                                  {&ci, mu_ri, source.modes_i, "idler"}};
        for (const ArmCheck& arm : arms) {
            const double contrast = static_cast<double>(arm.counts->c) / arm.counts->a;
            const double sigma = contrast * std::sqrt(1.0 / arm.counts->c + 1.0 / arm.counts->a);
            const double predicted =
                1.0 + (mu_f * mu_f / source.pair_modes + arm.mu_r * arm.mu_r / arm.modes_arm) /
                          ((mu_f + arm.mu_r) * (mu_f + arm.mu_r));
            ok8 = ok8 && (contrast - 1.0 > 3.0 * sigma) &&
                  std::abs(contrast - predicted) <= 3.0 * sigma;
            ss8 << arm.name << " C/A = " << contrast << " vs " << predicted << " +- " << sigma
                << "; ";
        }
        report(8, "self-correlation bunching", ok8, ss8.str());
    }

    // ---- 9. power-law fits ----------------------------------------------------
    {
        const ScanResult sweep = run_power_sweep(cfg, true);
        const double sig_exp = sweep.scalars.at("signal_exponent");
        std::vector<std::pair<double, double>> quad, lin;
        for (double x : {0.3, 0.5, 0.7, 0.9}) {
            quad.push_back({x, 2.5 * x * x});
            lin.push_back({x, 0.4 * x});
        }
        const double e2 = fit_power_law(quad);
        const double e1 = fit_power_law(lin);
        const bool ok = sig_exp >= 1.9 && std::abs(e2 - 2.0) < 1e-9 && std::abs(e1 - 1.0) < 1e-9;
        report(9, "power-law fits", ok,
               "signal exponent = " + format_double(sig_exp) + ", synthetic quadratic = " +
                   format_double(e2) + ", synthetic linear = " + format_double(e1));
    }

    // ---- 10. spectral scan ------------------------------------------------------
    {
        const ScanResult scan = run_spectral_scan(cfg, true);
        std::size_t best = 0;
        double best_ca = -1.0;
        for (std::size_t r = 0; r < scan.table.rows.size(); ++r) {
            const double ca = scan.table.at(r, "an_contrast");
            if (ca > best_ca) {
                best_ca = ca;
                best = r;
            }
        }
        const bool peak_ok = scan.table.at(best, "offset_nm") == 0.0;
        const bool fit_ok = scan.gaussian_fit.has_value() &&
                            Band{0.7, 1.5}.contains(scan.gaussian_fit->fwhm);

        // Exact synthetic recovery at 1e-6 relative.
        std::vector<FitPoint> synth;
        const double amp = 21.0, center = 0.1, fwhm = 0.9, base = 1.0;
        const double s = fwhm / 2.3548200450309493;
        for (double x = -3.0; x <= 3.0; x += 0.25)
            synth.push_back({x, base + amp * std::exp(-(x - center) * (x - center) / (2 * s * s)),
                             0.0});
        const GaussianFit f = fit_gaussian(synth);
        const bool exact_ok = std::abs(f.center - center) < 1e-6 * std::abs(center) + 1e-9 &&
                              std::abs(f.fwhm - fwhm) < 1e-6 * fwhm &&
                              std::abs(f.amplitude - amp) < 1e-6 * amp &&
                              std::abs(f.baseline - base) < 1e-6 * base;
        const bool ok = peak_ok && fit_ok && exact_ok;
        std::ostringstream ss;
        ss << "peak at " << scan.table.at(best, "offset_nm") << " nm, fitted FWHM = "
           << (scan.gaussian_fit ? scan.gaussian_fit->fwhm : 0.0) << " nm, synthetic recovery "
           << (exact_ok ? "exact" : "failed");
        report(10, "spectral scan", ok, ss.str());
    }

    // ---- 11. figure of merit -----------------------------------------------------
    {
        const AnalyticRates at_ref = analytic_rates(source, 1e-3, det, pump, fiber);
        const double fom = (at_ref.d_c / 1e3) / (1.0 * (cfg.collection.bandwidth_m * 1e9));
        const bool ok = std::abs(fom - 53.7) / 53.7 <= 0.10;
        report(11, "figure of merit", ok, "D_c/(P*dl) = " + format_double(fom) + " kHz/mW/nm");
    }

    // ---- 12. determinism and throughput -------------------------------------------
    {
        ExperimentConfig small = cfg;
        small.sweep_powers_W = {1.0e-3};
        small.integration.override_seconds = 0.01;
        small.run.batch_size = 100000;
        small.run.workers = 1;
        const std::string csv1 = to_csv(run_power_sweep(small).table);
        small.run.workers = 4;
        const std::string csv4 = to_csv(run_power_sweep(small).table);
        const bool deterministic = csv1 == csv4 && !csv1.empty();

        const auto comps = make_components(source, 1e-3, fiber, pump);
        const PulseSampler sampler(comps, det);
        const auto t0 = std::chrono::steady_clock::now();
        const std::uint64_t n = 200000000;
        const ClickCounts c = execute_batches(n, cfg.run.batch_size, 1, cfg.run.master_seed,
                                              scenario_id("acc12/throughput"),
                                              CrossClickKernel(sampler));
        const double dt = seconds_since(t0);
        const double per_minute = static_cast<double>(c.pulses) / dt * 60.0;
        const bool ok = deterministic && per_minute >= 1e8;
        std::ostringstream ss;
        ss << (deterministic ? "worker-count invariant CSV" : "CSV MISMATCH") << ", "
           << per_minute / 1e9 << "e9 pulses/min single-threaded (2.4e9-pulse point in "
           << 2.4e9 / (per_minute / 60.0) << " s)";
        report(12, "determinism and throughput", ok, ss.str());
    }

    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
