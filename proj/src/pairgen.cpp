#include "fwmpairs/pairgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fwmpairs/constants.hpp"
#include "fwmpairs/errors.hpp"

namespace fwm {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

}  // namespace

void CollectionSpec::validate(double pump_wavelength_m) const {
    require(bandwidth_m > 0.0, "collection bandwidth must be positive");
    require(pump_envelope_bandwidth_m > 0.0, "pump envelope bandwidth must be positive");
    require(signal_wavelength_m > 0.0 && idler_wavelength_m > 0.0,
            "collection wavelengths must be positive");
    require(signal_wavelength_m < pump_wavelength_m && pump_wavelength_m < idler_wavelength_m,
            "collection requires lambda_s < lambda_p < lambda_i");
}

void DetectionSpec::validate() const {
    require(eta_s >= 0.0 && eta_s <= 1.0, "eta_s must lie in [0,1]");
    require(eta_i >= 0.0 && eta_i <= 1.0, "eta_i must lie in [0,1]");
    require(eta_pair >= 0.0 && eta_pair <= 1.0, "eta_pair must lie in [0,1]");
    require(std::abs(eta_pair - eta_s * eta_i) <= 1e-3,
            "eta_pair must equal eta_s*eta_i within 1e-3");
}

void SourceModel::validate() const {
    // kappa = 0 is allowed: it disables pairing for the classical control runs.
    require(kappa >= 0.0 && kappa <= 2.0, "kappa must lie in [0,2]");
    require(c_raman_s_per_W >= 0.0 && c_raman_i_per_W >= 0.0,
            "Raman coefficients must be non-negative");
    require(pair_modes >= 1e-6 && modes_s >= 1e-6 && modes_i >= 1e-6,
            "mode counts must be >= 1e-6");
}

double mode_count(double bandwidth_m, double wavelength_m, double pulse_width_s) {
    require(bandwidth_m > 0.0, "mode_count: bandwidth must be positive");
    require(wavelength_m > 0.0 && pulse_width_s > 0.0,
            "mode_count: wavelength and pulse width must be positive");
    return (kSpeedOfLight * bandwidth_m / (wavelength_m * wavelength_m)) * pulse_width_s;
}

double mean_pair_number(double average_power_W, const SourceModel& source, const FiberSpec& fiber,
                        const PumpSpec& pump) {
    require(average_power_W >= 0.0, "mean_pair_number: power must be non-negative");
    PumpSpec p = pump;
    p.average_power_W = average_power_W;
    const double g = fiber.gamma_per_W_m * peak_power(p) * fiber.length_m;
    return source.kappa * g * g * source.pair_modes;
}

std::pair<double, double> raman_means(double average_power_W, const SourceModel& source) {
    require(average_power_W >= 0.0, "raman_means: power must be non-negative");
    return {source.c_raman_s_per_W * average_power_W, source.c_raman_i_per_W * average_power_W};
}

SourceModel calibrate_source(const CalibrationReference& ref, const DetectionSpec& det,
                             const PumpSpec& pump, const FiberSpec& fiber,
                             const CollectionSpec& coll) {
    det.validate();
    if (!(ref.power_W > 0.0 && ref.coincidence_rate_hz > 0.0))
        throw CalibrationError("calibrate_source: reference power and rate must be positive");
    if (!(ref.contrast > 1.0))
        throw CalibrationError("calibrate_source: reference contrast must exceed 1");
    if (!(ref.pair_ratio_signal > 0.0 && ref.pair_ratio_signal <= 1.0 &&
          ref.pair_ratio_idler > 0.0 && ref.pair_ratio_idler <= 1.0))
        throw CalibrationError("calibrate_source: pair ratios must lie in (0,1]");

    const double rep = pump.repetition_rate_hz;
    const double true_pairs = ref.coincidence_rate_hz * (1.0 - 1.0 / ref.contrast);
    const double d_s = true_pairs / (det.eta_i * ref.pair_ratio_signal);
    const double d_i = true_pairs / (det.eta_s * ref.pair_ratio_idler);
    const double mu_f = true_pairs / (det.effective_pair_efficiency() * rep);
    double mu_rs = d_s / (det.eta_s * rep) - mu_f;
    double mu_ri = d_i / (det.eta_i * rep) - mu_f;

    // R_s = R_i = 1 with infinite contrast should give exactly zero Raman;
    // absorb the rounding residue.
    const double fuzz = 1e-12 * mu_f;
    if (mu_rs < 0.0 && mu_rs > -fuzz) mu_rs = 0.0;
    if (mu_ri < 0.0 && mu_ri > -fuzz) mu_ri = 0.0;
    if (mu_rs < 0.0 || mu_ri < 0.0)
        throw CalibrationError("calibrate_source: reference implies a negative Raman mean");

    SourceModel model;
    model.modes_s = mode_count(coll.bandwidth_m, coll.signal_wavelength_m, pump.pulse_width_s);
    model.modes_i = mode_count(coll.bandwidth_m, coll.idler_wavelength_m, pump.pulse_width_s);
    model.pair_modes = model.modes_i;

    PumpSpec at_ref = pump;
    at_ref.average_power_W = ref.power_W;
    const double g = fiber.gamma_per_W_m * peak_power(at_ref) * fiber.length_m;
    model.kappa = mu_f / (g * g * model.pair_modes);
    model.c_raman_s_per_W = mu_rs / ref.power_W;
    model.c_raman_i_per_W = mu_ri / ref.power_W;
    model.validate();
    return model;
}

std::vector<ArmComponent> make_components(const SourceModel& source, double average_power_W,
                                          const FiberSpec& fiber, const PumpSpec& pump) {
    source.validate();
    const auto [mu_rs, mu_ri] = raman_means(average_power_W, source);
    const double mu_f = mean_pair_number(average_power_W, source, fiber, pump);
    return {
        {mu_f, source.pair_modes, true, true},
        {mu_rs, source.modes_s, true, false},
        {mu_ri, source.modes_i, false, true},
    };
}

// ---------------------------------------------------------------------------
// Negative binomial sampling
// ---------------------------------------------------------------------------

NbTable::NbTable(double mean, double modes) {
    if (mean <= 0.0) return;  // degenerate: always zero
    const double theta = mean / (mean + modes);
    double p = std::exp(-modes * std::log1p(mean / modes));  // pmf(0)
    p0_ = p;
    double cum = p;
    cdf_.assign(1, cum);
    for (int n = 0; 1.0 - cum > 1e-17 && n < 4096; ++n) {
        p *= theta * (modes + n) / (n + 1.0);
        cum += p;
        cdf_.push_back(cum);
    }
}

std::uint32_t NbTable::sample(Xoshiro256StarStar& rng) const {
    const double u = rng.uniform();
    if (u <= p0_) return 0;
    for (std::size_t n = 1; n < cdf_.size(); ++n)
        if (u <= cdf_[n]) return static_cast<std::uint32_t>(n);
    return static_cast<std::uint32_t>(cdf_.size() - 1);
}

std::uint32_t NbTable::sample_positive(Xoshiro256StarStar& rng) const {
    if (p0_ >= 1.0) return 1;  // not reachable for a valid component
    const double u = p0_ + rng.uniform() * (1.0 - p0_);
    for (std::size_t n = 1; n < cdf_.size(); ++n)
        if (u <= cdf_[n]) return static_cast<std::uint32_t>(n);
    return static_cast<std::uint32_t>(std::max<std::size_t>(cdf_.size() - 1, 1));
}

PulseSampler::PulseSampler(std::vector<ArmComponent> components, const DetectionSpec& det)
    : components_(std::move(components)), det_(det) {
    det_.validate();
    tables_.reserve(components_.size());
    q_all_zero_ = 1.0;
    for (const auto& c : components_) {
        tables_.emplace_back(c.mean, c.modes);
        q_all_zero_ *= tables_.back().p_zero();
    }
    // Firing-pattern CDF over non-empty subsets, for O(1) conditioned sampling.
    const std::size_t n_patterns = (std::size_t{1} << components_.size()) - 1;
    pattern_cdf_.assign(n_patterns, 0.0);
    double cum = 0.0;
    for (std::size_t mask = 1; mask <= n_patterns; ++mask) {
        double p = 1.0;
        for (std::size_t k = 0; k < components_.size(); ++k)
            p *= (mask >> k) & 1 ? 1.0 - tables_[k].p_zero() : tables_[k].p_zero();
        cum += p;
        pattern_cdf_[mask - 1] = cum;
    }
}

void PulseSampler::sample_nonzero_counts(Xoshiro256StarStar& rng, std::uint32_t* counts) const {
    const double total = pattern_cdf_.empty() ? 0.0 : pattern_cdf_.back();
    const double u = rng.uniform() * total;
    std::size_t mask = pattern_cdf_.size();  // fall back to "all fired"
    for (std::size_t m = 0; m < pattern_cdf_.size(); ++m) {
        if (u <= pattern_cdf_[m]) {
            mask = m + 1;
            break;
        }
    }
    for (std::size_t k = 0; k < components_.size(); ++k)
        counts[k] = (mask >> k) & 1 ? tables_[k].sample_positive(rng) : 0;
}

void PulseSampler::sample_counts(Xoshiro256StarStar& rng, std::uint32_t* counts) const {
    for (std::size_t k = 0; k < components_.size(); ++k) counts[k] = tables_[k].sample(rng);
}

std::pair<std::uint32_t, std::uint32_t> PulseSampler::detect(Xoshiro256StarStar& rng,
                                                             const std::uint32_t* counts) const {
    std::uint32_t det_s = 0, det_i = 0;
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const std::uint32_t n = counts[k];
        if (n == 0) continue;
        if (components_[k].to_signal) det_s += rng.binomial(n, det_.eta_s);
        if (components_[k].to_idler) det_i += rng.binomial(n, det_.eta_i);
    }
    return {det_s, det_i};
}

std::uint32_t PulseSampler::detect_arm(Xoshiro256StarStar& rng, const std::uint32_t* counts,
                                       bool signal_arm) const {
    std::uint32_t detected = 0;
    const double eta = signal_arm ? det_.eta_s : det_.eta_i;
    for (std::size_t k = 0; k < components_.size(); ++k) {
        const bool feeds = signal_arm ? components_[k].to_signal : components_[k].to_idler;
        if (feeds && counts[k] > 0) detected += rng.binomial(counts[k], eta);
    }
    return detected;
}

PulseSampler PulseSampler::arm_only(bool signal_arm) const {
    std::vector<ArmComponent> kept;
    for (const auto& c : components_)
        if (signal_arm ? c.to_signal : c.to_idler)
            kept.push_back({c.mean, c.modes, signal_arm, !signal_arm});
    return PulseSampler(std::move(kept), det_);
}

PulseOutcome sample_pulse(Xoshiro256StarStar& rng, const PulseSampler& sampler) {
    if (sampler.size() != 3)
        throw std::domain_error("sample_pulse expects the pair/raman_s/raman_i component set");
    std::uint32_t counts[3];
    sampler.sample_counts(rng, counts);
    const auto [det_s, det_i] = sampler.detect(rng, counts);
    PulseOutcome out;
    out.n_pair = counts[0];
    out.n_raman_s = counts[1];
    out.n_raman_i = counts[2];
    out.det_s = det_s;
    out.det_i = det_i;
    out.click_s = det_s >= 1;
    out.click_i = det_i >= 1;
    return out;
}

PulseOutcome sample_pulse(Xoshiro256StarStar& rng, const SourceModel& source,
                          double average_power_W, const DetectionSpec& det,
                          const FiberSpec& fiber, const PumpSpec& pump) {
    PulseSampler sampler(make_components(source, average_power_W, fiber, pump), det);
    return sample_pulse(rng, sampler);
}

// ---------------------------------------------------------------------------
// Analytic click rates via probability generating functions
// ---------------------------------------------------------------------------

namespace {

// log E[u^n] of one negative binomial, u = 1 - survival.
double log_nb_pgf_at(double survival, double mean, double modes) {
    if (mean <= 0.0) return 0.0;
    return -modes * std::log1p((mean / modes) * survival);
}

}  // namespace

AnalyticRates analytic_rates(const std::vector<ArmComponent>& components, const DetectionSpec& det,
                             double repetition_rate_hz) {
    double log_no_s = 0.0, log_no_i = 0.0, log_no_both = 0.0;
    for (const auto& c : components) {
        if (c.to_signal) log_no_s += log_nb_pgf_at(det.eta_s, c.mean, c.modes);
        if (c.to_idler) log_no_i += log_nb_pgf_at(det.eta_i, c.mean, c.modes);
        double surv = 0.0;  // per-photon probability of producing any click
        if (c.to_signal && c.to_idler)
            surv = det.eta_s + det.eta_i - det.eta_s * det.eta_i;
        else if (c.to_signal)
            surv = det.eta_s;
        else if (c.to_idler)
            surv = det.eta_i;
        log_no_both += log_nb_pgf_at(surv, c.mean, c.modes);
    }
    const double p_s = -std::expm1(log_no_s);
    const double p_i = -std::expm1(log_no_i);
    const double p_any = -std::expm1(log_no_both);
    const double p_c = p_s + p_i - p_any;
    AnalyticRates r;
    r.d_s = repetition_rate_hz * p_s;
    r.d_i = repetition_rate_hz * p_i;
    r.d_c = repetition_rate_hz * p_c;
    r.d_a = repetition_rate_hz * p_s * p_i;
    return r;
}

AnalyticRates analytic_rates(const SourceModel& source, double average_power_W,
                             const DetectionSpec& det, const PumpSpec& pump,
                             const FiberSpec& fiber) {
    return analytic_rates(make_components(source, average_power_W, fiber, pump), det,
                          pump.repetition_rate_hz);
}

AnalyticSelfRates analytic_self_rates(const std::vector<ArmComponent>& components,
                                      const DetectionSpec& det, double repetition_rate_hz,
                                      bool signal_arm) {
    // Detected photons split 50/50; a sub-arm click thins the arm total by eta/2.
    const double eta = signal_arm ? det.eta_s : det.eta_i;
    double log_h_half = 0.0, log_h_zero = 0.0;
    for (const auto& c : components) {
        if (!(signal_arm ? c.to_signal : c.to_idler)) continue;
        log_h_half += log_nb_pgf_at(0.5 * eta, c.mean, c.modes);
        log_h_zero += log_nb_pgf_at(eta, c.mean, c.modes);
    }
    const double h_half = std::exp(log_h_half);
    const double h_zero = std::exp(log_h_zero);
    AnalyticSelfRates r;
    const double p_half = -std::expm1(log_h_half);
    r.d_single = repetition_rate_hz * p_half;
    r.d_c = repetition_rate_hz * (1.0 - 2.0 * h_half + h_zero);
    r.d_a = repetition_rate_hz * p_half * p_half;
    return r;
}

// ---------------------------------------------------------------------------
// Spectral weight
// ---------------------------------------------------------------------------

namespace {

struct GaussLegendre {
    std::vector<double> x, w;
};

// Nodes and weights on [-1,1] by Newton iteration on the Legendre recurrence.
GaussLegendre gauss_legendre(int n) {
    GaussLegendre gl;
    gl.x.resize(n);
    gl.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        gl.x[i] = -x;
        gl.x[n - 1 - i] = x;
        gl.w[i] = gl.w[n - 1 - i] = 2.0 / ((1.0 - x * x) * pp * pp);
    }
    return gl;
}

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

struct JsiParams {
    double beta2, beta3, beta4;
    double nonlinear_shift;  // 2*gamma*P_peak
    double z;
    double sigma_pump;  // pump spectral sigma, rad/s
};

double phase_mismatch(double nu_s, double nu_i, const JsiParams& p) {
    const double ts = p.beta2 * nu_s * nu_s / 2.0 + p.beta3 * nu_s * nu_s * nu_s / 6.0 +
                      p.beta4 * nu_s * nu_s * nu_s * nu_s / 24.0;
    const double ti = p.beta2 * nu_i * nu_i / 2.0 + p.beta3 * nu_i * nu_i * nu_i / 6.0 +
                      p.beta4 * nu_i * nu_i * nu_i * nu_i / 24.0;
    return -(ts + ti) - p.nonlinear_shift;
}

// Integral of envelope * sinc^2 over the signal window and an idler range.
// When idler_window is false the idler integration only tracks the envelope.
double jsi_integral(double signal_center_m, double signal_width_m, bool idler_window,
                    double idler_center_m, double idler_width_m, double pump_wavelength_m,
                    const JsiParams& p) {
    static const GaussLegendre outer = gauss_legendre(96);
    static const GaussLegendre inner = gauss_legendre(48);

    const double w_pump = 2.0 * kPi * kSpeedOfLight / pump_wavelength_m;
    const double ws_lo = 2.0 * kPi * kSpeedOfLight / (signal_center_m + signal_width_m / 2.0);
    const double ws_hi = 2.0 * kPi * kSpeedOfLight / (signal_center_m - signal_width_m / 2.0);
    double wi_lo = 0.0, wi_hi = 0.0;
    if (idler_window) {
        wi_lo = 2.0 * kPi * kSpeedOfLight / (idler_center_m + idler_width_m / 2.0);
        wi_hi = 2.0 * kPi * kSpeedOfLight / (idler_center_m - idler_width_m / 2.0);
    }
    const double env_sigma = std::sqrt(2.0) * p.sigma_pump;  // pump self-convolution
    const double reach = 8.0 * env_sigma;

    double total = 0.0;
    for (int a = 0; a < static_cast<int>(outer.x.size()); ++a) {
        const double nu_s = 0.5 * (ws_lo + ws_hi) + 0.5 * (ws_hi - ws_lo) * outer.x[a] - w_pump;
        const double center = -nu_s;  // energy conservation
        double lo = center - reach, hi = center + reach;
        if (idler_window) {
            lo = std::max(lo, wi_lo - w_pump);
            hi = std::min(hi, wi_hi - w_pump);
        }
        if (hi <= lo) continue;
        double row = 0.0;
        for (int b = 0; b < static_cast<int>(inner.x.size()); ++b) {
            const double nu_i = 0.5 * (lo + hi) + 0.5 * (hi - lo) * inner.x[b];
            const double d = nu_s + nu_i;
            const double env = std::exp(-d * d / (4.0 * p.sigma_pump * p.sigma_pump));
            const double s = sinc(phase_mismatch(nu_s, nu_i, p) * p.z / 2.0);
            row += inner.w[b] * env * s * s;
        }
        total += outer.w[a] * row * 0.25 * (hi - lo) * (ws_hi - ws_lo);
    }
    return total;
}

JsiParams make_jsi_params(const PumpSpec& pump, const FiberSpec& fiber,
                          const DispersionModel& model) {
    JsiParams p;
    p.beta2 = model.beta2_s2_per_m;
    p.beta3 = model.beta3_s3_per_m;
    p.beta4 = model.beta4_s4_per_m;
    p.nonlinear_shift = 2.0 * fiber.gamma_per_W_m * peak_power(pump);
    p.z = fiber.length_m;
    const double fwhm =
        2.0 * kPi * kSpeedOfLight * pump.bandwidth_m / (pump.wavelength_m * pump.wavelength_m);
    p.sigma_pump = fwhm / (2.0 * std::sqrt(2.0 * std::log(2.0)));
    return p;
}

}  // namespace

double spectral_weight(double offset_m, const PumpSpec& pump, const FiberSpec& fiber,
                       const DispersionModel& model, const CollectionSpec& coll) {
    const JsiParams p = make_jsi_params(pump, fiber, model);
    const auto [matched_s, matched_i] = solve_phase_matched_signal(pump, fiber, model);
    (void)matched_i;
    const double ref = jsi_integral(matched_s, coll.bandwidth_m, true, coll.idler_wavelength_m,
                                    coll.bandwidth_m, pump.wavelength_m, p);
    if (ref <= 0.0) throw NumericalError("spectral_weight: zero weight at the matched point");
    const double val = jsi_integral(matched_s + offset_m, coll.bandwidth_m, true,
                                    coll.idler_wavelength_m, coll.bandwidth_m, pump.wavelength_m, p);
    return val / ref;
}

double spectral_weight_signal_marginal(double offset_m, const PumpSpec& pump,
                                       const FiberSpec& fiber, const DispersionModel& model,
                                       const CollectionSpec& coll) {
    const JsiParams p = make_jsi_params(pump, fiber, model);
    const auto [matched_s, matched_i] = solve_phase_matched_signal(pump, fiber, model);
    (void)matched_i;
    const double ref =
        jsi_integral(matched_s, coll.bandwidth_m, false, 0.0, 0.0, pump.wavelength_m, p);
    if (ref <= 0.0) throw NumericalError("spectral_weight: zero marginal at the matched point");
    const double val = jsi_integral(matched_s + offset_m, coll.bandwidth_m, false, 0.0, 0.0,
                                    pump.wavelength_m, p);
    return val / ref;
}

}  // namespace fwm
