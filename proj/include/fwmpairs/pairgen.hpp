#pragma once

// Phenomenological photon-statistics source.
//
// Pairs are multimode thermal: the per-pulse pair number is negative binomial
// with mean mu_f = kappa*(gamma*P_peak*z)^2*M and shape M = dnu*tau (the
// time-bandwidth mode count of the idler collection window). Raman photons in
// each arm are independent negative binomials with means linear in average
// pump power. Detection is binomial thinning followed by a click threshold.

#include <cstdint>
#include <vector>

#include "fwmpairs/dispersion.hpp"
#include "fwmpairs/rng.hpp"

namespace fwm {

struct CollectionSpec {
    double signal_wavelength_m = 688.5e-9;
    double idler_wavelength_m = 789.8e-9;
    double bandwidth_m = 0.7e-9;                // per arm, set by the slit
    double pump_envelope_bandwidth_m = 0.1e-9;  // FWHM used for the energy-sum envelope

    void validate(double pump_wavelength_m) const;
};

struct DetectionSpec {
    double eta_s = 0.097;
    double eta_i = 0.076;
    double eta_pair = 0.0074;  // quoted pair efficiency; must match eta_s*eta_i to 1e-3

    // The generative model detects a pair with probability exactly eta_s*eta_i;
    // the quoted eta_pair is kept for rate predictions.
    double effective_pair_efficiency() const { return eta_s * eta_i; }
    void validate() const;
};

struct SourceModel {
    double kappa = 0.0;            // pair-efficiency scale; 0 disables pairing
    double c_raman_s_per_W = 0.0;  // signal-arm Raman photons/pulse per watt average power
    double c_raman_i_per_W = 0.0;
    double pair_modes = 1.0;       // M (idler-window time-bandwidth product by default)
    double modes_s = 1.0;          // M_s
    double modes_i = 1.0;          // M_i

    void validate() const;
};

struct PulseOutcome {
    std::uint32_t n_pair = 0;
    std::uint32_t n_raman_s = 0;
    std::uint32_t n_raman_i = 0;
    std::uint32_t det_s = 0;
    std::uint32_t det_i = 0;
    bool click_s = false;
    bool click_i = false;
};

// Time-bandwidth mode count (c*dl/l^2)*tau of a filtered pulsed source.
double mode_count(double bandwidth_m, double wavelength_m, double pulse_width_s);

// kappa*(gamma*P_peak*z)^2*M pairs per pulse at average power P.
double mean_pair_number(double average_power_W, const SourceModel& source, const FiberSpec& fiber,
                        const PumpSpec& pump);

// (c_raman_s*P, c_raman_i*P) photons per pulse.
std::pair<double, double> raman_means(double average_power_W, const SourceModel& source);

// Measured anchors used to invert the source model at one operating point.
struct CalibrationReference {
    double power_W = 1.0e-3;
    double coincidence_rate_hz = 37.6e3;  // D_c
    double contrast = 10.0;               // C/A
    double pair_ratio_signal = 0.96;      // R_s
    double pair_ratio_idler = 0.50;       // R_i
};

// Inverts the reference point: true-pair rate T = D_c*(1 - 1/(C/A)),
// D_s = T/(eta_i*R_s), D_i = T/(eta_s*R_i), mu_f = T/(eta_s*eta_i*R),
// mu_raman = D_arm/(eta_arm*R) - mu_f. Throws CalibrationError when a
// Raman mean comes out negative.
SourceModel calibrate_source(const CalibrationReference& ref, const DetectionSpec& det,
                             const PumpSpec& pump, const FiberSpec& fiber,
                             const CollectionSpec& coll);

// ---------------------------------------------------------------------------
// Per-pulse sampling machinery.
// ---------------------------------------------------------------------------

// One negative-binomial photon population and which arm(s) it feeds.
// A component feeding both arms sends the *same* photon number to each
// (perfectly correlated pairs before loss).
struct ArmComponent {
    double mean = 0.0;
    double modes = 1.0;
    bool to_signal = false;
    bool to_idler = false;
};

// Standard three-component set: pairs(both), Raman signal, Raman idler.
std::vector<ArmComponent> make_components(const SourceModel& source, double average_power_W,
                                          const FiberSpec& fiber, const PumpSpec& pump);

// Tabulated CDF of a negative binomial with real shape; exact inversion sampling.
class NbTable {
public:
    NbTable() = default;
    NbTable(double mean, double modes);

    std::uint32_t sample(Xoshiro256StarStar& rng) const;
    std::uint32_t sample_positive(Xoshiro256StarStar& rng) const;  // conditioned on >= 1
    double p_zero() const { return p0_; }

private:
    std::vector<double> cdf_{1.0};
    double p0_ = 1.0;
};

// Prepared sampler over a component set at a fixed operating point.
class PulseSampler {
public:
    PulseSampler(std::vector<ArmComponent> components, const DetectionSpec& det);

    // Probability that a pulse produces zero photons in every component.
    double all_zero_probability() const { return q_all_zero_; }

    // Photon counts for one pulse, conditioned on at least one component firing.
    // counts must have size() == component count.
    void sample_nonzero_counts(Xoshiro256StarStar& rng, std::uint32_t* counts) const;

    // Unconditioned counts for one pulse.
    void sample_counts(Xoshiro256StarStar& rng, std::uint32_t* counts) const;

    // Thin counts into the two arms; returns detected photon numbers.
    std::pair<std::uint32_t, std::uint32_t> detect(Xoshiro256StarStar& rng,
                                                   const std::uint32_t* counts) const;
    std::uint32_t detect_arm(Xoshiro256StarStar& rng, const std::uint32_t* counts,
                             bool signal_arm) const;

    std::size_t size() const { return components_.size(); }
    const std::vector<ArmComponent>& components() const { return components_; }
    const DetectionSpec& detection() const { return det_; }

    // Restrict to the components feeding one arm (for self-correlation runs).
    PulseSampler arm_only(bool signal_arm) const;

private:
    std::vector<ArmComponent> components_;
    std::vector<NbTable> tables_;
    DetectionSpec det_;
    double q_all_zero_ = 1.0;
    std::vector<double> pattern_cdf_;  // over non-empty firing patterns (bit i = component i fired)
};

// One stochastic pulse from the three-component model. Convenience wrapper;
// hot loops should hold a PulseSampler instead.
PulseOutcome sample_pulse(Xoshiro256StarStar& rng, const SourceModel& source,
                          double average_power_W, const DetectionSpec& det,
                          const FiberSpec& fiber, const PumpSpec& pump);
PulseOutcome sample_pulse(Xoshiro256StarStar& rng, const PulseSampler& sampler);

// ---------------------------------------------------------------------------
// Closed-form click rates from the generating functions (the analytic oracle).
// ---------------------------------------------------------------------------

struct AnalyticRates {
    double d_s = 0.0;  // singles, Hz
    double d_i = 0.0;
    double d_c = 0.0;  // same-pulse coincidences
    double d_a = 0.0;  // accidentals = R*p_s*p_i
};

struct AnalyticSelfRates {
    double d_single = 0.0;  // one split output
    double d_c = 0.0;       // both splitter outputs click, same pulse
    double d_a = 0.0;
};

AnalyticRates analytic_rates(const std::vector<ArmComponent>& components, const DetectionSpec& det,
                             double repetition_rate_hz);
AnalyticRates analytic_rates(const SourceModel& source, double average_power_W,
                             const DetectionSpec& det, const PumpSpec& pump,
                             const FiberSpec& fiber);
AnalyticSelfRates analytic_self_rates(const std::vector<ArmComponent>& components,
                                      const DetectionSpec& det, double repetition_rate_hz,
                                      bool signal_arm);

// ---------------------------------------------------------------------------
// Joint spectral weight for the Fig-2(a)-style scan.
// ---------------------------------------------------------------------------

// Relative pair rate when the signal window is displaced by `offset_m` from
// the matched wavelength while the idler window stays fixed: the integral of
//   exp(-((nu_s+nu_i)^2)/(4*sigma_p^2)) * sinc^2(dk(nu_s,nu_i)*z/2)
// over both collection windows, normalized to 1 at zero offset.
double spectral_weight(double offset_m, const PumpSpec& pump, const FiberSpec& fiber,
                       const DispersionModel& model, const CollectionSpec& coll);

// Same integrand but with the idler unrestricted: the relative rate of FWM
// photons landing in the (displaced) signal window regardless of where the
// partner goes. Governs how the signal singles roll off during the scan.
double spectral_weight_signal_marginal(double offset_m, const PumpSpec& pump,
                                       const FiberSpec& fiber, const DispersionModel& model,
                                       const CollectionSpec& coll);

}  // namespace fwm
