#pragma once

// Coincidence circuit emulation and derived metrics.
//
// Accidentals use the one-pulse-delay estimator: click_s on pulse k paired
// with click_i on pulse k-1. Counts merge by field-wise addition, so partial
// records from parallel batches combine independent of order.

#include <cstdint>
#include <span>
#include <string>

#include "fwmpairs/pairgen.hpp"
#include "fwmpairs/rng.hpp"

namespace fwm {

enum class RecordLabel { cross, self_signal, self_idler };

std::string to_string(RecordLabel label);

struct CountsRecord {
    std::uint64_t n_s = 0;       // singles (sub-arm 1 for self records)
    std::uint64_t n_i = 0;       // singles (sub-arm 2 for self records)
    std::uint64_t n_c = 0;       // same-pulse coincidences
    std::uint64_t n_a = 0;       // delayed-pulse accidentals
    std::uint64_t n_pulses = 0;
    double integration_s = 0.0;  // n_pulses / repetition rate
    RecordLabel label = RecordLabel::cross;

    void merge(const CountsRecord& other);
    void validate() const;
};

struct MetricsRecord {
    double d_s = 0.0, d_s_sigma = 0.0;
    double d_i = 0.0, d_i_sigma = 0.0;
    double d_c = 0.0, d_c_sigma = 0.0;
    double d_a = 0.0, d_a_sigma = 0.0;
    double contrast = 0.0;  // N_c / N_a
    double r_s = 0.0;       // (D_c - D_a) / (eta_i * D_s); NaN for self records
    double r_i = 0.0;
    double v = 0.0;         // filled by zwm_v
    double sigma_v = 0.0;
    double v_over_sigma = 0.0;
    double integration_s = 0.0;
    RecordLabel label = RecordLabel::cross;
};

// Clicks and coincidences over a recorded pulse stream (linear k vs k-1 pairing).
CountsRecord accumulate(std::span<const PulseOutcome> pulses, double repetition_rate_hz);

// Split one arm's detected photons 50/50 and correlate the two halves.
CountsRecord self_correlate(std::span<const PulseOutcome> pulses, RecordLabel arm,
                            Xoshiro256StarStar& rng, double repetition_rate_hz);

// Rates with Poisson uncertainties, contrast, and pair ratios.
// Throws std::domain_error when N_a = 0 (contrast undefined) or a needed
// singles rate is zero.
MetricsRecord to_metrics(const CountsRecord& counts, const DetectionSpec& det);

struct ZwmResult {
    double v = 0.0;        // Hz
    double sigma = 0.0;    // Hz
    double v_over_sigma = 0.0;
};

// V = (D_c - D_a) - 2*(D_sc - D_sa + D_ic - D_ia) with independent Poisson
// propagation. All three records must share the integration time.
ZwmResult zwm_v(const MetricsRecord& cross, const MetricsRecord& self_signal,
                const MetricsRecord& self_idler);

// V / sigma; throws when sigma = 0.
double nonclassicality_violation(double v, double sigma);

}  // namespace fwm
