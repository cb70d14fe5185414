#include "fwmpairs/counting.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fwm {

std::string to_string(RecordLabel label) {
    switch (label) {
        case RecordLabel::cross: return "cross";
        case RecordLabel::self_signal: return "self_signal";
        case RecordLabel::self_idler: return "self_idler";
    }
    return "unknown";
}

void CountsRecord::merge(const CountsRecord& other) {
    if (other.label != label) throw std::domain_error("CountsRecord::merge: label mismatch");
    n_s += other.n_s;
    n_i += other.n_i;
    n_c += other.n_c;
    n_a += other.n_a;
    n_pulses += other.n_pulses;
    integration_s += other.integration_s;
}

void CountsRecord::validate() const {
    if (label == RecordLabel::cross && (n_c > n_s || n_c > n_i))
        throw std::domain_error("CountsRecord: N_c exceeds a singles count");
    if (integration_s < 0.0) throw std::domain_error("CountsRecord: negative integration time");
}

CountsRecord accumulate(std::span<const PulseOutcome> pulses, double repetition_rate_hz) {
    if (pulses.empty()) throw std::domain_error("accumulate: empty pulse stream");
    CountsRecord rec;
    rec.label = RecordLabel::cross;
    bool prev_i = false;
    for (std::size_t k = 0; k < pulses.size(); ++k) {
        const auto& p = pulses[k];
        rec.n_s += p.click_s;
        rec.n_i += p.click_i;
        rec.n_c += p.click_s && p.click_i;
        if (k > 0) rec.n_a += p.click_s && prev_i;
        prev_i = p.click_i;
    }
    rec.n_pulses = pulses.size();
    rec.integration_s = static_cast<double>(pulses.size()) / repetition_rate_hz;
    return rec;
}

CountsRecord self_correlate(std::span<const PulseOutcome> pulses, RecordLabel arm,
                            Xoshiro256StarStar& rng, double repetition_rate_hz) {
    if (arm != RecordLabel::self_signal && arm != RecordLabel::self_idler)
        throw std::domain_error("self_correlate: arm must be self_signal or self_idler");
    if (pulses.empty()) throw std::domain_error("self_correlate: empty pulse stream");
    CountsRecord rec;
    rec.label = arm;
    bool prev_2 = false;
    for (std::size_t k = 0; k < pulses.size(); ++k) {
        const std::uint32_t detected =
            arm == RecordLabel::self_signal ? pulses[k].det_s : pulses[k].det_i;
        const std::uint32_t half = rng.binomial(detected, 0.5);
        const bool c1 = half >= 1;
        const bool c2 = detected - half >= 1;
        rec.n_s += c1;
        rec.n_i += c2;
        rec.n_c += c1 && c2;
        if (k > 0) rec.n_a += c1 && prev_2;
        prev_2 = c2;
    }
    rec.n_pulses = pulses.size();
    rec.integration_s = static_cast<double>(pulses.size()) / repetition_rate_hz;
    return rec;
}

MetricsRecord to_metrics(const CountsRecord& counts, const DetectionSpec& det) {
    if (counts.integration_s <= 0.0) throw std::domain_error("to_metrics: integration time is zero");
    counts.validate();
    const double t = counts.integration_s;
    MetricsRecord m;
    m.label = counts.label;
    m.integration_s = t;
    m.d_s = static_cast<double>(counts.n_s) / t;
    m.d_i = static_cast<double>(counts.n_i) / t;
    m.d_c = static_cast<double>(counts.n_c) / t;
    m.d_a = static_cast<double>(counts.n_a) / t;
    m.d_s_sigma = std::sqrt(static_cast<double>(counts.n_s)) / t;
    m.d_i_sigma = std::sqrt(static_cast<double>(counts.n_i)) / t;
    m.d_c_sigma = std::sqrt(static_cast<double>(counts.n_c)) / t;
    m.d_a_sigma = std::sqrt(static_cast<double>(counts.n_a)) / t;
    if (counts.n_a == 0) throw std::domain_error("to_metrics: N_a = 0, contrast undefined");
    m.contrast = static_cast<double>(counts.n_c) / static_cast<double>(counts.n_a);
    if (counts.label == RecordLabel::cross) {
        if (counts.n_s == 0 || counts.n_i == 0)
            throw std::domain_error("to_metrics: zero singles, pair ratio undefined");
        m.r_s = (m.d_c - m.d_a) / (det.eta_i * m.d_s);
        m.r_i = (m.d_c - m.d_a) / (det.eta_s * m.d_i);
    } else {
        m.r_s = std::numeric_limits<double>::quiet_NaN();
        m.r_i = std::numeric_limits<double>::quiet_NaN();
    }
    m.v = std::numeric_limits<double>::quiet_NaN();
    m.sigma_v = std::numeric_limits<double>::quiet_NaN();
    m.v_over_sigma = std::numeric_limits<double>::quiet_NaN();
    return m;
}

ZwmResult zwm_v(const MetricsRecord& cross, const MetricsRecord& self_signal,
                const MetricsRecord& self_idler) {
    const double t = cross.integration_s;
    if (std::abs(self_signal.integration_s - t) > 1e-9 * t ||
        std::abs(self_idler.integration_s - t) > 1e-9 * t)
        throw std::domain_error("zwm_v: records have mismatched integration times");
    ZwmResult r;
    r.v = (cross.d_c - cross.d_a) -
          2.0 * (self_signal.d_c - self_signal.d_a + self_idler.d_c - self_idler.d_a);
    const double var =
        cross.d_c_sigma * cross.d_c_sigma + cross.d_a_sigma * cross.d_a_sigma +
        4.0 * (self_signal.d_c_sigma * self_signal.d_c_sigma +
               self_signal.d_a_sigma * self_signal.d_a_sigma +
               self_idler.d_c_sigma * self_idler.d_c_sigma +
               self_idler.d_a_sigma * self_idler.d_a_sigma);
    r.sigma = std::sqrt(var);
    r.v_over_sigma = nonclassicality_violation(r.v, r.sigma);
    return r;
}

double nonclassicality_violation(double v, double sigma) {
    if (sigma <= 0.0) throw std::domain_error("nonclassicality_violation: sigma must be positive");
    return v / sigma;
}

}  // namespace fwm
