#include <doctest.h>

#include <cmath>
#include <vector>

#include "fwmpairs/counting.hpp"
#include "fwmpairs/harness.hpp"
#include "support/oracles.hpp"

using namespace fwm;

namespace {

SourceModel calibrated() {
    return calibrate_source(CalibrationReference{}, DetectionSpec{}, PumpSpec{}, FiberSpec{},
                            CollectionSpec{});
}

// Rates with Poisson sigmas, tolerant of zero counts (unlike to_metrics).
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

constexpr double kRep = 80e6;

}  // namespace

TEST_CASE("accumulate over crafted streams") {
    CHECK_THROWS_AS((void)accumulate({}, kRep), std::domain_error);

    std::vector<PulseOutcome> silent(1000);
    const CountsRecord zero = accumulate(silent, kRep);
    CHECK(zero.n_s == 0);
    CHECK(zero.n_i == 0);
    CHECK(zero.n_c == 0);
    CHECK(zero.n_a == 0);
    CHECK(zero.n_pulses == 1000);

    PulseOutcome both;
    both.det_s = both.det_i = 1;
    both.click_s = both.click_i = true;
    std::vector<PulseOutcome> saturated(500, both);
    const CountsRecord sat = accumulate(saturated, kRep);
    CHECK(sat.n_c == 500);
    CHECK(sat.n_a == 499);  // one-pulse-delay pairs
    CHECK(sat.integration_s == doctest::Approx(500.0 / kRep));
}

TEST_CASE("accumulate matches the analytic oracle on sampled pulses") {
    const SourceModel src = calibrated();
    const DetectionSpec det;
    const auto comps = make_components(src, 1e-3, FiberSpec{}, PumpSpec{});
    const PulseSampler sampler(comps, det);
    Xoshiro256StarStar rng = make_stream(101, 7, 0);
    std::vector<PulseOutcome> pulses(200000);
    for (auto& p : pulses) p = sample_pulse(rng, sampler);
    const CountsRecord rec = accumulate(pulses, kRep);

    const AnalyticRates an = analytic_rates(comps, det, kRep);
    const double n = static_cast<double>(pulses.size());
    auto check3 = [n](std::uint64_t count, double p) {
        const double sigma = std::sqrt(n * p * (1.0 - p));
        CHECK(std::abs(static_cast<double>(count) - n * p) < 3.0 * sigma + 1.0);
    };
    check3(rec.n_s, an.d_s / kRep);
    check3(rec.n_i, an.d_i / kRep);
    check3(rec.n_c, an.d_c / kRep);
    check3(rec.n_a, an.d_a / kRep);
}

TEST_CASE("self correlation of a thermal arm") {
    // Single thermal component with M = 3 modes in the signal arm.
    SourceModel src;
    src.kappa = 0.0;
    src.c_raman_s_per_W = 200.0;  // mean 0.2 at 1 mW
    src.modes_s = 3.0;
    DetectionSpec det;
    det.eta_s = 1.0;
    det.eta_i = 1.0;
    det.eta_pair = 1.0;
    const auto comps = make_components(src, 1e-3, FiberSpec{}, PumpSpec{});
    const PulseSampler sampler(comps, det);

    Xoshiro256StarStar rng = make_stream(31, 17, 0);
    std::vector<PulseOutcome> pulses(200000);
    for (auto& p : pulses) p = sample_pulse(rng, sampler);
    Xoshiro256StarStar split_rng = make_stream(31, 18, 0);
    const CountsRecord rec = self_correlate(pulses, RecordLabel::self_signal, split_rng, kRep);

    const AnalyticSelfRates an = analytic_self_rates(comps, det, kRep, true);
    const double n = static_cast<double>(pulses.size());
    auto check3 = [n](std::uint64_t count, double p) {
        const double sigma = std::sqrt(n * p * (1.0 - p));
        CHECK(std::abs(static_cast<double>(count) - n * p) < 3.0 * sigma + 1.0);
    };
    check3(rec.n_s, an.d_single / kRep);
    check3(rec.n_i, an.d_single / kRep);
    check3(rec.n_c, an.d_c / kRep);
    check3(rec.n_a, an.d_a / kRep);
}

TEST_CASE("self contrast limits: thermal 1 + 1/M, Poisson 1") {
    SourceModel thermal;
    thermal.kappa = 0.0;
    thermal.c_raman_s_per_W = 0.01;  // vanishing mean: pure g2 limit
    thermal.modes_s = 3.0;
    const auto comps = make_components(thermal, 1e-3, FiberSpec{}, PumpSpec{});
    DetectionSpec det;
    det.eta_s = 1.0;
    det.eta_i = 1.0;
    det.eta_pair = 1.0;
    const AnalyticSelfRates an = analytic_self_rates(comps, det, kRep, true);
    CHECK(an.d_c / an.d_a == doctest::Approx(1.0 + 1.0 / 3.0).epsilon(2e-4));

    SourceModel poisson = thermal;
    poisson.modes_s = 1e9;
    const auto comps_p = make_components(poisson, 1e-3, FiberSpec{}, PumpSpec{});
    const AnalyticSelfRates an_p = analytic_self_rates(comps_p, det, kRep, true);
    CHECK(an_p.d_c / an_p.d_a == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("both arms bunch at the calibrated operating point") {
    const SourceModel src = calibrated();
    const DetectionSpec det;
    const auto comps = make_components(src, 1e-3, FiberSpec{}, PumpSpec{});
    const PulseSampler sampler(comps, det);
    const PulseSampler sig = sampler.arm_only(true);
    const PulseSampler idl = sampler.arm_only(false);

    const std::uint64_t pulses = 50000000;
    const ClickCounts cs = execute_batches(pulses, 1000000, 2, 99, scenario_id("bunch/s"),
                                           SelfClickKernel(sig, true));
    const ClickCounts ci = execute_batches(pulses, 1000000, 2, 99, scenario_id("bunch/i"),
                                           SelfClickKernel(idl, false));
    for (const auto* c : {&cs, &ci}) {
        REQUIRE(c->a > 0);
        const double contrast = static_cast<double>(c->c) / static_cast<double>(c->a);
        const double sigma =
            contrast * std::sqrt(1.0 / static_cast<double>(c->c) + 1.0 / static_cast<double>(c->a));
        CHECK(contrast - 1.0 > 3.0 * sigma);
    }
}

TEST_CASE("to_metrics reproduces the measured ratios") {
    CountsRecord rec;
    rec.label = RecordLabel::cross;
    rec.n_pulses = 2400000000ULL;
    rec.integration_s = 30.0;
    rec.n_c = 1128000;    // 37.6 kHz
    rec.n_a = 112800;     // C/A = 10
    rec.n_s = 13914474;   // 463.8 kHz
    rec.n_i = 20931959;   // 697.7 kHz
    const DetectionSpec det;
    const MetricsRecord m = to_metrics(rec, det);
    CHECK(m.d_c == doctest::Approx(37600.0));
    CHECK(m.contrast == doctest::Approx(10.0));
    CHECK(m.r_s == doctest::Approx(0.96).epsilon(1e-5));
    CHECK(m.r_i == doctest::Approx(0.50).epsilon(1e-5));
    CHECK(m.d_c_sigma == doctest::Approx(std::sqrt(1128000.0) / 30.0));

    // Contrast identity: C/A - 1 == (D_c - D_a)/D_a.
    CHECK(m.contrast - 1.0 == doctest::Approx((m.d_c - m.d_a) / m.d_a).epsilon(1e-12));

    // No true pairs: equal coincidence and accidental counts.
    CountsRecord flat = rec;
    flat.n_a = flat.n_c;
    const MetricsRecord mf = to_metrics(flat, det);
    CHECK(mf.r_s == doctest::Approx(0.0));
    CHECK(mf.r_i == doctest::Approx(0.0));

    CountsRecord no_acc = rec;
    no_acc.n_a = 0;
    CHECK_THROWS_AS((void)to_metrics(no_acc, det), std::domain_error);
    CountsRecord untimed = rec;
    untimed.integration_s = 0.0;
    CHECK_THROWS_AS((void)to_metrics(untimed, det), std::domain_error);
}

TEST_CASE("zwm statistic arithmetic") {
    auto mk = [](double c, double a, double t, RecordLabel label) {
        MetricsRecord m;
        m.d_c = c;
        m.d_a = a;
        m.d_c_sigma = std::sqrt(c / t);
        m.d_a_sigma = std::sqrt(a / t);
        m.integration_s = t;
        m.label = label;
        return m;
    };
    const MetricsRecord cross = mk(37600.0, 3760.0, 30.0, RecordLabel::cross);
    const MetricsRecord ss = mk(902.0, 672.0, 30.0, RecordLabel::self_signal);
    const MetricsRecord si = mk(1804.0, 1521.0, 30.0, RecordLabel::self_idler);
    const ZwmResult r = zwm_v(cross, ss, si);
    const double v_hand = (37600.0 - 3760.0) - 2.0 * ((902.0 - 672.0) + (1804.0 - 1521.0));
    CHECK(r.v == doctest::Approx(v_hand).epsilon(1e-12));
    const double var_hand = (37600.0 + 3760.0) / 30.0 +
                            4.0 * (902.0 + 672.0 + 1804.0 + 1521.0) / 30.0;
    CHECK(r.sigma == doctest::Approx(std::sqrt(var_hand)).epsilon(1e-12));
    CHECK(r.v_over_sigma == doctest::Approx(r.v / r.sigma));

    MetricsRecord slow = si;
    slow.integration_s = 600.0;
    CHECK_THROWS_AS((void)zwm_v(cross, ss, slow), std::domain_error);
}

TEST_CASE("nonclassicality ratio") {
    CHECK(nonclassicality_violation(360.0, 1.0) == doctest::Approx(360.0));
    CHECK(nonclassicality_violation(0.0, 5.0) == doctest::Approx(0.0));
    CHECK_THROWS_AS((void)nonclassicality_violation(1.0, 0.0), std::domain_error);
}

TEST_CASE("classical control stays below the bound across 100 seeds") {
    SourceModel src = calibrated();
    src.kappa = 0.0;  // pairing disabled
    const DetectionSpec det;
    const auto comps = make_components(src, 1e-3, FiberSpec{}, PumpSpec{});
    const PulseSampler sampler(comps, det);
    const PulseSampler sig = sampler.arm_only(true);
    const PulseSampler idl = sampler.arm_only(false);

    const std::uint64_t pulses = 1000000;
    int below = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const ClickCounts cc = execute_batches(pulses, 250000, 2, seed,
                                               scenario_id("cb/cross"), CrossClickKernel(sampler));
        const ClickCounts cs = execute_batches(pulses, 250000, 2, seed, scenario_id("cb/s"),
                                               SelfClickKernel(sig, true));
        const ClickCounts ci = execute_batches(pulses, 250000, 2, seed, scenario_id("cb/i"),
                                               SelfClickKernel(idl, false));
        const MetricsRecord mc = raw_metrics(to_counts_record(cc, RecordLabel::cross, kRep));
        const MetricsRecord ms = raw_metrics(to_counts_record(cs, RecordLabel::self_signal, kRep));
        const MetricsRecord mi = raw_metrics(to_counts_record(ci, RecordLabel::self_idler, kRep));
        const ZwmResult r = zwm_v(mc, ms, mi);
        CHECK(r.v <= 3.0 * r.sigma);
        below += r.v <= 0.0 ? 1 : 0;
    }
    CHECK(below > 50);  // negative in expectation
}

TEST_CASE("propagated sigma tracks the seed-to-seed scatter of V") {
    const SourceModel src = calibrated();
    const DetectionSpec det;
    const auto comps = make_components(src, 1e-3, FiberSpec{}, PumpSpec{});
    const PulseSampler sampler(comps, det);
    const PulseSampler sig = sampler.arm_only(true);
    const PulseSampler idl = sampler.arm_only(false);

    const std::uint64_t pulses = 2000000;
    std::vector<double> vs;
    double sigma_sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        const ClickCounts cc = execute_batches(pulses, 500000, 2, seed,
                                               scenario_id("sp/cross"), CrossClickKernel(sampler));
        const ClickCounts cs = execute_batches(pulses, 500000, 2, seed, scenario_id("sp/s"),
                                               SelfClickKernel(sig, true));
        const ClickCounts ci = execute_batches(pulses, 500000, 2, seed, scenario_id("sp/i"),
                                               SelfClickKernel(idl, false));
        const MetricsRecord mc = raw_metrics(to_counts_record(cc, RecordLabel::cross, kRep));
        const MetricsRecord ms = raw_metrics(to_counts_record(cs, RecordLabel::self_signal, kRep));
        const MetricsRecord mi = raw_metrics(to_counts_record(ci, RecordLabel::self_idler, kRep));
        const ZwmResult r = zwm_v(mc, ms, mi);
        vs.push_back(r.v);
        sigma_sum += r.sigma;
    }
    double mean = 0.0;
    for (double v : vs) mean += v;
    mean /= static_cast<double>(vs.size());
    double var = 0.0;
    for (double v : vs) var += (v - mean) * (v - mean);
    var /= static_cast<double>(vs.size() - 1);
    const double scatter = std::sqrt(var);
    const double propagated = sigma_sum / static_cast<double>(vs.size());
    CHECK(scatter / propagated < 1.3);
    CHECK(scatter / propagated > 1.0 / 1.3);
}

TEST_CASE("accidentals factorize across pulses") {
    const SourceModel src = calibrated();
    const DetectionSpec det;
    const auto comps = make_components(src, 1e-3, FiberSpec{}, PumpSpec{});
    const PulseSampler sampler(comps, det);
    const ClickCounts c = execute_batches(10000000, 1000000, 2, 4242,
                                          scenario_id("fact/cross"), CrossClickKernel(sampler));
    const double n = static_cast<double>(c.pulses);
    const double expected = static_cast<double>(c.s) / n * static_cast<double>(c.i);
    CHECK(std::abs(static_cast<double>(c.a) - expected) < 3.0 * std::sqrt(expected));
}

TEST_CASE("pure-FWM limit drives both pair ratios to one") {
    SourceModel src = calibrated();
    src.c_raman_s_per_W = 0.0;
    src.c_raman_i_per_W = 0.0;
    src.kappa *= 1e-3 / mean_pair_number(1e-3, calibrated(), FiberSpec{}, PumpSpec{});
    DetectionSpec det;
    det.eta_s = 1.0;
    det.eta_i = 1.0;
    det.eta_pair = 1.0;
    const double mu_f = mean_pair_number(1e-3, src, FiberSpec{}, PumpSpec{});
    REQUIRE(mu_f == doctest::Approx(1e-3).epsilon(1e-9));

    const auto comps = make_components(src, 1e-3, FiberSpec{}, PumpSpec{});
    const AnalyticRates an = analytic_rates(comps, det, kRep);
    const double r_s_an = (an.d_c - an.d_a) / (det.eta_i * an.d_s);
    CHECK(r_s_an > 0.995);

    const PulseSampler sampler(comps, det);
    const ClickCounts c = execute_batches(2000000, 500000, 2, 7, scenario_id("fwm/cross"),
                                          CrossClickKernel(sampler));
    const double ds = static_cast<double>(c.s), di = static_cast<double>(c.i);
    REQUIRE(ds > 0);
    const double r_s = (static_cast<double>(c.c) - static_cast<double>(c.a)) / ds;
    const double r_i = (static_cast<double>(c.c) - static_cast<double>(c.a)) / di;
    const double sigma = 3.0 / std::sqrt(ds);  // dominant binomial scatter
    CHECK(std::abs(r_s - r_s_an) < sigma);
    CHECK(std::abs(r_i - r_s_an) < sigma);
}

TEST_CASE("counts records merge as a commutative monoid") {
    CountsRecord a;
    a.n_s = 10;
    a.n_i = 20;
    a.n_c = 3;
    a.n_a = 1;
    a.n_pulses = 1000;
    a.integration_s = 1000.0 / kRep;
    CountsRecord b = a;
    b.n_s = 7;

    CountsRecord ab = a;
    ab.merge(b);
    CountsRecord ba = b;
    ba.merge(a);
    CHECK(ab.n_s == ba.n_s);
    CHECK(ab.n_pulses == ba.n_pulses);
    CHECK(ab.n_s == 17);

    CountsRecord other;
    other.label = RecordLabel::self_idler;
    CHECK_THROWS_AS(a.merge(other), std::domain_error);
}
