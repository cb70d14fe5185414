#pragma once

// Experiment drivers: deterministic batched Monte Carlo plus the analytic
// expectations, emitted side by side for every axis point.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

#include "fwmpairs/config.hpp"
#include "fwmpairs/counting.hpp"
#include "fwmpairs/fitting.hpp"
#include "fwmpairs/version.hpp"

namespace fwm {

struct CalibratedModels {
    DispersionModel dispersion;
    SourceModel source;
};

// Use explicit config sections when present, otherwise calibrate from the
// config's targets.
CalibratedModels ensure_models(const ExperimentConfig& cfg);

// Number of pulses covering the integration policy at this power.
std::uint64_t pulses_for(const ExperimentConfig& cfg, double power_W);

// ---------------------------------------------------------------------------
// Deterministic batched execution
// ---------------------------------------------------------------------------

struct ClickCounts {
    std::uint64_t pulses = 0;
    std::uint64_t s = 0;
    std::uint64_t i = 0;
    std::uint64_t c = 0;
    std::uint64_t a = 0;

    void merge(const ClickCounts& o) {
        pulses += o.pulses;
        s += o.s;
        i += o.i;
        c += o.c;
        a += o.a;
    }
};

std::uint64_t scenario_id(std::string_view label);

// Partition pulses into batches, give batch b the stream derived from
// (master seed, scenario, b), and merge associatively. The result is
// bit-identical for any worker count.
template <class Kernel>
auto execute_batches(std::uint64_t total_pulses, std::uint64_t batch_size, unsigned workers,
                     std::uint64_t master_seed, std::uint64_t scenario, const Kernel& kernel) {
    using Acc = std::invoke_result_t<const Kernel&, Xoshiro256StarStar&, std::uint64_t>;
    if (batch_size < 1) throw std::domain_error("execute_batches: batch size must be >= 1");
    const std::uint64_t n_batches =
        total_pulses == 0 ? 0 : (total_pulses + batch_size - 1) / batch_size;
    unsigned n_workers = workers != 0 ? workers : std::max(1u, std::thread::hardware_concurrency());
    if (n_batches > 0 && n_batches < n_workers)
        n_workers = static_cast<unsigned>(n_batches);
    if (n_workers == 0) n_workers = 1;

    std::vector<Acc> partial(n_workers);
    std::atomic<std::uint64_t> cursor{0};
    auto work = [&](unsigned w) {
        for (;;) {
            const std::uint64_t b = cursor.fetch_add(1);
            if (b >= n_batches) break;
            const std::uint64_t begin = b * batch_size;
            const std::uint64_t n = std::min<std::uint64_t>(batch_size, total_pulses - begin);
            Xoshiro256StarStar rng = make_stream(master_seed, scenario, b);
            Acc acc = kernel(rng, n);
            partial[w].merge(acc);
        }
    };
    if (n_workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(work, w);
        for (auto& t : pool) t.join();
    }
    Acc merged;
    for (const auto& p : partial) merged.merge(p);
    return merged;
}

// Per-pulse click loop with geometric skipping of all-zero pulses. Accidentals
// pair click_s(k) with click_i(k-1) and close the batch circularly
// (click_s(0) with click_i(last)), so each batch tests exactly n_pulses pairs.
template <class NonzeroClicks>
ClickCounts run_click_batch(Xoshiro256StarStar& rng, std::uint64_t n_pulses, double q_zero,
                            const NonzeroClicks& clicks) {
    ClickCounts out;
    out.pulses = n_pulses;
    if (n_pulses == 0 || q_zero >= 1.0) return out;
    const double log_q = q_zero > 0.0 ? std::log(q_zero) : 0.0;

    bool first_s = false;
    bool prev_i = false;
    std::uint64_t pos = 0;
    while (pos < n_pulses) {
        if (q_zero > 0.0) {
            const double g = std::floor(std::log(rng.uniform()) / log_q);
            const double remaining = static_cast<double>(n_pulses - pos);
            if (g > 0.0) {
                prev_i = false;
                if (g >= remaining) break;
                pos += static_cast<std::uint64_t>(g);
            }
        }
        const auto [cs, ci] = clicks(rng);
        out.s += cs;
        out.i += ci;
        out.c += cs && ci;
        if (pos > 0)
            out.a += cs && prev_i;
        else
            first_s = cs;
        prev_i = ci;
        ++pos;
    }
    if (n_pulses > 1) out.a += first_s && prev_i;
    return out;
}

// Cross-correlation clicks (signal arm vs idler arm, same component set).
class CrossClickKernel {
public:
    explicit CrossClickKernel(const PulseSampler& sampler) : sampler_(&sampler) {}

    ClickCounts operator()(Xoshiro256StarStar& rng, std::uint64_t n_pulses) const {
        return run_click_batch(rng, n_pulses, sampler_->all_zero_probability(),
                               [this](Xoshiro256StarStar& r) {
                                   std::uint32_t counts[8];
                                   sampler_->sample_nonzero_counts(r, counts);
                                   const auto [ds, di] = sampler_->detect(r, counts);
                                   return std::pair<bool, bool>{ds >= 1, di >= 1};
                               });
    }

private:
    const PulseSampler* sampler_;
};

// One arm split 50/50 downstream of detection.
class SelfClickKernel {
public:
    SelfClickKernel(const PulseSampler& arm_sampler, bool signal_arm)
        : sampler_(&arm_sampler), signal_arm_(signal_arm) {}

    ClickCounts operator()(Xoshiro256StarStar& rng, std::uint64_t n_pulses) const {
        return run_click_batch(rng, n_pulses, sampler_->all_zero_probability(),
                               [this](Xoshiro256StarStar& r) {
                                   std::uint32_t counts[8];
                                   sampler_->sample_nonzero_counts(r, counts);
                                   const std::uint32_t det =
                                       sampler_->detect_arm(r, counts, signal_arm_);
                                   const std::uint32_t half = r.binomial(det, 0.5);
                                   return std::pair<bool, bool>{half >= 1, det - half >= 1};
                               });
    }

private:
    const PulseSampler* sampler_;
    bool signal_arm_;
};

CountsRecord to_counts_record(const ClickCounts& c, RecordLabel label, double repetition_rate_hz);

// ---------------------------------------------------------------------------
// Drivers
// ---------------------------------------------------------------------------

struct Provenance {
    std::string config_hash;
    std::uint64_t master_seed = 0;
    std::string version = kVersion;
    std::string subcommand;
};

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;

    std::size_t column_index(std::string_view name) const;
    double at(std::size_t row, std::string_view name) const;
};

struct ScanResult {
    Table table;
    Provenance provenance;
    std::optional<GaussianFit> gaussian_fit;
    std::string fit_error;
    std::map<std::string, double> scalars;  // named fit outputs (power-law exponents, ...)
};

ScanResult run_power_sweep(const ExperimentConfig& cfg, bool analytic_only = false);
ScanResult run_spectral_scan(const ExperimentConfig& cfg, bool analytic_only = false);
ScanResult run_zwm(const ExperimentConfig& cfg, bool analytic_only = false);

std::string to_csv(const Table& table);

// Sidecar metadata for one driver output.
std::string metadata_json(const ScanResult& result, const ExperimentConfig& cfg,
                          const std::vector<std::string>& overrides);

// ---------------------------------------------------------------------------
// Reduced-scale self checks
// ---------------------------------------------------------------------------

struct SelftestFixture {
    double beta4_sign = -1.0;  // flip to +1 to watch the solver check fail
    std::uint64_t pulses = 1000000;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

std::vector<CheckResult> run_selftest(const ExperimentConfig& cfg, const SelftestFixture& fx = {});

}  // namespace fwm
