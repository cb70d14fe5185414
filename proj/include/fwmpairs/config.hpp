#pragma once

// Line-oriented `key = value` experiment configuration with dotted section
// prefixes. Unknown keys are a hard error; units are part of the key names;
// everything is converted to SI at this boundary.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fwmpairs/counting.hpp"
#include "fwmpairs/dispersion.hpp"
#include "fwmpairs/pairgen.hpp"

namespace fwm {

struct IntegrationPolicy {
    double high_power_seconds = 30.0;
    double low_power_seconds = 600.0;
    double power_threshold_W = 0.4e-3;
    double override_seconds = 0.0;  // > 0 forces a fixed integration time

    double seconds_for(double power_W) const {
        if (override_seconds > 0.0) return override_seconds;
        return power_W >= power_threshold_W ? high_power_seconds : low_power_seconds;
    }
};

struct RunParams {
    std::uint64_t master_seed = 20050735;
    std::uint64_t batch_size = 4000000;
    unsigned workers = 0;  // 0 = hardware concurrency
};

struct CalibrationTargets {
    // Dispersion anchors: matched signal wavelength at the calibration power
    // and the signal/idler group-delay walkoff.
    double matched_signal_m = 688.5e-9;
    double power_W = 0.5e-3;
    double walkoff_s = 2.0e-12;
    // Source anchors: one measured operating point.
    CalibrationReference reference{};
    // Independent measurement used only to report the cross-prediction.
    double crosscheck_power_W = 0.05e-3;
    double crosscheck_ratio_signal = 0.58;
    double crosscheck_ratio_idler = 0.04;
};

struct ScanSpec {
    double power_W = 0.5e-3;
    double offset_min_m = -3.0e-9;
    double offset_max_m = 3.0e-9;
    double offset_step_m = 0.25e-9;

    std::vector<double> offsets_m() const;
};

struct ExperimentConfig {
    FiberSpec fiber{};
    PumpSpec pump{};
    CollectionSpec collection{};
    DetectionSpec detection{};
    CalibrationTargets calibration{};
    std::optional<DispersionModel> dispersion{};  // explicit model beats calibration
    std::optional<SourceModel> source{};
    std::vector<double> sweep_powers_W{0.05e-3, 0.2e-3, 0.4e-3, 0.6e-3, 0.8e-3, 1.0e-3};
    std::vector<double> zwm_powers_W{0.05e-3, 0.2e-3, 0.4e-3, 0.6e-3, 0.8e-3, 1.0e-3};
    ScanSpec scan{};
    IntegrationPolicy integration{};
    RunParams run{};

    void validate() const;
};

// Parse from the defaults above; every assignment must name a known key.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

// Apply one `key=value` assignment (the CLI --set path).
void apply_override(ExperimentConfig& cfg, std::string_view assignment);

// Canonical full dump: fixed key order, shortest round-trip floats. Parsing
// the dump reproduces the config exactly.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

// Shortest round-trip decimal formatting used for configs and CSV output.
std::string format_double(double v);

}  // namespace fwm
