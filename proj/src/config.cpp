#include "fwmpairs/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "fwmpairs/errors.hpp"
#include "fwmpairs/rng.hpp"

namespace fwm {

std::vector<double> ScanSpec::offsets_m() const {
    if (offset_step_m <= 0.0) throw ConfigError("scan.offset_step_nm must be positive");
    if (offset_max_m < offset_min_m) throw ConfigError("scan offset range is empty");
    std::vector<double> out;
    const int n = static_cast<int>(std::round((offset_max_m - offset_min_m) / offset_step_m));
    out.reserve(n + 1);
    for (int i = 0; i <= n; ++i) out.push_back(offset_min_m + i * offset_step_m);
    return out;
}

void ExperimentConfig::validate() const {
    fiber.validate();
    pump.validate();
    collection.validate(pump.wavelength_m);
    detection.validate();
    if (source) source->validate();
    if (dispersion) dispersion->validate();
    auto check_axis = [](const std::vector<double>& axis, const char* name) {
        if (axis.empty()) throw ConfigError(std::string(name) + ": axis must be non-empty");
        for (std::size_t i = 0; i + 1 < axis.size(); ++i)
            if (!(axis[i] < axis[i + 1]))
                throw ConfigError(std::string(name) + ": axis must be strictly increasing");
        for (double v : axis)
            if (!(v > 0.0)) throw ConfigError(std::string(name) + ": powers must be positive");
    };
    check_axis(sweep_powers_W, "sweep.powers_mW");
    check_axis(zwm_powers_W, "zwm.powers_mW");
    if (integration.high_power_seconds <= 0.0 || integration.low_power_seconds <= 0.0)
        throw ConfigError("integration times must be positive");
    if (integration.override_seconds < 0.0)
        throw ConfigError("integration.override_seconds must be >= 0");
    if (run.batch_size < 1) throw ConfigError("run.batch_size must be >= 1");
    if (scan.power_W <= 0.0) throw ConfigError("scan.power_mW must be positive");
    (void)scan.offsets_m();
}

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double(std::string_view s, const std::string& key) {
    double v = 0.0;
    const char* begin = s.data();
    const char* end = s.data() + s.size();
    const auto res = std::from_chars(begin, end, v);
    if (res.ec != std::errc{} || res.ptr != end)
        throw ConfigError("invalid numeric value for " + key + ": '" + std::string(s) + "'");
    return v;
}

std::uint64_t parse_u64(std::string_view s, const std::string& key) {
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError("invalid integer value for " + key + ": '" + std::string(s) + "'");
    return v;
}

std::vector<double> parse_list(std::string_view s, const std::string& key) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        std::size_t comma = s.find(',', start);
        if (comma == std::string_view::npos) comma = s.size();
        std::string_view item = s.substr(start, comma - start);
        while (!item.empty() && (item.front() == ' ' || item.front() == '\t')) item.remove_prefix(1);
        while (!item.empty() && (item.back() == ' ' || item.back() == '\t')) item.remove_suffix(1);
        if (item.empty()) throw ConfigError("empty element in list for " + key);
        out.push_back(parse_double(item, key));
        start = comma + 1;
        if (comma == s.size()) break;
    }
    if (out.empty()) throw ConfigError("empty list for " + key);
    return out;
}

std::string join_list_mW(const std::vector<double>& watts) {
    std::string out;
    for (std::size_t i = 0; i < watts.size(); ++i) {
        if (i) out += ", ";
        out += format_double(watts[i] * 1e3);
    }
    return out;
}

using Setter = std::function<void(ExperimentConfig&, std::string_view, const std::string&)>;

// One entry per config key; value semantics (units) live in the lambdas.
const std::map<std::string, Setter>& key_table() {
    static const std::map<std::string, Setter> table = [] {
        std::map<std::string, Setter> t;
        auto d = [](auto assign) {
            return Setter([assign](ExperimentConfig& c, std::string_view v, const std::string& k) {
                assign(c, parse_double(v, k));
            });
        };
        t["fiber.length_m"] = d([](ExperimentConfig& c, double v) { c.fiber.length_m = v; });
        t["fiber.gamma_per_W_km"] =
            d([](ExperimentConfig& c, double v) { c.fiber.gamma_per_W_m = v / 1000.0; });
        t["fiber.zero_dispersion_wavelength_nm"] =
            d([](ExperimentConfig& c, double v) { c.fiber.zero_dispersion_wavelength_m = v * 1e-9; });
        t["fiber.mode_diameter_um"] =
            d([](ExperimentConfig& c, double v) { c.fiber.mode_diameter_m = v * 1e-6; });
        t["fiber.refractive_index"] =
            d([](ExperimentConfig& c, double v) { c.fiber.refractive_index = v; });

        t["pump.wavelength_nm"] =
            d([](ExperimentConfig& c, double v) { c.pump.wavelength_m = v * 1e-9; });
        t["pump.bandwidth_nm"] =
            d([](ExperimentConfig& c, double v) { c.pump.bandwidth_m = v * 1e-9; });
        t["pump.average_power_mW"] =
            d([](ExperimentConfig& c, double v) { c.pump.average_power_W = v * 1e-3; });
        t["pump.repetition_rate_MHz"] =
            d([](ExperimentConfig& c, double v) { c.pump.repetition_rate_hz = v * 1e6; });
        t["pump.pulse_width_ps"] =
            d([](ExperimentConfig& c, double v) { c.pump.pulse_width_s = v * 1e-12; });

        t["collection.signal_wavelength_nm"] =
            d([](ExperimentConfig& c, double v) { c.collection.signal_wavelength_m = v * 1e-9; });
        t["collection.idler_wavelength_nm"] =
            d([](ExperimentConfig& c, double v) { c.collection.idler_wavelength_m = v * 1e-9; });
        t["collection.bandwidth_nm"] =
            d([](ExperimentConfig& c, double v) { c.collection.bandwidth_m = v * 1e-9; });
        t["collection.pump_envelope_bandwidth_nm"] = d(
            [](ExperimentConfig& c, double v) { c.collection.pump_envelope_bandwidth_m = v * 1e-9; });

        t["detection.eta_s"] = d([](ExperimentConfig& c, double v) { c.detection.eta_s = v; });
        t["detection.eta_i"] = d([](ExperimentConfig& c, double v) { c.detection.eta_i = v; });
        t["detection.eta_pair"] = d([](ExperimentConfig& c, double v) { c.detection.eta_pair = v; });

        t["calibration.matched_signal_nm"] =
            d([](ExperimentConfig& c, double v) { c.calibration.matched_signal_m = v * 1e-9; });
        t["calibration.power_mW"] =
            d([](ExperimentConfig& c, double v) { c.calibration.power_W = v * 1e-3; });
        t["calibration.walkoff_ps"] =
            d([](ExperimentConfig& c, double v) { c.calibration.walkoff_s = v * 1e-12; });
        t["calibration.reference_power_mW"] =
            d([](ExperimentConfig& c, double v) { c.calibration.reference.power_W = v * 1e-3; });
        t["calibration.coincidence_rate_hz"] = d(
            [](ExperimentConfig& c, double v) { c.calibration.reference.coincidence_rate_hz = v; });
        t["calibration.contrast"] =
            d([](ExperimentConfig& c, double v) { c.calibration.reference.contrast = v; });
        t["calibration.pair_ratio_signal"] = d(
            [](ExperimentConfig& c, double v) { c.calibration.reference.pair_ratio_signal = v; });
        t["calibration.pair_ratio_idler"] =
            d([](ExperimentConfig& c, double v) { c.calibration.reference.pair_ratio_idler = v; });
        t["calibration.crosscheck_power_mW"] =
            d([](ExperimentConfig& c, double v) { c.calibration.crosscheck_power_W = v * 1e-3; });
        t["calibration.crosscheck_ratio_signal"] =
            d([](ExperimentConfig& c, double v) { c.calibration.crosscheck_ratio_signal = v; });
        t["calibration.crosscheck_ratio_idler"] =
            d([](ExperimentConfig& c, double v) { c.calibration.crosscheck_ratio_idler = v; });

        auto ensure_disp = [](ExperimentConfig& c) -> DispersionModel& {
            if (!c.dispersion) {
                c.dispersion = DispersionModel{};
                c.dispersion->reference_wavelength_m = c.pump.wavelength_m;
            }
            return *c.dispersion;
        };
        t["dispersion.reference_wavelength_nm"] = d([ensure_disp](ExperimentConfig& c, double v) {
            ensure_disp(c).reference_wavelength_m = v * 1e-9;
        });
        t["dispersion.beta2_s2_per_m"] = d(
            [ensure_disp](ExperimentConfig& c, double v) { ensure_disp(c).beta2_s2_per_m = v; });
        t["dispersion.beta3_s3_per_m"] = d(
            [ensure_disp](ExperimentConfig& c, double v) { ensure_disp(c).beta3_s3_per_m = v; });
        t["dispersion.beta4_s4_per_m"] = d(
            [ensure_disp](ExperimentConfig& c, double v) { ensure_disp(c).beta4_s4_per_m = v; });

        auto ensure_src = [](ExperimentConfig& c) -> SourceModel& {
            if (!c.source) c.source = SourceModel{};
            return *c.source;
        };
        t["source.kappa"] =
            d([ensure_src](ExperimentConfig& c, double v) { ensure_src(c).kappa = v; });
        t["source.raman_signal_per_W"] =
            d([ensure_src](ExperimentConfig& c, double v) { ensure_src(c).c_raman_s_per_W = v; });
        t["source.raman_idler_per_W"] =
            d([ensure_src](ExperimentConfig& c, double v) { ensure_src(c).c_raman_i_per_W = v; });
        t["source.pair_modes"] =
            d([ensure_src](ExperimentConfig& c, double v) { ensure_src(c).pair_modes = v; });
        t["source.signal_modes"] =
            d([ensure_src](ExperimentConfig& c, double v) { ensure_src(c).modes_s = v; });
        t["source.idler_modes"] =
            d([ensure_src](ExperimentConfig& c, double v) { ensure_src(c).modes_i = v; });

        t["sweep.powers_mW"] = Setter([](ExperimentConfig& c, std::string_view v,
                                         const std::string& k) {
            c.sweep_powers_W.clear();
            for (double p : parse_list(v, k)) c.sweep_powers_W.push_back(p * 1e-3);
        });
        t["zwm.powers_mW"] = Setter([](ExperimentConfig& c, std::string_view v,
                                       const std::string& k) {
            c.zwm_powers_W.clear();
            for (double p : parse_list(v, k)) c.zwm_powers_W.push_back(p * 1e-3);
        });

        t["scan.power_mW"] =
            d([](ExperimentConfig& c, double v) { c.scan.power_W = v * 1e-3; });
        t["scan.offset_min_nm"] =
            d([](ExperimentConfig& c, double v) { c.scan.offset_min_m = v * 1e-9; });
        t["scan.offset_max_nm"] =
            d([](ExperimentConfig& c, double v) { c.scan.offset_max_m = v * 1e-9; });
        t["scan.offset_step_nm"] =
            d([](ExperimentConfig& c, double v) { c.scan.offset_step_m = v * 1e-9; });

        t["integration.high_power_seconds"] =
            d([](ExperimentConfig& c, double v) { c.integration.high_power_seconds = v; });
        t["integration.low_power_seconds"] =
            d([](ExperimentConfig& c, double v) { c.integration.low_power_seconds = v; });
        t["integration.power_threshold_mW"] =
            d([](ExperimentConfig& c, double v) { c.integration.power_threshold_W = v * 1e-3; });
        t["integration.override_seconds"] =
            d([](ExperimentConfig& c, double v) { c.integration.override_seconds = v; });

        t["run.master_seed"] = Setter([](ExperimentConfig& c, std::string_view v,
                                         const std::string& k) {
            c.run.master_seed = parse_u64(v, k);
        });
        t["run.batch_size"] = Setter([](ExperimentConfig& c, std::string_view v,
                                        const std::string& k) {
            c.run.batch_size = parse_u64(v, k);
        });
        t["run.workers"] = Setter([](ExperimentConfig& c, std::string_view v,
                                     const std::string& k) {
            c.run.workers = static_cast<unsigned>(parse_u64(v, k));
        });
        return t;
    }();
    return table;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

void apply_assignment(ExperimentConfig& cfg, std::string_view line, int line_no) {
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto& table = key_table();
    const auto it = table.find(key);
    if (it == table.end())
        throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (value.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty value for '" + key + "'");
    it->second(cfg, value, key);
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    ExperimentConfig cfg;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        ++line_no;
        const std::size_t hash = line.find('#');
        if (hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (!line.empty()) apply_assignment(cfg, line, line_no);
        if (nl == text.size()) break;
        pos = nl + 1;
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void apply_override(ExperimentConfig& cfg, std::string_view assignment) {
    apply_assignment(cfg, trim(assignment), 0);
    cfg.validate();
}

std::string serialize_config(const ExperimentConfig& cfg) {
    std::ostringstream out;
    auto kv = [&out](const char* key, const std::string& value) {
        out << key << " = " << value << "\n";
    };
    auto kd = [&kv](const char* key, double v) { kv(key, format_double(v)); };

    kd("fiber.length_m", cfg.fiber.length_m);
    kd("fiber.gamma_per_W_km", cfg.fiber.gamma_per_W_m * 1000.0);
    kd("fiber.zero_dispersion_wavelength_nm", cfg.fiber.zero_dispersion_wavelength_m * 1e9);
    kd("fiber.mode_diameter_um", cfg.fiber.mode_diameter_m * 1e6);
    kd("fiber.refractive_index", cfg.fiber.refractive_index);

    kd("pump.wavelength_nm", cfg.pump.wavelength_m * 1e9);
    kd("pump.bandwidth_nm", cfg.pump.bandwidth_m * 1e9);
    kd("pump.average_power_mW", cfg.pump.average_power_W * 1e3);
    kd("pump.repetition_rate_MHz", cfg.pump.repetition_rate_hz * 1e-6);
    kd("pump.pulse_width_ps", cfg.pump.pulse_width_s * 1e12);

    kd("collection.signal_wavelength_nm", cfg.collection.signal_wavelength_m * 1e9);
    kd("collection.idler_wavelength_nm", cfg.collection.idler_wavelength_m * 1e9);
    kd("collection.bandwidth_nm", cfg.collection.bandwidth_m * 1e9);
    kd("collection.pump_envelope_bandwidth_nm", cfg.collection.pump_envelope_bandwidth_m * 1e9);

    kd("detection.eta_s", cfg.detection.eta_s);
    kd("detection.eta_i", cfg.detection.eta_i);
    kd("detection.eta_pair", cfg.detection.eta_pair);

    kd("calibration.matched_signal_nm", cfg.calibration.matched_signal_m * 1e9);
    kd("calibration.power_mW", cfg.calibration.power_W * 1e3);
    kd("calibration.walkoff_ps", cfg.calibration.walkoff_s * 1e12);
    kd("calibration.reference_power_mW", cfg.calibration.reference.power_W * 1e3);
    kd("calibration.coincidence_rate_hz", cfg.calibration.reference.coincidence_rate_hz);
    kd("calibration.contrast", cfg.calibration.reference.contrast);
    kd("calibration.pair_ratio_signal", cfg.calibration.reference.pair_ratio_signal);
    kd("calibration.pair_ratio_idler", cfg.calibration.reference.pair_ratio_idler);
    kd("calibration.crosscheck_power_mW", cfg.calibration.crosscheck_power_W * 1e3);
    kd("calibration.crosscheck_ratio_signal", cfg.calibration.crosscheck_ratio_signal);
    kd("calibration.crosscheck_ratio_idler", cfg.calibration.crosscheck_ratio_idler);

    if (cfg.dispersion) {
        kd("dispersion.reference_wavelength_nm", cfg.dispersion->reference_wavelength_m * 1e9);
        kd("dispersion.beta2_s2_per_m", cfg.dispersion->beta2_s2_per_m);
        kd("dispersion.beta3_s3_per_m", cfg.dispersion->beta3_s3_per_m);
        kd("dispersion.beta4_s4_per_m", cfg.dispersion->beta4_s4_per_m);
    }
    if (cfg.source) {
        kd("source.kappa", cfg.source->kappa);
        kd("source.raman_signal_per_W", cfg.source->c_raman_s_per_W);
        kd("source.raman_idler_per_W", cfg.source->c_raman_i_per_W);
        kd("source.pair_modes", cfg.source->pair_modes);
        kd("source.signal_modes", cfg.source->modes_s);
        kd("source.idler_modes", cfg.source->modes_i);
    }

    kv("sweep.powers_mW", join_list_mW(cfg.sweep_powers_W));
    kv("zwm.powers_mW", join_list_mW(cfg.zwm_powers_W));

    kd("scan.power_mW", cfg.scan.power_W * 1e3);
    kd("scan.offset_min_nm", cfg.scan.offset_min_m * 1e9);
    kd("scan.offset_max_nm", cfg.scan.offset_max_m * 1e9);
    kd("scan.offset_step_nm", cfg.scan.offset_step_m * 1e9);

    kd("integration.high_power_seconds", cfg.integration.high_power_seconds);
    kd("integration.low_power_seconds", cfg.integration.low_power_seconds);
    kd("integration.power_threshold_mW", cfg.integration.power_threshold_W * 1e3);
    kd("integration.override_seconds", cfg.integration.override_seconds);

    kv("run.master_seed", std::to_string(cfg.run.master_seed));
    kv("run.batch_size", std::to_string(cfg.run.batch_size));
    kv("run.workers", std::to_string(cfg.run.workers));
    return out.str();
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::uint64_t h = fnv1a64(serialize_config(cfg));
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

}  // namespace fwm
