// pybind11 bindings exposing the core operations to Python.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "fwmpairs/config.hpp"
#include "fwmpairs/counting.hpp"
#include "fwmpairs/errors.hpp"
#include "fwmpairs/dispersion.hpp"
#include "fwmpairs/fitting.hpp"
#include "fwmpairs/harness.hpp"
#include "fwmpairs/pairgen.hpp"
#include "fwmpairs/version.hpp"

namespace py = pybind11;

PYBIND11_MODULE(_fwmpairs, m) {
    m.doc() = "Correlated photon-pair generation by four-wave mixing in microstructure fiber";
    m.attr("__version__") = fwm::kVersion;

    py::register_exception<fwm::ConfigError>(m, "ConfigError");
    py::register_exception<fwm::CalibrationError>(m, "CalibrationError");
    py::register_exception<fwm::NumericalError>(m, "NumericalError");

    py::class_<fwm::FiberSpec>(m, "FiberSpec")
        .def(py::init<>())
        .def_readwrite("length_m", &fwm::FiberSpec::length_m)
        .def_readwrite("gamma_per_W_m", &fwm::FiberSpec::gamma_per_W_m)
        .def_readwrite("zero_dispersion_wavelength_m", &fwm::FiberSpec::zero_dispersion_wavelength_m)
        .def_readwrite("mode_diameter_m", &fwm::FiberSpec::mode_diameter_m)
        .def_readwrite("refractive_index", &fwm::FiberSpec::refractive_index);

    py::class_<fwm::PumpSpec>(m, "PumpSpec")
        .def(py::init<>())
        .def_readwrite("wavelength_m", &fwm::PumpSpec::wavelength_m)
        .def_readwrite("bandwidth_m", &fwm::PumpSpec::bandwidth_m)
        .def_readwrite("average_power_W", &fwm::PumpSpec::average_power_W)
        .def_readwrite("repetition_rate_hz", &fwm::PumpSpec::repetition_rate_hz)
        .def_readwrite("pulse_width_s", &fwm::PumpSpec::pulse_width_s)
        .def("duty_factor", &fwm::PumpSpec::duty_factor);

    py::class_<fwm::DispersionModel>(m, "DispersionModel")
        .def(py::init<>())
        .def_readwrite("reference_wavelength_m", &fwm::DispersionModel::reference_wavelength_m)
        .def_readwrite("beta2_s2_per_m", &fwm::DispersionModel::beta2_s2_per_m)
        .def_readwrite("beta3_s3_per_m", &fwm::DispersionModel::beta3_s3_per_m)
        .def_readwrite("beta4_s4_per_m", &fwm::DispersionModel::beta4_s4_per_m)
        .def("symmetric_degenerate", &fwm::DispersionModel::symmetric_degenerate);

    py::class_<fwm::CollectionSpec>(m, "CollectionSpec")
        .def(py::init<>())
        .def_readwrite("signal_wavelength_m", &fwm::CollectionSpec::signal_wavelength_m)
        .def_readwrite("idler_wavelength_m", &fwm::CollectionSpec::idler_wavelength_m)
        .def_readwrite("bandwidth_m", &fwm::CollectionSpec::bandwidth_m)
        .def_readwrite("pump_envelope_bandwidth_m", &fwm::CollectionSpec::pump_envelope_bandwidth_m);

    py::class_<fwm::DetectionSpec>(m, "DetectionSpec")
        .def(py::init<>())
        .def_readwrite("eta_s", &fwm::DetectionSpec::eta_s)
        .def_readwrite("eta_i", &fwm::DetectionSpec::eta_i)
        .def_readwrite("eta_pair", &fwm::DetectionSpec::eta_pair)
        .def("effective_pair_efficiency", &fwm::DetectionSpec::effective_pair_efficiency);

    py::class_<fwm::SourceModel>(m, "SourceModel")
        .def(py::init<>())
        .def_readwrite("kappa", &fwm::SourceModel::kappa)
        .def_readwrite("c_raman_s_per_W", &fwm::SourceModel::c_raman_s_per_W)
        .def_readwrite("c_raman_i_per_W", &fwm::SourceModel::c_raman_i_per_W)
        .def_readwrite("pair_modes", &fwm::SourceModel::pair_modes)
        .def_readwrite("modes_s", &fwm::SourceModel::modes_s)
        .def_readwrite("modes_i", &fwm::SourceModel::modes_i);

    py::class_<fwm::CalibrationReference>(m, "CalibrationReference")
        .def(py::init<>())
        .def_readwrite("power_W", &fwm::CalibrationReference::power_W)
        .def_readwrite("coincidence_rate_hz", &fwm::CalibrationReference::coincidence_rate_hz)
        .def_readwrite("contrast", &fwm::CalibrationReference::contrast)
        .def_readwrite("pair_ratio_signal", &fwm::CalibrationReference::pair_ratio_signal)
        .def_readwrite("pair_ratio_idler", &fwm::CalibrationReference::pair_ratio_idler);

    py::class_<fwm::AnalyticRates>(m, "AnalyticRates")
        .def_readonly("d_s", &fwm::AnalyticRates::d_s)
        .def_readonly("d_i", &fwm::AnalyticRates::d_i)
        .def_readonly("d_c", &fwm::AnalyticRates::d_c)
        .def_readonly("d_a", &fwm::AnalyticRates::d_a);

    py::class_<fwm::AnalyticSelfRates>(m, "AnalyticSelfRates")
        .def_readonly("d_single", &fwm::AnalyticSelfRates::d_single)
        .def_readonly("d_c", &fwm::AnalyticSelfRates::d_c)
        .def_readonly("d_a", &fwm::AnalyticSelfRates::d_a);

    py::class_<fwm::GaussianFit>(m, "GaussianFit")
        .def_readonly("center", &fwm::GaussianFit::center)
        .def_readonly("fwhm", &fwm::GaussianFit::fwhm)
        .def_readonly("amplitude", &fwm::GaussianFit::amplitude)
        .def_readonly("baseline", &fwm::GaussianFit::baseline)
        .def_readonly("residual", &fwm::GaussianFit::residual)
        .def_readonly("converged", &fwm::GaussianFit::converged);

    // dispersion operations
    m.def("peak_power", &fwm::peak_power, py::arg("pump"));
    m.def("conjugate_wavelength", &fwm::conjugate_wavelength, py::arg("lambda_p_m"),
          py::arg("lambda_s_m"));
    m.def("linear_mismatch", &fwm::linear_mismatch, py::arg("detuning_rad_s"), py::arg("model"));
    m.def("total_mismatch", &fwm::total_mismatch, py::arg("lambda_s_m"), py::arg("pump"),
          py::arg("fiber"), py::arg("model"));
    m.def("solve_phase_matched_signal", &fwm::solve_phase_matched_signal, py::arg("pump"),
          py::arg("fiber"), py::arg("model"));
    m.def("signal_shift_per_power", &fwm::signal_shift_per_power, py::arg("lambda_s_m"),
          py::arg("delta_power_W"), py::arg("pump"), py::arg("fiber"));
    m.def("group_delay_walkoff", &fwm::group_delay_walkoff, py::arg("lambda_s_m"),
          py::arg("lambda_i_m"), py::arg("model"), py::arg("length_m"));
    m.def("calibrate_dispersion", &fwm::calibrate_dispersion, py::arg("pump"), py::arg("fiber"),
          py::arg("matched_signal_m"), py::arg("walkoff_s"), py::arg("calibration_power_W"));

    // source operations
    m.def("mode_count", &fwm::mode_count, py::arg("bandwidth_m"), py::arg("wavelength_m"),
          py::arg("pulse_width_s"));
    m.def("mean_pair_number", &fwm::mean_pair_number, py::arg("average_power_W"),
          py::arg("source"), py::arg("fiber"), py::arg("pump"));
    m.def("raman_means", &fwm::raman_means, py::arg("average_power_W"), py::arg("source"));
    m.def("calibrate_source", &fwm::calibrate_source, py::arg("reference"), py::arg("detection"),
          py::arg("pump"), py::arg("fiber"), py::arg("collection"));
    m.def(
        "analytic_rates",
        [](const fwm::SourceModel& source, double power_W, const fwm::DetectionSpec& det,
           const fwm::PumpSpec& pump, const fwm::FiberSpec& fiber) {
            return fwm::analytic_rates(source, power_W, det, pump, fiber);
        },
        py::arg("source"), py::arg("average_power_W"), py::arg("detection"), py::arg("pump"),
        py::arg("fiber"));
    m.def(
        "analytic_self_rates",
        [](const fwm::SourceModel& source, double power_W, const fwm::DetectionSpec& det,
           const fwm::PumpSpec& pump, const fwm::FiberSpec& fiber, bool signal_arm) {
            return fwm::analytic_self_rates(fwm::make_components(source, power_W, fiber, pump),
                                            det, pump.repetition_rate_hz, signal_arm);
        },
        py::arg("source"), py::arg("average_power_W"), py::arg("detection"), py::arg("pump"),
        py::arg("fiber"), py::arg("signal_arm"));
    m.def("spectral_weight", &fwm::spectral_weight, py::arg("offset_m"), py::arg("pump"),
          py::arg("fiber"), py::arg("model"), py::arg("collection"));

    // fitting
    m.def(
        "fit_gaussian",
        [](const std::vector<std::tuple<double, double, double>>& pts) {
            std::vector<fwm::FitPoint> fp;
            fp.reserve(pts.size());
            for (const auto& [x, y, s] : pts) fp.push_back({x, y, s});
            return fwm::fit_gaussian(fp);
        },
        py::arg("points"));
    m.def("fit_power_law", &fwm::fit_power_law, py::arg("points"));

    // counting
    m.def("zwm_v_from_rates",
          [](double d_c, double d_a, double ss_c, double ss_a, double si_c, double si_a,
             double t) {
              auto mk = [t](double c, double a, fwm::RecordLabel label) {
                  fwm::MetricsRecord r;
                  r.d_c = c;
                  r.d_a = a;
                  r.d_c_sigma = std::sqrt(c / t);
                  r.d_a_sigma = std::sqrt(a / t);
                  r.integration_s = t;
                  r.label = label;
                  return r;
              };
              const auto res = fwm::zwm_v(mk(d_c, d_a, fwm::RecordLabel::cross),
                                          mk(ss_c, ss_a, fwm::RecordLabel::self_signal),
                                          mk(si_c, si_a, fwm::RecordLabel::self_idler));
              return std::make_tuple(res.v, res.sigma, res.v_over_sigma);
          },
          py::arg("d_c"), py::arg("d_a"), py::arg("self_s_c"), py::arg("self_s_a"),
          py::arg("self_i_c"), py::arg("self_i_a"), py::arg("integration_s"));
    m.def("nonclassicality_violation", &fwm::nonclassicality_violation, py::arg("v"),
          py::arg("sigma"));

    // config + drivers
    py::class_<fwm::ExperimentConfig>(m, "ExperimentConfig")
        .def(py::init<>())
        .def_readwrite("fiber", &fwm::ExperimentConfig::fiber)
        .def_readwrite("pump", &fwm::ExperimentConfig::pump)
        .def_readwrite("collection", &fwm::ExperimentConfig::collection)
        .def_readwrite("detection", &fwm::ExperimentConfig::detection)
        .def("validate", &fwm::ExperimentConfig::validate);

    py::class_<fwm::Table>(m, "Table")
        .def_readonly("columns", &fwm::Table::columns)
        .def_readonly("rows", &fwm::Table::rows)
        .def("at", &fwm::Table::at);

    py::class_<fwm::ScanResult>(m, "ScanResult")
        .def_readonly("table", &fwm::ScanResult::table)
        .def_property_readonly("gaussian_fit",
                               [](const fwm::ScanResult& r) -> py::object {
                                   if (r.gaussian_fit) return py::cast(*r.gaussian_fit);
                                   return py::none();
                               })
        .def_readonly("scalars", &fwm::ScanResult::scalars);

    m.def("parse_config", &fwm::parse_config, py::arg("text"));
    m.def("load_config_file", &fwm::load_config_file, py::arg("path"));
    m.def("apply_override",
          [](fwm::ExperimentConfig& cfg, const std::string& assignment) {
              fwm::apply_override(cfg, assignment);
          },
          py::arg("config"), py::arg("assignment"));
    m.def("serialize_config", &fwm::serialize_config, py::arg("config"));
    m.def("config_hash", &fwm::config_hash, py::arg("config"));
    m.def(
        "calibrate_models",
        [](const fwm::ExperimentConfig& cfg) {
            const auto models = fwm::ensure_models(cfg);
            return std::make_tuple(models.dispersion, models.source);
        },
        py::arg("config"));
    m.def("run_power_sweep", &fwm::run_power_sweep, py::arg("config"),
          py::arg("analytic_only") = false);
    m.def("run_spectral_scan", &fwm::run_spectral_scan, py::arg("config"),
          py::arg("analytic_only") = false);
    m.def("run_zwm", &fwm::run_zwm, py::arg("config"), py::arg("analytic_only") = false);
    m.def("to_csv", &fwm::to_csv, py::arg("table"));
}
