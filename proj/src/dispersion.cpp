#include "fwmpairs/dispersion.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "fwmpairs/constants.hpp"
#include "fwmpairs/errors.hpp"

namespace fwm {

namespace {

void require(bool ok, const char* msg) {
    if (!ok) throw std::domain_error(msg);
}

}  // namespace

void FiberSpec::validate() const {
    require(length_m > 0.0, "fiber length must be positive");
    require(gamma_per_W_m > 0.0, "fiber gamma must be positive");
    require(zero_dispersion_wavelength_m > 0.0, "zero-dispersion wavelength must be positive");
    require(mode_diameter_m > 0.0, "mode diameter must be positive");
    require(refractive_index > 0.0, "refractive index must be positive");
}

void PumpSpec::validate() const {
    require(wavelength_m > 0.0, "pump wavelength must be positive");
    require(bandwidth_m > 0.0, "pump bandwidth must be positive");
    require(average_power_W >= 0.0, "pump power must be non-negative");
    require(repetition_rate_hz > 0.0, "repetition rate must be positive");
    require(pulse_width_s > 0.0, "pulse width must be positive");
    const double duty = duty_factor();
    require(duty > 0.0 && duty < 1.0, "duty factor R*tau must lie in (0,1)");
}

void DispersionModel::validate() const {
    require(reference_wavelength_m > 0.0, "reference wavelength must be positive");
    require(std::isfinite(beta2_s2_per_m) && std::isfinite(beta3_s3_per_m) &&
                std::isfinite(beta4_s4_per_m),
            "dispersion coefficients must be finite");
}

double peak_power(const PumpSpec& pump) {
    pump.validate();
    return pump.average_power_W / pump.duty_factor();
}

double conjugate_wavelength(double lambda_p_m, double lambda_s_m) {
    require(lambda_p_m > 0.0 && lambda_s_m > 0.0, "wavelengths must be positive");
    const double inv_idler = 2.0 / lambda_p_m - 1.0 / lambda_s_m;
    if (inv_idler <= 0.0)
        throw std::domain_error("conjugate_wavelength: resulting idler frequency is not positive");
    return 1.0 / inv_idler;
}

double signal_detuning(double lambda_s_m, double lambda_p_m) {
    return 2.0 * kPi * kSpeedOfLight * (1.0 / lambda_s_m - 1.0 / lambda_p_m);
}

double linear_mismatch(double detuning_rad_s, const DispersionModel& model) {
    const double w2 = detuning_rad_s * detuning_rad_s;
    return -(model.beta2_s2_per_m * w2 + model.beta4_s4_per_m * w2 * w2 / 12.0);
}

double total_mismatch(double lambda_s_m, const PumpSpec& pump, const FiberSpec& fiber,
                      const DispersionModel& model) {
    (void)conjugate_wavelength(pump.wavelength_m, lambda_s_m);  // propagate domain error
    const double detuning = signal_detuning(lambda_s_m, model.reference_wavelength_m);
    return linear_mismatch(detuning, model) - 2.0 * fiber.gamma_per_W_m * peak_power(pump);
}

namespace {

// total_mismatch as a function of detuning, for root finding.
double mismatch_at(double detuning, const FiberSpec& fiber, const DispersionModel& model,
                   double pk_power) {
    return linear_mismatch(detuning, model) - 2.0 * fiber.gamma_per_W_m * pk_power;
}

}  // namespace

std::pair<double, double> solve_phase_matched_signal(const PumpSpec& pump, const FiberSpec& fiber,
                                                     const DispersionModel& model) {
    fiber.validate();
    model.validate();
    const double pk = peak_power(pump);
    if (pk <= 0.0) throw NumericalError("no phase-matched sideband: zero pump power");

    const double lambda_p = model.reference_wavelength_m;
    const double detuning_max =
        2.0 * kPi * kSpeedOfLight * (1.0 / 400e-9 - 1.0 / lambda_p);
    if (detuning_max <= 0.0) throw NumericalError("pump wavelength outside solver bracket");

    // Scan for the first sign change, then bisect.
    constexpr int kSegments = 4096;
    const double step = detuning_max / kSegments;
    double lo = 0.0;
    double f_lo = mismatch_at(0.0, fiber, model, pk);  // = -2*gamma*P_peak < 0
    double hi = 0.0, f_hi = 0.0;
    bool bracketed = false;
    for (int i = 1; i <= kSegments; ++i) {
        hi = step * i;
        f_hi = mismatch_at(hi, fiber, model, pk);
        if (f_hi == 0.0) {
            lo = hi;
            bracketed = true;
            break;
        }
        if ((f_lo < 0.0) != (f_hi < 0.0)) {
            bracketed = true;
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    if (!bracketed) throw NumericalError("no phase-matched sideband: no sign change in bracket");

    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double f_mid = mismatch_at(mid, fiber, model, pk);
        if (f_mid == 0.0) {
            lo = hi = mid;
            break;
        }
        if ((f_mid < 0.0) == (f_lo < 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    const double root = 0.5 * (lo + hi);
    const double lambda_s = 1.0 / (1.0 / lambda_p + root / (2.0 * kPi * kSpeedOfLight));
    return {lambda_s, conjugate_wavelength(lambda_p, lambda_s)};
}

double signal_shift_per_power(double lambda_s_m, double delta_power_W, const PumpSpec& pump,
                              const FiberSpec& fiber) {
    require(delta_power_W >= 0.0, "power variation must be non-negative");
    pump.validate();
    fiber.validate();
    return fiber.gamma_per_W_m * lambda_s_m * lambda_s_m * delta_power_W /
           (fiber.refractive_index * kPi * pump.duty_factor());
}

double group_delay_walkoff(double lambda_s_m, double lambda_i_m, const DispersionModel& model,
                           double length_m) {
    const double two_over_ref = 2.0 / model.reference_wavelength_m;
    const double sum = 1.0 / lambda_s_m + 1.0 / lambda_i_m;
    require(std::abs(sum - two_over_ref) <= 1e-9 * two_over_ref,
            "group_delay_walkoff: wavelengths are not conjugate about the reference");
    const double w = signal_detuning(lambda_s_m, model.reference_wavelength_m);
    return -length_m * (2.0 * model.beta2_s2_per_m * w + model.beta4_s4_per_m * w * w * w / 3.0);
}

DispersionModel calibrate_dispersion(const PumpSpec& pump, const FiberSpec& fiber,
                                     double matched_signal_m, double walkoff_s,
                                     double calibration_power_W) {
    fiber.validate();
    if (walkoff_s == 0.0) throw CalibrationError("calibrate_dispersion: walkoff must be non-zero");
    const double w = signal_detuning(matched_signal_m, pump.wavelength_m);
    if (w <= 0.0)
        throw CalibrationError("calibrate_dispersion: matched signal must be blue of the pump");

    PumpSpec cal = pump;
    cal.average_power_W = calibration_power_W;
    const double pk = peak_power(cal);

    // [ W^2      W^4/12  ] [beta2]   [ -2*gamma*P_peak ]
    // [ -2 z W  -z W^3/3 ] [beta4] = [  walkoff        ]
    const double z = fiber.length_m;
    const double a11 = w * w, a12 = w * w * w * w / 12.0;
    const double a21 = -2.0 * z * w, a22 = -z * w * w * w / 3.0;
    const double b1 = -2.0 * fiber.gamma_per_W_m * pk;
    const double b2 = walkoff_s;
    const double det = a11 * a22 - a12 * a21;  // = -z*W^5/6, nonzero for W > 0
    if (det == 0.0) throw CalibrationError("calibrate_dispersion: singular system");

    DispersionModel model;
    model.reference_wavelength_m = pump.wavelength_m;
    model.beta2_s2_per_m = (b1 * a22 - a12 * b2) / det;
    model.beta3_s3_per_m = 0.0;
    model.beta4_s4_per_m = (a11 * b2 - b1 * a21) / det;
    model.validate();
    return model;
}

}  // namespace fwm
