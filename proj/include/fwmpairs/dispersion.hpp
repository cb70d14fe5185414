#pragma once

// Fiber dispersion model and four-wave-mixing phase matching.
//
// The dispersion curve is a Taylor expansion of beta(omega) around the pump
// frequency. Only even orders survive in the symmetric pair mismatch
// 2*beta(w_p) - beta(w_p+W) - beta(w_p-W) = -(beta2*W^2 + beta4*W^4/12),
// so beta0/beta1 never appear and beta3 cancels identically.

#include <utility>

namespace fwm {

struct FiberSpec {
    double length_m = 1.8;                       // z
    double gamma_per_W_m = 0.11;                 // nonlinearity, 1/(W*m)
    double zero_dispersion_wavelength_m = 735.7e-9;
    double mode_diameter_m = 1.2e-6;
    double refractive_index = 1.46;              // index at the signal wavelength

    void validate() const;
};

struct PumpSpec {
    double wavelength_m = 735.7e-9;
    double bandwidth_m = 0.1e-9;                 // FWHM of the pump spectrum
    double average_power_W = 1.0e-3;
    double repetition_rate_hz = 80.0e6;
    double pulse_width_s = 8.0e-12;

    double duty_factor() const { return repetition_rate_hz * pulse_width_s; }
    void validate() const;
};

struct DispersionModel {
    double reference_wavelength_m = 735.7e-9;    // expansion point (pump)
    double beta2_s2_per_m = 0.0;
    double beta3_s3_per_m = 0.0;
    double beta4_s4_per_m = 0.0;

    bool symmetric_degenerate() const { return beta2_s2_per_m == 0.0 && beta4_s4_per_m < 0.0; }
    void validate() const;
};

// Average power / duty factor.
double peak_power(const PumpSpec& pump);

// Idler wavelength from 1/l_i = 2/l_p - 1/l_s. Throws std::domain_error when
// the conjugate frequency is not positive.
double conjugate_wavelength(double lambda_p_m, double lambda_s_m);

// Signal-side angular detuning 2*pi*c*(1/l_s - 1/l_p).
double signal_detuning(double lambda_s_m, double lambda_p_m);

// 2k_p - k_s - k_i for a symmetric pair at detuning W; equals
// -(beta2*W^2 + beta4*W^4/12). Even in W.
double linear_mismatch(double detuning_rad_s, const DispersionModel& model);

// linear_mismatch at the conjugate pair of lambda_s minus the nonlinear term
// 2*gamma*P_peak.
double total_mismatch(double lambda_s_m, const PumpSpec& pump, const FiberSpec& fiber,
                      const DispersionModel& model);

// Smallest positive detuning where total_mismatch vanishes. Bisection on a
// scanned bracket W in (0, 2*pi*c*(1/400nm - 1/l_p)]; throws NumericalError
// ("no phase-matched sideband") when no sign change exists.
std::pair<double, double> solve_phase_matched_signal(const PumpSpec& pump, const FiberSpec& fiber,
                                                     const DispersionModel& model);

// gamma*l_s^2*dP / (n*pi*R*tau): nominal wavelength pull of the matched signal
// per average-power change.
double signal_shift_per_power(double lambda_s_m, double delta_power_W, const PumpSpec& pump,
                              const FiberSpec& fiber);

// Group-delay difference z*(beta1(idler) - beta1(signal)) = -z*(2*beta2*W + beta4*W^3/3).
// Positive means the idler (longer wavelength) arrives later. Odd in W.
double group_delay_walkoff(double lambda_s_m, double lambda_i_m, const DispersionModel& model,
                           double length_m);

// Solves { beta2*W^2 + beta4*W^4/12 = -2*gamma*P_peak ;
//          -z*(2*beta2*W + beta4*W^3/3) = walkoff } exactly for (beta2, beta4),
// with beta3 fixed at 0. The matched wavelength and walkoff pin the model:
// note d(mismatch)/dW = walkoff/z, so the walkoff sets both the phase-matching
// bandwidth and the power-tuning slope.
DispersionModel calibrate_dispersion(const PumpSpec& pump, const FiberSpec& fiber,
                                     double matched_signal_m, double walkoff_s,
                                     double calibration_power_W);

}  // namespace fwm
