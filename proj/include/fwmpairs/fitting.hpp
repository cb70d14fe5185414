#pragma once

// Small deterministic least-squares fitters for the scan outputs.

#include <vector>

namespace fwm {

struct FitPoint {
    double x = 0.0;
    double y = 0.0;
    double sigma_y = 0.0;  // <= 0 means unweighted
};

struct GaussianFit {
    double center = 0.0;
    double fwhm = 0.0;
    double amplitude = 0.0;
    double baseline = 0.0;
    double residual = 0.0;  // weighted RMS residual
    bool converged = false;
    int iterations = 0;
};

// Weighted nonlinear least squares of y = baseline + amplitude*exp(-(x-c)^2/(2 s^2)).
// Deterministic initialization: center = argmax y (smallest x on ties),
// baseline = min y, amplitude = max - min, FWHM from the half-maximum
// crossings. Levenberg-Marquardt until the relative parameter change drops
// below 1e-8 or 200 iterations. Throws on degenerate input (< 5 points or
// all-equal y).
GaussianFit fit_gaussian(const std::vector<FitPoint>& points);

// Least-squares slope of log(y) against log(x). Throws on non-positive data
// or fewer than 3 points.
double fit_power_law(const std::vector<std::pair<double, double>>& points);

}  // namespace fwm
