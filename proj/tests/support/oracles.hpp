#pragma once

// Independent oracles used by the tests. Everything here is computed by a
// different route than the library: truncated pmf summation instead of
// generating functions, explicit binomial sums for the splitter, plain
// trapezoid quadrature for the spectral integral.

#include <cmath>
#include <functional>
#include <vector>

#include "fwmpairs/pairgen.hpp"

namespace oracle {

inline std::vector<double> nb_pmf(double mean, double modes, int nmax) {
    std::vector<double> p(nmax + 1, 0.0);
    if (mean <= 0.0) {
        p[0] = 1.0;
        return p;
    }
    const double theta = mean / (mean + modes);
    p[0] = std::exp(-modes * std::log1p(mean / modes));
    for (int n = 0; n < nmax; ++n) p[n + 1] = p[n] * theta * (modes + n) / (n + 1.0);
    return p;
}

struct ClickProbs {
    double p_s = 0.0;
    double p_i = 0.0;
    double p_c = 0.0;
    double p_a = 0.0;  // p_s * p_i
};

// Brute-force click probabilities by enumerating photon numbers of every
// component on a truncated support.
inline ClickProbs click_probs(const std::vector<fwm::ArmComponent>& comps, double eta_s,
                              double eta_i, int nmax = 48) {
    std::vector<std::vector<double>> pmfs;
    for (const auto& c : comps) pmfs.push_back(nb_pmf(c.mean, c.modes, nmax));

    double no_s = 0.0, no_i = 0.0, no_any = 0.0;
    std::vector<int> counts(comps.size(), 0);
    std::function<void(std::size_t, double)> recurse = [&](std::size_t k, double weight) {
        if (k == comps.size()) {
            double qs = 1.0, qi = 1.0, qb = 1.0;
            for (std::size_t j = 0; j < comps.size(); ++j) {
                const int n = counts[j];
                if (comps[j].to_signal) qs *= std::pow(1.0 - eta_s, n);
                if (comps[j].to_idler) qi *= std::pow(1.0 - eta_i, n);
                if (comps[j].to_signal && comps[j].to_idler)
                    qb *= std::pow((1.0 - eta_s) * (1.0 - eta_i), n);
                else if (comps[j].to_signal)
                    qb *= std::pow(1.0 - eta_s, n);
                else if (comps[j].to_idler)
                    qb *= std::pow(1.0 - eta_i, n);
            }
            no_s += weight * qs;
            no_i += weight * qi;
            no_any += weight * qb;
            return;
        }
        for (int n = 0; n <= nmax; ++n) {
            counts[k] = n;
            recurse(k + 1, weight * pmfs[k][n]);
        }
    };
    recurse(0, 1.0);

    ClickProbs out;
    out.p_s = 1.0 - no_s;
    out.p_i = 1.0 - no_i;
    out.p_c = out.p_s + out.p_i - (1.0 - no_any);
    out.p_a = out.p_s * out.p_i;
    return out;
}

struct SelfProbs {
    double p_half = 0.0;  // one splitter output clicks
    double p_both = 0.0;  // both outputs click, same pulse
};

// Splitter probabilities with the inner binomial sum written out explicitly.
inline SelfProbs self_probs(const std::vector<fwm::ArmComponent>& comps, double eta,
                            bool signal_arm, int nmax = 48) {
    std::vector<std::vector<double>> pmfs;
    std::vector<const fwm::ArmComponent*> used;
    for (const auto& c : comps) {
        if (signal_arm ? c.to_signal : c.to_idler) {
            used.push_back(&c);
            pmfs.push_back(nb_pmf(c.mean, c.modes, nmax));
        }
    }
    // Distribution of the arm photon total by direct convolution.
    std::vector<double> total{1.0};
    for (const auto& pmf : pmfs) {
        std::vector<double> next(total.size() + pmf.size() - 1, 0.0);
        for (std::size_t a = 0; a < total.size(); ++a)
            for (std::size_t b = 0; b < pmf.size(); ++b) next[a + b] += total[a] * pmf[b];
        total = std::move(next);
    }

    SelfProbs out;
    for (std::size_t n = 0; n < total.size(); ++n) {
        // detected k ~ Binomial(n, eta); each detected photon picks a side.
        double p_sub_empty = 0.0;  // E[(1/2)^k | n]
        double p_either_empty = 0.0;
        double binom = std::pow(1.0 - eta, static_cast<double>(n));  // k = 0 term
        for (std::size_t k = 0; k <= n; ++k) {
            const double half = std::pow(0.5, static_cast<double>(k));
            p_sub_empty += binom * half;
            p_either_empty += binom * (2.0 * half - (k == 0 ? 1.0 : 0.0));
            if (k < n)
                binom *= (static_cast<double>(n - k) / (k + 1.0)) * (eta / (1.0 - eta));
        }
        out.p_half += total[n] * (1.0 - p_sub_empty);
        out.p_both += total[n] * (1.0 - p_either_empty);
    }
    return out;
}

// Plain trapezoid version of the joint spectral integral.
inline double jsi_trapezoid(double signal_center_m, double signal_width_m, bool idler_window,
                            double idler_center_m, double idler_width_m, double pump_wavelength_m,
                            double beta2, double beta4, double nonlinear_shift, double z,
                            double sigma_pump, int n_outer = 600, int n_inner = 400) {
    constexpr double c_light = 299792458.0;
    constexpr double pi = 3.14159265358979323846;
    const double w_pump = 2.0 * pi * c_light / pump_wavelength_m;
    const double ws_lo = 2.0 * pi * c_light / (signal_center_m + signal_width_m / 2.0);
    const double ws_hi = 2.0 * pi * c_light / (signal_center_m - signal_width_m / 2.0);
    const double reach = 8.0 * std::sqrt(2.0) * sigma_pump;

    double total = 0.0;
    const double hs = (ws_hi - ws_lo) / n_outer;
    for (int a = 0; a <= n_outer; ++a) {
        const double nu_s = ws_lo + hs * a - w_pump;
        double lo = -nu_s - reach, hi = -nu_s + reach;
        if (idler_window) {
            lo = std::max(lo, 2.0 * pi * c_light / (idler_center_m + idler_width_m / 2.0) - w_pump);
            hi = std::min(hi, 2.0 * pi * c_light / (idler_center_m - idler_width_m / 2.0) - w_pump);
        }
        if (hi <= lo) continue;
        const double hi_step = (hi - lo) / n_inner;
        double row = 0.0;
        for (int b = 0; b <= n_inner; ++b) {
            const double nu_i = lo + hi_step * b;
            const double d = nu_s + nu_i;
            const double env = std::exp(-d * d / (4.0 * sigma_pump * sigma_pump));
            const double dk = -(beta2 * (nu_s * nu_s + nu_i * nu_i) / 2.0 +
                                beta4 * (nu_s * nu_s * nu_s * nu_s + nu_i * nu_i * nu_i * nu_i) /
                                    24.0) -
                              nonlinear_shift;
            const double x = dk * z / 2.0;
            const double s = x == 0.0 ? 1.0 : std::sin(x) / x;
            const double f = env * s * s;
            row += (b == 0 || b == n_inner) ? 0.5 * f : f;
        }
        row *= hi_step;
        total += (a == 0 || a == n_outer) ? 0.5 * row : row;
    }
    return total * hs;
}

}  // namespace oracle
