#include "fwmpairs/fitting.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include "fwmpairs/errors.hpp"

namespace fwm {

namespace {

constexpr double kFwhmFactor = 2.3548200450309493;  // 2*sqrt(2*ln 2)

// Solve a 4x4 linear system in place by Gaussian elimination with partial pivoting.
bool solve4(std::array<std::array<double, 4>, 4>& a, std::array<double, 4>& b) {
    for (int col = 0; col < 4; ++col) {
        int pivot = col;
        for (int r = col + 1; r < 4; ++r)
            if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
        if (a[pivot][col] == 0.0) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (int r = col + 1; r < 4; ++r) {
            const double f = a[r][col] / a[col][col];
            for (int c = col; c < 4; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (int col = 3; col >= 0; --col) {
        double s = b[col];
        for (int c = col + 1; c < 4; ++c) s -= a[col][c] * b[c];
        b[col] = s / a[col][col];
    }
    return true;
}

double chi2(const std::vector<FitPoint>& pts, const std::array<double, 4>& p) {
    double s = 0.0;
    for (const auto& pt : pts) {
        const double w = pt.sigma_y > 0.0 ? 1.0 / (pt.sigma_y * pt.sigma_y) : 1.0;
        const double dx = pt.x - p[1];
        const double r = pt.y - (p[3] + p[0] * std::exp(-dx * dx / (2.0 * p[2] * p[2])));
        s += w * r * r;
    }
    return s;
}

}  // namespace

GaussianFit fit_gaussian(const std::vector<FitPoint>& points) {
    if (points.size() < 5) throw NumericalError("fit_gaussian: need at least 5 points");

    double ymin = points[0].y, ymax = points[0].y, x_at_max = points[0].x;
    for (const auto& p : points) {
        ymin = std::min(ymin, p.y);
        if (p.y > ymax || (p.y == ymax && p.x < x_at_max)) {
            ymax = p.y;
            x_at_max = p.x;
        }
    }
    if (ymax == ymin) throw NumericalError("fit_gaussian: degenerate data (all y equal)");

    // Initial FWHM from half-maximum crossings around the peak.
    const double half = ymin + 0.5 * (ymax - ymin);
    std::vector<FitPoint> sorted = points;
    std::sort(sorted.begin(), sorted.end(),
              [](const FitPoint& a, const FitPoint& b) { return a.x < b.x; });
    double left = sorted.front().x, right = sorted.back().x;
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
        if (sorted[i].x >= x_at_max) break;
        if (sorted[i].y < half && sorted[i + 1].y >= half) left = sorted[i + 1].x;
    }
    for (std::size_t i = sorted.size(); i-- > 1;) {
        if (sorted[i].x <= x_at_max) break;
        if (sorted[i].y < half && sorted[i - 1].y >= half) right = sorted[i - 1].x;
    }
    double fwhm0 = right - left;
    if (fwhm0 <= 0.0) fwhm0 = (sorted.back().x - sorted.front().x) / 4.0;

    // p = {amplitude, center, sigma, baseline}
    std::array<double, 4> p{ymax - ymin, x_at_max, fwhm0 / kFwhmFactor, ymin};
    double lambda = 1e-3;
    double prev_chi2 = chi2(points, p);
    GaussianFit fit;

    for (int it = 0; it < 200; ++it) {
        std::array<std::array<double, 4>, 4> jtj{};
        std::array<double, 4> jtr{};
        for (const auto& pt : points) {
            const double w = pt.sigma_y > 0.0 ? 1.0 / (pt.sigma_y * pt.sigma_y) : 1.0;
            const double dx = pt.x - p[1];
            const double e = std::exp(-dx * dx / (2.0 * p[2] * p[2]));
            const double model = p[3] + p[0] * e;
            const double r = pt.y - model;
            const std::array<double, 4> j{
                e,                                        // d/d amplitude
                p[0] * e * dx / (p[2] * p[2]),            // d/d center
                p[0] * e * dx * dx / (p[2] * p[2] * p[2]),// d/d sigma
                1.0,                                      // d/d baseline
            };
            for (int a = 0; a < 4; ++a) {
                jtr[a] += w * j[a] * r;
                for (int b = 0; b < 4; ++b) jtj[a][b] += w * j[a] * j[b];
            }
        }
        auto damped = jtj;
        for (int a = 0; a < 4; ++a) damped[a][a] *= 1.0 + lambda;
        auto step = jtr;
        if (!solve4(damped, step)) throw NumericalError("fit_gaussian: singular normal equations");

        std::array<double, 4> trial{p[0] + step[0], p[1] + step[1], p[2] + step[2], p[3] + step[3]};
        const double trial_chi2 = chi2(points, trial);
        fit.iterations = it + 1;
        if (trial_chi2 <= prev_chi2) {
            double rel = 0.0;
            for (int a = 0; a < 4; ++a) {
                const double scale = std::max(std::abs(p[a]), 1e-30);
                rel = std::max(rel, std::abs(step[a]) / scale);
            }
            p = trial;
            prev_chi2 = trial_chi2;
            lambda = std::max(lambda * 0.3, 1e-12);
            if (rel < 1e-8) {
                fit.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) break;
        }
    }

    fit.amplitude = p[0];
    fit.center = p[1];
    fit.fwhm = kFwhmFactor * std::abs(p[2]);
    fit.baseline = p[3];
    fit.residual = std::sqrt(prev_chi2 / static_cast<double>(points.size()));
    return fit;
}

double fit_power_law(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 3) throw NumericalError("fit_power_law: need at least 3 points");
    double sx = 0.0, sy = 0.0;
    for (const auto& [x, y] : points) {
        if (x <= 0.0 || y <= 0.0) throw NumericalError("fit_power_law: data must be positive");
        sx += std::log(x);
        sy += std::log(y);
    }
    const double mx = sx / points.size();
    const double my = sy / points.size();
    double num = 0.0, den = 0.0;
    for (const auto& [x, y] : points) {
        const double dx = std::log(x) - mx;
        num += dx * (std::log(y) - my);
        den += dx * dx;
    }
    if (den == 0.0) throw NumericalError("fit_power_law: degenerate abscissa");
    return num / den;
}

}  // namespace fwm
