#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace cmalab {

// Least-squares line through (x_i, y_i); residual is the max absolute
// deviation of the fit.
struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
    std::size_t samples = 0;
};

inline FitResult fit_line(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw std::invalid_argument("fit_line: need at least two matching samples");
    }
    const std::size_t n = x.size();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    if (std::abs(denom) < 1e-300) {
        throw std::invalid_argument("fit_line: degenerate abscissae");
    }
    FitResult r;
    r.samples = n;
    r.slope = (n * sxy - sx * sy) / denom;
    r.intercept = (sy - r.slope * sx) / n;
    for (std::size_t i = 0; i < n; ++i) {
        const double res = std::abs(y[i] - (r.slope * x[i] + r.intercept));
        if (res > r.max_residual) r.max_residual = res;
    }
    return r;
}

// Log-log power-law fit: y ~ exp(intercept) * x^slope. All samples must be
// strictly positive.
inline FitResult fit_loglog(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: size mismatch");
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) {
            throw std::invalid_argument("fit_loglog: samples must be positive");
        }
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return fit_line(lx, ly);
}

} // namespace cmalab
