#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <utility>

namespace cmalab {

struct QuadResult {
    double value = 0.0;
    double error_estimate = 0.0;
    bool converged = true;
};

namespace detail {

template <class F>
QuadResult simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                       double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        return {left + right + delta / 15.0, std::abs(delta) / 15.0, depth > 0};
    }
    QuadResult l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1);
    QuadResult r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    return {l.value + r.value, l.error_estimate + r.error_estimate, l.converged && r.converged};
}

} // namespace detail

// Adaptive Simpson on [a, b]. tol is absolute; callers set it from the
// expected scale of the integral.
template <class F>
QuadResult adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 48) {
    if (!(b > a)) return {0.0, 0.0, true};
    const double fa = f(a);
    const double fb = f(b);
    const double fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Gauss-Legendre nodes/weights on [-1, 1], computed once by Newton iteration
// on the Legendre polynomial.
template <std::size_t N>
struct GaussLegendre {
    std::array<double, N> node{};
    std::array<double, N> weight{};

    GaussLegendre() {
        constexpr double pi = 3.14159265358979323846;
        for (std::size_t i = 0; i < N; ++i) {
            double x = std::cos(pi * (static_cast<double>(i) + 0.75) /
                                (static_cast<double>(N) + 0.5));
            double p0 = 0.0, p1 = 0.0;
            for (int it = 0; it < 100; ++it) {
                p0 = 1.0;
                p1 = x;
                for (std::size_t k = 2; k <= N; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                const double dp = N * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            const double dp = N * (x * p1 - p0) / (x * x - 1.0);
            node[i] = x;
            weight[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
    }
};

// Integrate f over [a, b] with a fixed 64-node Gauss-Legendre rule.
template <class F>
double gauss64(const F& f, double a, double b) {
    static const GaussLegendre<64> rule;
    const double c = 0.5 * (a + b);
    const double hw = 0.5 * (b - a);
    double sum = 0.0;
    for (std::size_t i = 0; i < 64; ++i) {
        sum += rule.weight[i] * f(c + hw * rule.node[i]);
    }
    return hw * sum;
}

} // namespace cmalab
