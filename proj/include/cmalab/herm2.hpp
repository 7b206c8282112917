#pragma once

#include <cmath>
#include <utility>

namespace cmalab {

// 2x2 Hermitian matrix [[a11, m12], [conj(m12), a22]] stored as four reals.
struct Herm2 {
    double a11 = 0.0;
    double a22 = 0.0;
    double re12 = 0.0;
    double im12 = 0.0;

    double trace() const { return a11 + a22; }
    double off_abs2() const { return re12 * re12 + im12 * im12; }
    double det() const { return a11 * a22 - off_abs2(); }

    double lambda_min() const {
        const double half_diff = 0.5 * (a11 - a22);
        return 0.5 * trace() - std::sqrt(half_diff * half_diff + off_abs2());
    }
    double lambda_max() const {
        const double half_diff = 0.5 * (a11 - a22);
        return 0.5 * trace() + std::sqrt(half_diff * half_diff + off_abs2());
    }
    std::pair<double, double> eigenvalues() const { // (min, max)
        return {lambda_min(), lambda_max()};
    }

    // det with negative eigenvalues clamped to zero.
    double det_clamped() const {
        const double lo = lambda_min();
        const double hi = lambda_max();
        return std::fmax(lo, 0.0) * std::fmax(hi, 0.0);
    }

    // Projection onto the PSD cone (eigenvalue clamp).
    Herm2 clamped_psd() const {
        const double lo = lambda_min();
        if (lo >= 0.0) return *this;
        const double hi = lambda_max();
        if (hi <= 0.0) return Herm2{};
        // rank-one part hi * v v^* for the top eigenvector v.
        const double d1 = a11 - lo;
        const double d2 = a22 - lo;
        // (A - lo I) = (hi - lo) v v^*; normalize by its trace.
        const double tr = d1 + d2;
        if (tr <= 0.0) return Herm2{};
        const double s = hi / tr;
        return Herm2{s * d1, s * d2, s * re12, s * im12};
    }

    Herm2 operator+(const Herm2& o) const {
        return {a11 + o.a11, a22 + o.a22, re12 + o.re12, im12 + o.im12};
    }
    Herm2 operator-(const Herm2& o) const {
        return {a11 - o.a11, a22 - o.a22, re12 - o.re12, im12 - o.im12};
    }
    Herm2 operator*(double s) const { return {s * a11, s * a22, s * re12, s * im12}; }
};

// Mixed determinant D(A, B) = (det(A+B) - det A - det B) / 2, the 2x2 avatar
// of the mixed Monge-Ampere form.
inline double mixed_det(const Herm2& a, const Herm2& b) {
    return 0.5 * (a.a11 * b.a22 + b.a11 * a.a22) - (a.re12 * b.re12 + a.im12 * b.im12);
}

} // namespace cmalab
