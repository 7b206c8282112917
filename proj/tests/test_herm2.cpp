#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cmalab/herm2.hpp"

using namespace cmalab;

namespace {

std::mt19937_64 rng(12345);

Herm2 random_psd() {
    std::normal_distribution<double> gauss(0.0, 1.0);
    // A = L L^* with random complex L entries
    const double l11r = gauss(rng), l11i = gauss(rng);
    const double l12r = gauss(rng), l12i = gauss(rng);
    const double l21r = gauss(rng), l21i = gauss(rng);
    const double l22r = gauss(rng), l22i = gauss(rng);
    Herm2 a;
    a.a11 = l11r * l11r + l11i * l11i + l12r * l12r + l12i * l12i;
    a.a22 = l21r * l21r + l21i * l21i + l22r * l22r + l22i * l22i;
    // (L L^*)_{12} = l11 conj(l21) + l12 conj(l22)
    a.re12 = l11r * l21r + l11i * l21i + l12r * l22r + l12i * l22i;
    a.im12 = l11i * l21r - l11r * l21i + l12i * l22r - l12r * l22i;
    return a;
}

} // namespace

TEST_CASE("eigenvalues and determinant agree") {
    for (int it = 0; it < 1000; ++it) {
        const Herm2 a = random_psd();
        const auto [lo, hi] = a.eigenvalues();
        CHECK(lo * hi == doctest::Approx(a.det()).epsilon(1e-10));
        CHECK(lo + hi == doctest::Approx(a.trace()).epsilon(1e-12));
        CHECK(lo >= -1e-12 * std::fabs(hi)); // psd by construction
    }
}

TEST_CASE("mixed determinant worked values") {
    const Herm2 id{1.0, 1.0, 0.0, 0.0};
    CHECK(mixed_det(id, id) == doctest::Approx(1.0));
    const Herm2 a{1.0, 4.0, 0.0, 0.0};
    const Herm2 b{4.0, 1.0, 0.0, 0.0};
    CHECK(mixed_det(a, b) == doctest::Approx(8.5));
    CHECK(mixed_det(a, b) >= std::sqrt(a.det() * b.det())); // 8.5 >= 4
}

TEST_CASE("mixed determinant inequality holds exactly for random PSD pairs") {
    for (int it = 0; it < 100000; ++it) {
        const Herm2 a = random_psd();
        const Herm2 b = random_psd();
        const double lhs = mixed_det(a, b);
        const double rhs = std::sqrt(std::fmax(a.det(), 0.0) * std::fmax(b.det(), 0.0));
        CHECK(lhs >= rhs - 1e-12 * (1.0 + rhs));
    }
}

TEST_CASE("mixed determinant equality at A == B") {
    for (int it = 0; it < 100; ++it) {
        const Herm2 a = random_psd();
        CHECK(mixed_det(a, a) == doctest::Approx(a.det()).epsilon(1e-12));
    }
}

TEST_CASE("psd clamp") {
    const Herm2 neg{-2.0, -1.0, 0.3, 0.1};
    const Herm2 zero = neg.clamped_psd();
    CHECK(zero.det() == doctest::Approx(0.0));
    CHECK(zero.trace() <= 1e-15);

    for (int it = 0; it < 500; ++it) {
        Herm2 a = random_psd();
        a.a11 -= 2.0; // push one eigenvalue negative sometimes
        const Herm2 c = a.clamped_psd();
        CHECK(c.lambda_min() >= -1e-12 * (1.0 + std::fabs(c.lambda_max())));
        // clamping preserves the top eigenvalue when it is positive
        if (a.lambda_max() > 0.0 && a.lambda_min() < 0.0) {
            CHECK(c.lambda_max() == doctest::Approx(a.lambda_max()).epsilon(1e-9));
        }
        // already psd stays put
        const Herm2 b = random_psd();
        const Herm2 cb = b.clamped_psd();
        CHECK(cb.a11 == doctest::Approx(b.a11));
        CHECK(cb.re12 == doctest::Approx(b.re12));
    }
}
