#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>

#include "cmalab/grid.hpp"
#include "cmalab/solver.hpp"

using namespace cmalab;

namespace {

constexpr double kPi = 3.14159265358979323846;

// Fill grid values from a function of the raw (unwrapped) node coordinates.
PotentialField fill(const Grid& g, const std::function<double(double, double, double, double)>& f) {
    PotentialField u = zero_field(g);
    const double h = g.spacing();
    for (int i = 0; i < g.N; ++i) {
        for (int j = 0; j < g.N; ++j) {
            for (int k = 0; k < g.N; ++k) {
                for (int l = 0; l < g.N; ++l) {
                    u.v[g.index(i, j, k, l)] = f(i * h, j * h, k * h, l * h);
                }
            }
        }
    }
    u.sup_normalized = false;
    return u;
}

bool interior(const Grid& g, int i, int j, int k, int l) {
    return i >= 1 && i <= g.N - 2 && j >= 1 && j <= g.N - 2 && k >= 1 && k <= g.N - 2 &&
           l >= 1 && l <= g.N - 2;
}

} // namespace

TEST_CASE("grid basics") {
    CHECK_THROWS_AS(Grid(7), std::invalid_argument);
    CHECK_THROWS_AS(Grid(6), std::invalid_argument);
    const Grid g(16);
    CHECK(g.node_count() == 65536);
    CHECK(g.cell_volume() == doctest::Approx(std::pow(1.0 / 16, 4)));
    const auto c = g.coords(g.index(3, 5, 7, 9));
    CHECK(c[0] == 3);
    CHECK(c[1] == 5);
    CHECK(c[2] == 7);
    CHECK(c[3] == 9);
}

TEST_CASE("complex hessian: constants map to zero") {
    const Grid g(8);
    PotentialField u = zero_field(g);
    for (auto& x : u.v) x = 3.7;
    const HermitianField H = complex_hessian(u, g);
    for (const Herm2& m : H.m) {
        CHECK(m.a11 == doctest::Approx(0.0));
        CHECK(m.a22 == doctest::Approx(0.0));
        CHECK(m.re12 == doctest::Approx(0.0));
        CHECK(m.im12 == doctest::Approx(0.0));
    }
}

TEST_CASE("complex hessian is exact on real quadratics (periodic patch)") {
    const Grid g(12);
    // u = x1^2 + y1^2 has u_{1 1bar} = 1, everything else 0
    {
        const PotentialField u =
            fill(g, [](double x1, double y1, double, double) { return x1 * x1 + y1 * y1; });
        const HermitianField H = complex_hessian(u, g);
        for (int i = 0; i < g.N; ++i)
            for (int j = 0; j < g.N; ++j)
                for (int k = 0; k < g.N; ++k)
                    for (int l = 0; l < g.N; ++l) {
                        if (!interior(g, i, j, k, l)) continue; // stencil crosses the wrap
                        const Herm2& m = H.m[g.index(i, j, k, l)];
                        CHECK(m.a11 == doctest::Approx(1.0).epsilon(1e-10));
                        CHECK(m.a22 == doctest::Approx(0.0));
                        CHECK(std::fabs(m.re12) < 1e-10);
                        CHECK(std::fabs(m.im12) < 1e-10);
                    }
    }
    // u = x1 x2 + x1 y2 exercises both parts of the off-diagonal entry
    {
        const PotentialField u = fill(
            g, [](double x1, double, double x2, double y2) { return x1 * x2 + x1 * y2; });
        const HermitianField H = complex_hessian(u, g);
        const Herm2& m = H.m[g.index(5, 5, 5, 5)];
        CHECK(m.a11 == doctest::Approx(0.0));
        CHECK(m.a22 == doctest::Approx(0.0));
        CHECK(m.re12 == doctest::Approx(0.25).epsilon(1e-10)); // (u_x1x2)/4
        CHECK(m.im12 == doctest::Approx(0.25).epsilon(1e-10)); // (u_x1y2)/4
    }
}

TEST_CASE("complex hessian of a single cosine mode carries the discrete symbol") {
    for (const int N : {8, 16, 32}) {
        const Grid g(N);
        const double h = g.spacing();
        const PotentialField u =
            fill(g, [](double x1, double, double, double) { return std::cos(2 * kPi * x1); });
        const HermitianField H = complex_hessian(u, g);
        const double symbol = std::pow(std::sin(kPi * h) / (kPi * h), 2);
        for (int i = 0; i < g.N; i += 3) {
            const double expected = -kPi * kPi * std::cos(2 * kPi * i * h) * symbol;
            const Herm2& m = H.m[g.index(i, 2, 3, 4 % N)];
            CHECK(m.a11 == doctest::Approx(expected).epsilon(1e-11));
            CHECK(m.a22 == doctest::Approx(0.0));
        }
        // O(h^2) approach to the continuum value -pi^2 cos
        const double err = std::fabs(-kPi * kPi * symbol - (-kPi * kPi));
        CHECK(err <= kPi * kPi * kPi * kPi * h * h / 3.0);
    }
}

TEST_CASE("hermitian symmetry: conjugate stencil computed independently") {
    const Grid g(8);
    const PotentialField u = fill(g, [](double x1, double y1, double x2, double y2) {
        return std::cos(2 * kPi * (x1 + y2)) + std::sin(2 * kPi * (y1 + x2)) +
               0.3 * std::cos(2 * kPi * (x1 + x2));
    });
    const HermitianField H = complex_hessian(u, g);
    const double h = g.spacing();
    const double inv4h2 = 0.25 / (h * h);
    // u_{2 1bar} built from its own stencils must equal conj(u_{1 2bar})
    for (int i = 0; i < g.N; ++i) {
        for (int j = 0; j < g.N; ++j) {
            const int k = (i * 3 + j) % g.N, l = (i + 2 * j) % g.N;
            const auto at = [&](int a, int b, int c2, int d) {
                return u.v[g.index(g.wrap(a), g.wrap(b), g.wrap(c2), g.wrap(d))];
            };
            const double x2x1 = at(i + 1, j, k + 1, l) - at(i - 1, j, k + 1, l) -
                                at(i + 1, j, k - 1, l) + at(i - 1, j, k - 1, l);
            const double y2y1 = at(i, j + 1, k, l + 1) - at(i, j - 1, k, l + 1) -
                                at(i, j + 1, k, l - 1) + at(i, j - 1, k, l - 1);
            const double x2y1 = at(i, j + 1, k + 1, l) - at(i, j - 1, k + 1, l) -
                                at(i, j + 1, k - 1, l) + at(i, j - 1, k - 1, l);
            const double y2x1 = at(i + 1, j, k, l + 1) - at(i - 1, j, k, l + 1) -
                                at(i + 1, j, k, l - 1) + at(i - 1, j, k, l - 1);
            const double re21 = 0.25 * (x2x1 + y2y1) * inv4h2;
            const double im21 = 0.25 * (x2y1 - y2x1) * inv4h2;
            const Herm2& m = H.m[g.index(i, j, k, l)];
            CHECK(std::fabs(re21 - m.re12) <= 1e-14 * (1.0 + std::fabs(m.re12)) + 1e-10);
            CHECK(std::fabs(im21 + m.im12) <= 1e-14 * (1.0 + std::fabs(m.im12)) + 1e-10);
        }
    }
}

TEST_CASE("backgrounds: flat and cosine-degenerate") {
    const Grid g(16);
    const HermitianField flat = flat_background(g);
    CHECK(total_mass(flat, g) == doctest::Approx(1.0).epsilon(1e-14));

    const HermitianField cd = cosine_degenerate_background(g, 1.0);
    CHECK(total_mass(cd, g) == doctest::Approx(1.0).epsilon(1e-12));
    double min_eig = 1e300;
    for (const Herm2& m : cd.m) min_eig = std::fmin(min_eig, m.lambda_min());
    CHECK(min_eig >= -1e-15);
    // eigenvalue vanishes exactly at x1 = y1 = 0 when c = 1
    CHECK(cd.m[g.index(0, 0, 3, 5)].lambda_min() == doctest::Approx(0.0));
    // and is positive away from the degenerate fiber
    CHECK(cd.m[g.index(1, 0, 3, 5)].lambda_min() > 0.0);

    const HermitianField half = cosine_degenerate_background(g, 0.5);
    double min_half = 1e300;
    for (const Herm2& m : half.m) min_half = std::fmin(min_half, m.lambda_min());
    CHECK(min_half == doctest::Approx(0.5));

    CHECK_THROWS_AS(cosine_degenerate_background(g, 1.5), std::invalid_argument);
}

TEST_CASE("ma_measure worked values") {
    const Grid g(12);
    const HermitianField G = flat_background(g);
    const MAResult flat = ma_measure(zero_field(g), G, g);
    CHECK(flat.mass == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(flat.clamp_magnitude == doctest::Approx(0.0));
    for (double w : flat.density.w) CHECK(w == doctest::Approx(1.0));

    // Hu = diag(a, b) on a quadratic patch: density (1+a)(1+b) at interior nodes
    const double a = 0.3, b = -0.4;
    const PotentialField u = fill(g, [&](double x1, double y1, double x2, double y2) {
        return a * (x1 * x1 + y1 * y1) + b * (x2 * x2 + y2 * y2);
    });
    const MAResult res = ma_measure(u, G, g);
    CHECK(res.density.w[g.index(5, 5, 5, 5)] ==
          doctest::Approx((1 + a) * (1 + b)).epsilon(1e-10));
}

TEST_CASE("sup_normalize") {
    const Grid g(8);
    PotentialField u = zero_field(g);
    for (std::size_t p = 0; p < u.v.size(); ++p) u.v[p] = 0.01 * static_cast<double>(p % 7) + 2.0;
    sup_normalize(u);
    double mx = -1e300;
    for (double x : u.v) mx = std::fmax(mx, x);
    CHECK(mx == doctest::Approx(0.0));
    CHECK(u.sup_normalized);
}

TEST_CASE("prolongation reproduces smooth periodic modes") {
    const Grid gc(8), gf(16);
    const PotentialField uc =
        fill(gc, [](double x1, double, double, double) { return std::cos(2 * kPi * x1); });
    const PotentialField uf = prolong(uc, gc, gf);
    // exact at coincident nodes
    for (int i = 0; i < gc.N; ++i) {
        CHECK(uf.v[gf.index(2 * i, 0, 0, 0)] ==
              doctest::Approx(uc.v[gc.index(i, 0, 0, 0)]).epsilon(1e-13));
    }
    // interpolation error stays small at midpoints
    for (int i = 0; i < gf.N; ++i) {
        const double exact = std::cos(2 * kPi * i / gf.N);
        CHECK(std::fabs(uf.v[gf.index(i, 0, 0, 0)] - exact) < 0.08);
    }
}
