#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>

#include "cmalab/experiments.hpp"
#include "cmalab/grid.hpp"
#include "cmalab/solver.hpp"

using namespace cmalab;

namespace {

SolveOptions fast_opts(const Grid& g) {
    SolveOptions o;
    o.relaxation = sor_relaxation(g);
    return o;
}

} // namespace

TEST_CASE("default amplitude schedule spans 1.5 decades") {
    const std::vector<double> amps = default_amplitudes();
    CHECK(amps.size() >= 5);
    CHECK(amps.back() / amps.front() >= std::pow(10.0, 1.5) - 1e-9);
    for (std::size_t j = 1; j < amps.size(); ++j) CHECK(amps[j] > amps[j - 1]);
}

TEST_CASE("make_pair: masses equalized, nonnegative, clip bias tracked") {
    const Grid g(8);
    const HermitianField G = flat_background(g);
    const MeasureField omega = uniform_measure(g);
    for (const auto kind :
         {FamilyKind::Trig, FamilyKind::Peak, FamilyKind::IndicatorMollified}) {
        PerturbationFamily fam;
        fam.kind = kind;
        fam.seed = 3;
        const DensityPair pair = make_pair(fam, 0.7, G, omega, g);
        CHECK(pair.mass_f == doctest::Approx(pair.mass_g).epsilon(1e-12));
        CHECK(pair.mass_f == doctest::Approx(total_mass(G, g)).epsilon(1e-12));
        for (double v : pair.f) CHECK(v >= 0.0);
        for (double v : pair.g) CHECK(v >= 0.0);
        CHECK(pair.clip_bias >= 0.0);
    }
    // heavy clipping is actually reported for violent trig amplitudes
    PerturbationFamily fam;
    fam.seed = 3;
    const DensityPair clipped = make_pair(fam, 3.0, G, omega, g);
    CHECK(clipped.clip_bias > 0.0);
}

TEST_CASE("normalize_pair: worked example, exact equality, idempotence") {
    const Grid g(8);
    PotentialField phi = zero_field(g);
    PotentialField psi = zero_field(g);
    // make the fields non-trivial
    phi.v[3] = -0.5;
    phi.v[7] = -1.25;
    psi.v[11] = -0.75;

    // psi = phi + 5: after the shift both maxima vanish
    PotentialField psi_shift = phi;
    for (auto& v : psi_shift.v) v += 5.0;
    const auto [p1, q1] = normalize_pair(phi, psi_shift);
    double max_pm = -1e300, max_mp = -1e300;
    for (std::size_t i = 0; i < p1.v.size(); ++i) {
        max_pm = std::fmax(max_pm, p1.v[i] - q1.v[i]);
        max_mp = std::fmax(max_mp, q1.v[i] - p1.v[i]);
    }
    CHECK(max_pm == doctest::Approx(0.0));
    CHECK(max_mp == doctest::Approx(0.0));

    // generic pair: maxima agree to 1e-14 and renormalizing changes nothing
    const auto [p2, q2] = normalize_pair(phi, psi);
    max_pm = -1e300;
    max_mp = -1e300;
    for (std::size_t i = 0; i < p2.v.size(); ++i) {
        max_pm = std::fmax(max_pm, p2.v[i] - q2.v[i]);
        max_mp = std::fmax(max_mp, q2.v[i] - p2.v[i]);
    }
    CHECK(std::fabs(max_pm - max_mp) <= 1e-14);
    const auto [p3, q3] = normalize_pair(p2, q2);
    for (std::size_t i = 0; i < q2.v.size(); ++i) {
        CHECK(q3.v[i] == doctest::Approx(q2.v[i]));
    }
}

TEST_CASE("stability sweep on a small grid: fit, references, determinism") {
    const Grid g(8);
    const HermitianField G = flat_background(g);
    const MeasureField omega = uniform_measure(g);
    PerturbationFamily fam;
    fam.seed = 17;

    const StabilitySweepResult a = run_stability_sweep(fam, G, omega, g, 0.1, fast_opts(g));
    CHECK(a.fit_ok);
    CHECK(a.records.size() == default_amplitudes().size());
    for (const auto& r : a.records) CHECK(r.converged);
    // reference exponents for n = 2, eps = 0.1
    CHECK(a.ref_loose == doctest::Approx(1.0 / 5.1));
    CHECK(a.ref_improved == doctest::Approx(1.0 / 4.1));
    CHECK(a.ref_main == doctest::Approx(1.0 / 2.1));
    // smooth perturbations respond nearly linearly
    CHECK(a.e_hat >= 1.0 / 3.0);
    // theta values really span 1.5 decades
    CHECK(a.records.back().theta / a.records.front().theta >= std::pow(10.0, 1.4));

    // bit-for-bit reproducibility of the records
    const StabilitySweepResult b = run_stability_sweep(fam, G, omega, g, 0.1, fast_opts(g));
    REQUIRE(a.records.size() == b.records.size());
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(std::memcmp(&a.records[i].theta, &b.records[i].theta, sizeof(double)) == 0);
        CHECK(std::memcmp(&a.records[i].d_sup, &b.records[i].d_sup, sizeof(double)) == 0);
        CHECK(std::memcmp(&a.records[i].d_s, &b.records[i].d_s, sizeof(double)) == 0);
    }
}

TEST_CASE("identical densities produce zero distances and no fit") {
    const Grid g(8);
    const HermitianField G = flat_background(g);
    const MeasureField omega = uniform_measure(g);
    PerturbationFamily fam;
    fam.seed = 2;
    fam.amplitudes = {0.0, 0.0, 0.0, 0.0, 0.0};
    const StabilitySweepResult res = run_stability_sweep(fam, G, omega, g, 0.1, fast_opts(g));
    CHECK_FALSE(res.fit_ok); // zero-theta records cannot enter a log fit
    for (const auto& r : res.records) {
        CHECK(r.theta == doctest::Approx(0.0));
        CHECK(r.d_sup <= 1e-7); // identical data, identical solves
    }
}

TEST_CASE("unconverged records are flagged and excluded from fits") {
    const Grid g(8);
    const HermitianField G = flat_background(g);
    const MeasureField omega = uniform_measure(g);
    PerturbationFamily fam;
    fam.seed = 4;
    SolveOptions strangled;
    strangled.max_sweeps = 2;
    const StabilitySweepResult res = run_stability_sweep(fam, G, omega, g, 0.1, strangled);
    CHECK_FALSE(res.fit_ok);
    for (const auto& r : res.records) CHECK_FALSE(r.converged);
}

TEST_CASE("egz sweep: reference exponent and limits") {
    const Grid g(8);
    const HermitianField G = flat_background(g);
    const MeasureField omega = uniform_measure(g);
    PerturbationFamily fam;
    fam.seed = 23;

    const EgzSweepResult res = run_egz_sweep(fam, G, omega, g, 2.0, 2.0, 0.1, fast_opts(g));
    // s = 2, p = 2 (q = 2), n = 2: reference = 2 / (4 + 2 + eps)
    CHECK(res.reference == doctest::Approx(2.0 / 6.1));
    CHECK(res.fit_ok);
    CHECK(res.e_hat > 0.0);

    // s -> infinity drives the reference exponent to 1
    const EgzSweepResult big = run_egz_sweep(fam, G, omega, g, 1e9, 2.0, 0.1, fast_opts(g));
    CHECK(big.reference == doctest::Approx(1.0).epsilon(1e-6));

    CHECK_THROWS_AS(run_egz_sweep(fam, G, omega, g, -1.0, 2.0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(run_egz_sweep(fam, G, omega, g, 2.0, 1.0, 0.1), std::invalid_argument);
}

TEST_CASE("proof-set diagnostics") {
    const Grid g(8);
    const HermitianField G = flat_background(g);
    const MeasureField omega = uniform_measure(g);
    PerturbationFamily fam;
    fam.seed = 31;
    const DensityPair pair = make_pair(fam, 0.4, G, omega, g);
    const SolveResult phi = solve(pair.f, G, omega, g, fast_opts(g));
    const SolveResult psi = solve(pair.g, G, omega, g, fast_opts(g));
    REQUIRE(phi.diag.converged);
    REQUIRE(psi.diag.converged);
    const auto [ph, ps] = normalize_pair(phi.u, psi.u);

    const ProofSetReport rep =
        proof_set_diagnostics(ph, ps, pair.f, pair.g, omega, g, 0.1, 1.0);
    CHECK(rep.bound_ok); // t^2 mass(G) <= ||f - g||_1
    CHECK(rep.mass_E0 >= rep.mass_E2);
    CHECK(rep.mass_E2 >= rep.mass_E4); // nested sets
    CHECK(rep.l1_fg > 0.0);

    // f = g: the set G = {f < (1 - t^2) g} is empty
    const ProofSetReport same =
        proof_set_diagnostics(ph, ps, pair.f, pair.f, omega, g, 0.1, 1.0);
    CHECK(same.mass_G == 0.0);
    CHECK(same.l1_fg == 0.0);

    CHECK_THROWS_AS(proof_set_diagnostics(ph, ps, pair.f, pair.g, omega, g, 0.0, 1.0),
                    std::invalid_argument);
}
