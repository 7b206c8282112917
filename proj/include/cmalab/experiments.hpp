#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cmalab/fitting.hpp"
#include "cmalab/grid.hpp"
#include "cmalab/solver.hpp"

namespace cmalab {

enum class FamilyKind { Trig, Peak, IndicatorMollified };

struct PerturbationFamily {
    FamilyKind kind = FamilyKind::Trig;
    std::vector<double> amplitudes; // theta schedule
    double peak_gamma = 0.12;       // width parameter for Peak / mollified families
    double base_amplitude = 0.35;   // modulation of the shared base density f
    std::uint64_t seed = 1;
    double p = 2.0;                 // integrability exponent carried with the pair
};

// Default amplitude schedule: 6 values log-spaced over 1.5 decades.
std::vector<double> default_amplitudes();

// Builds a mass-normalized density pair (f, g): g = clip(f + theta * eta, 0)
// with a zero-mean perturbation eta drawn from the family, then both scaled
// so their Omega-masses equal the total background mass.
DensityPair make_pair(const PerturbationFamily& fam, double theta, const HermitianField& G,
                      const MeasureField& omega, const Grid& g);

// Shifts psi by (max(phi-psi) - max(psi-phi))/2 so the two maxima agree.
std::pair<PotentialField, PotentialField> normalize_pair(const PotentialField& phi,
                                                         const PotentialField& psi);

struct StabilityRecord {
    int index = 0;
    double theta = 0.0;   // ||f - g||_{L1(Omega)} as generated
    double d_sup = 0.0;   // ||phi - psi||_inf after normalization
    double d_s = 0.0;     // ||phi - psi||_{L^s(omega^n)}
    double residual_phi = 0.0;
    double residual_psi = 0.0;
    bool converged = false;
};

struct StabilitySweepResult {
    std::vector<StabilityRecord> records;
    FitResult fit;          // log d_sup vs log theta over converged records
    double e_hat = 0.0;     // fitted stability exponent
    double ref_loose = 0.0; // 1/(n+3+eps)
    double ref_improved = 0.0; // 1/(n+2+eps)
    double ref_main = 0.0;  // 1/(n+eps)
    bool fit_ok = false;    // at least 4 converged records
    double eps = 0.0;
    double s_norm = 2.0;    // exponent used for the recorded d_s
};

StabilitySweepResult run_stability_sweep(const PerturbationFamily& fam,
                                         const HermitianField& G, const MeasureField& omega,
                                         const Grid& g, double eps,
                                         const SolveOptions& solve_opts = {});

struct EgzSweepResult {
    std::vector<StabilityRecord> records;
    FitResult fit;          // log d_sup vs log d_s
    double e_hat = 0.0;
    double reference = 0.0; // s/(n q + s + eps), q = p/(p-1)
    bool fit_ok = false;
    double s = 2.0;
    double p = 2.0;
    double eps = 0.0;
};

EgzSweepResult run_egz_sweep(const PerturbationFamily& fam, const HermitianField& G,
                             const MeasureField& omega, const Grid& g, double s, double p,
                             double eps, const SolveOptions& solve_opts = {});

struct ProofSetReport {
    double mass_E0 = 0.0; // int_{E_k} g dOmega for k = 0, 2, 4
    double mass_E2 = 0.0;
    double mass_E4 = 0.0;
    double mass_G = 0.0;  // int_G g dOmega, G = {f < (1 - t^2) g}
    double l1_fg = 0.0;   // ||f - g||_{L1(Omega)}
    bool bound_ok = true; // t^2 mass_G <= l1_fg
};

// Masses of the proof's working sets E_k = {psi < phi - k a t} and
// G = {f < (1 - t^2) g}, plus the intermediate integral inequality.
ProofSetReport proof_set_diagnostics(const PotentialField& phi, const PotentialField& psi,
                                     const std::vector<double>& f,
                                     const std::vector<double>& gdens,
                                     const MeasureField& omega, const Grid& g, double t,
                                     double a);

} // namespace cmalab
