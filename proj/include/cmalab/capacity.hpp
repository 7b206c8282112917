#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cmalab/fitting.hpp"
#include "cmalab/grid.hpp"
#include "cmalab/solver.hpp"

namespace cmalab {

// Node membership mask, one byte per node.
using NodeSet = std::vector<std::uint8_t>;

NodeSet empty_set(const Grid& g);
NodeSet full_set(const Grid& g);
NodeSet set_union(const NodeSet& a, const NodeSet& b);
bool subset_of(const NodeSet& a, const NodeSet& b);
std::size_t set_size(const NodeSet& K);

// Nodes within torus distance radius of center (fractional coordinates).
NodeSet metric_ball(const Grid& g, const std::array<double, 4>& center, double radius);

struct EnvelopeOptions {
    double tol = 1e-10;      // per-sweep sup change
    int max_sweeps = 50000;
    double relaxation = 1.0; // projected over-relaxation factor
    const PotentialField* initial = nullptr; // warm start
};

struct EnvelopeResult {
    PotentialField u;
    int sweeps = 0;
    bool converged = false;
};

// Relative extremal envelope of K: the largest field with u <= 0, u <= -1 on
// K and lambda_min(G + Hu) >= 0, computed by sweeps of
//   u(x) <- min(obstacle(x), h^2 lambda_min(M(x))).
EnvelopeResult relative_extremal(const NodeSet& K, const HermitianField& G, const Grid& g,
                                 const EnvelopeOptions& opts = {});

// cap_omega(K): Monge-Ampere mass of the extremal envelope on K.
double capacity(const NodeSet& K, const HermitianField& G, const Grid& g,
                const EnvelopeOptions& opts = {});

struct ComparisonReport {
    double mass_psi = 0.0; // integral of det(G+H psi) over {phi < psi}
    double mass_phi = 0.0;
    double violation = 0.0; // max(0, mass_psi - mass_phi)
    std::size_t set_size = 0;
};

// Discrete comparison principle check on {phi < psi}.
ComparisonReport comparison_check(const PotentialField& phi, const PotentialField& psi,
                                  const HermitianField& G, const Grid& g);

struct SublevelReport {
    double lhs_capacity = 0.0; // Cap({psi + 2s < phi})
    double rhs = 0.0;          // ((C+1)/s)^n * mass of omega_psi^n on {psi + s < phi}
    double violation = 0.0;
    double C = 0.0;            // max of the shifted phi
    double s = 0.0;
    std::size_t set_2s = 0;
    std::size_t set_s = 0;
};

// Sublevel-capacity inequality check. phi is shifted internally so that
// min phi = 0; requires 0 < s < C + 1 after the shift.
SublevelReport sublevel_capacity_check(const PotentialField& phi, const PotentialField& psi,
                                       double s, const HermitianField& G, const Grid& g,
                                       const EnvelopeOptions& opts = {});

struct MixedReport {
    double max_violation = 0.0; // max over nodes of sqrt(f g) w - D(A, B)
    double worst_lhs = 0.0;     // D(A, B) at the worst node
    double worst_rhs = 0.0;     // sqrt(f g) w at the worst node
    double precheck_slack = 0.0; // max pointwise deficit of det A >= f w, det B >= g w
};

// Pointwise mixed Monge-Ampere inequality at n = 2, k = 1:
// D(A, B) >= sqrt(f g) * omega_weight with A = clamp(G + H psi),
// B = clamp(G + H phi).
MixedReport mixed_ma_check(const PotentialField& phi, const PotentialField& psi,
                           const std::vector<double>& f, const std::vector<double>& gdens,
                           const MeasureField& omega, const HermitianField& G, const Grid& g);

struct DominationRow {
    double radius = 0.0;
    double cap = 0.0;
    double omega_mass = 0.0;
    double f_mass = 0.0;
};

struct DominationReport {
    std::vector<DominationRow> rows;
    FitResult omega_fit; // log Omega(K) vs log cap(K)
    FitResult f_fit;     // log int_K f dOmega vs log cap(K)
    double alpha_hat = 0.0; // omega_fit.slope - 1
    double chi_hat = 0.0;   // f_fit.slope - 1
    bool degenerate = false; // capacity range too narrow for a fit
};

// Fits the capacity-domination exponents on a family of node sets.
DominationReport domination_check(const MeasureField& omega, const std::vector<double>& f,
                                  const HermitianField& G, const Grid& g,
                                  const std::vector<NodeSet>& family,
                                  const std::vector<double>& radii,
                                  const EnvelopeOptions& opts = {});

} // namespace cmalab
