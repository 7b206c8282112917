#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cmalab/grid.hpp"

namespace cmalab {

struct MAResult {
    MeasureField density;     // det(G + Hu) with negative eigenvalues clamped
    double clamp_magnitude;   // largest negative eigenvalue encountered
    double mass;              // sum(density) * cell volume
};

// Monge-Ampere measure of u against the background G.
MAResult ma_measure(const PotentialField& u, const HermitianField& G, const Grid& g);

struct SolveOptions {
    double tol = 1e-8;          // sup-norm residual |det(G+Hu) - c r|
    int max_sweeps = 50000;
    double relaxation = 1.0;    // 1.0 = plain Gauss-Seidel local update
    int drift_window = 8;       // sweeps per solvability-drift measurement
    std::array<int, 4> sweep_offset{0, 0, 0, 0}; // traversal anchor
    const PotentialField* initial = nullptr;     // warm start (copied)
    double c_lo = 0.5;          // bisection bracket for the solvability factor
    double c_hi = 2.0;
    double c_init = 1.0;
};

struct SolveDiagnostics {
    bool converged = false;
    int sweeps = 0;
    double residual = 0.0;              // final sup-norm residual
    double solvability_constant = 1.0;  // multiplicative factor on the target
    double sup_norm = 0.0;              // ||u||_inf after sup-normalization
    double psd_violation = 0.0;         // most negative eigenvalue of G + Hu
    int bracket_resets = 0;
};

struct SolveResult {
    PotentialField u;
    SolveDiagnostics diag;
};

// Solves det(G + Hu) = c * f * Omega_weight pointwise on the periodic grid by
// Gauss-Seidel sweeps of the monotone local root
//   s = (l1+l2)/2 - sqrt(((l1-l2)/2)^2 + r),  u(x) = h^2 s,
// where l1, l2 are the eigenvalues of G + Hu with u(x) removed from the
// diagonal. The factor c is bisected in [c_lo, c_hi] so sweeps have no mean
// drift (discrete solvability). Output is sup-normalized.
SolveResult solve(const std::vector<double>& f, const HermitianField& G,
                  const MeasureField& omega, const Grid& g, const SolveOptions& opts = {});

struct ProjectionResult {
    PotentialField u;
    int sweeps = 0;
    bool converged = false;
    double min_eigenvalue = 0.0; // of G + Hu at exit
};

// Largest discrete omega-psh minorant of u: sweeps of
// u(x) <- min(u(x), h^2 lambda_min(M(x))) until lambda_min(G+Hu) >= -tol_psd.
ProjectionResult psh_project(const PotentialField& u, const HermitianField& G,
                             const Grid& g, double tol_psd = 1e-10,
                             int max_sweeps = 50000);

// Smallest eigenvalue of G + Hu over all nodes.
double min_eigenvalue(const PotentialField& u, const HermitianField& G, const Grid& g);

// Prolong a field from a grid with half the resolution (periodic multilinear
// interpolation); used for warm starts.
PotentialField prolong(const PotentialField& coarse, const Grid& gc, const Grid& gf);

// Over-relaxation factor tuned to the grid, 2/(1 + sin(pi h)). The plain
// Gauss-Seidel update (factor 1) is the reference scheme; accelerated runs
// must land on the same solution within the solver tolerance.
double sor_relaxation(const Grid& g);

} // namespace cmalab
