#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cmalab/herm2.hpp"

namespace cmalab {

// Periodic grid on the unit torus [0,1)^4, complex dimension 2. Real axes
// are ordered (x1, y1, x2, y2); node (i,j,k,l) sits at (i h, j h, k h, l h).
struct Grid {
    int N = 16;

    Grid() = default;
    explicit Grid(int nodes_per_axis);

    static constexpr int complex_dim = 2;
    double spacing() const { return 1.0 / N; }
    double cell_volume() const {
        const double h = spacing();
        return h * h * h * h;
    }
    std::size_t node_count() const {
        const std::size_t n = static_cast<std::size_t>(N);
        return n * n * n * n;
    }
    std::size_t index(int i, int j, int k, int l) const {
        const std::size_t n = static_cast<std::size_t>(N);
        return ((static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n +
                static_cast<std::size_t>(k)) *
                   n +
               static_cast<std::size_t>(l);
    }
    std::array<int, 4> coords(std::size_t idx) const {
        const int n = N;
        std::array<int, 4> c{};
        c[3] = static_cast<int>(idx % n);
        idx /= n;
        c[2] = static_cast<int>(idx % n);
        idx /= n;
        c[1] = static_cast<int>(idx % n);
        idx /= n;
        c[0] = static_cast<int>(idx);
        return c;
    }
    int wrap(int i) const {
        i %= N;
        return i < 0 ? i + N : i;
    }
};

// Scalar potential values per node. sup_normalized means max(v) == 0.
struct PotentialField {
    std::vector<double> v;
    bool sup_normalized = false;
};

// Per-node background form plus Hessian contributions.
struct HermitianField {
    std::vector<Herm2> m;
    std::string family;   // "flat", "cosine-degenerate", "hessian", ...
    double param = 0.0;
};

// Nonnegative weight per node: density of the measure against cell volume.
// alpha/chi are the domination exponents when known, negative otherwise.
struct MeasureField {
    std::vector<double> w;
    double alpha = -1.0;
    double chi = -1.0;
};

struct DensityPair {
    std::vector<double> f;
    std::vector<double> g;
    double p = 2.0;      // integrability exponent
    double mass_f = 0.0; // common mass after normalization
    double mass_g = 0.0;
    double clip_bias = 0.0; // mass clipped away during generation
};

PotentialField zero_field(const Grid& g);
MeasureField uniform_measure(const Grid& g);

// Discrete complex Hessian of a periodic field: second-order central
// stencils, Hermitian by construction and exact on real-quadratic data.
//   H11 = (u_x1x1 + u_y1y1)/4,  H22 = (u_x2x2 + u_y2y2)/4,
//   H12 = ((u_x1x2 + u_y1y2) + i (u_x1y2 - u_y1x2))/4.
HermitianField complex_hessian(const PotentialField& u, const Grid& g);

// Background families. The cosine-degenerate family is
//   G = I + Hess_C( (c / (2 pi^2)) (cos 2 pi x1 + cos 2 pi y1) ),
// i.e. G11 = 1 - (c/2)(cos 2 pi x1 + cos 2 pi y1): closed, semipositive for
// c <= 1, with the smallest eigenvalue vanishing at isolated points of the
// (x1, y1) factor exactly when c = 1. A model standing in for degenerate
// pullback forms; total mass stays 1.
HermitianField flat_background(const Grid& g);
HermitianField cosine_degenerate_background(const Grid& g, double c);

double total_mass(const HermitianField& G, const Grid& g);

// In-place shift so that max(v) == 0.
void sup_normalize(PotentialField& u);

} // namespace cmalab
