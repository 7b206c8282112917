#include "cmalab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmalab {

Grid::Grid(int nodes_per_axis) : N(nodes_per_axis) {
    if (N < 8 || N % 2 != 0) {
        throw std::invalid_argument("Grid: N must be even and >= 8");
    }
}

PotentialField zero_field(const Grid& g) {
    PotentialField u;
    u.v.assign(g.node_count(), 0.0);
    u.sup_normalized = true;
    return u;
}

MeasureField uniform_measure(const Grid& g) {
    MeasureField m;
    m.w.assign(g.node_count(), 1.0);
    return m;
}

HermitianField complex_hessian(const PotentialField& u, const Grid& g) {
    if (u.v.size() != g.node_count()) {
        throw std::invalid_argument("complex_hessian: field size does not match grid");
    }
    const int N = g.N;
    const double h = g.spacing();
    const double inv_h2 = 1.0 / (h * h);

    HermitianField H;
    H.family = "hessian";
    H.m.resize(g.node_count());

    const auto& v = u.v;
    for (int i = 0; i < N; ++i) {
        const int ip = (i + 1) % N, im = (i + N - 1) % N;
        for (int j = 0; j < N; ++j) {
            const int jp = (j + 1) % N, jm = (j + N - 1) % N;
            for (int k = 0; k < N; ++k) {
                const int kp = (k + 1) % N, km = (k + N - 1) % N;
                for (int l = 0; l < N; ++l) {
                    const int lp = (l + 1) % N, lm = (l + N - 1) % N;
                    const double c = v[g.index(i, j, k, l)];

                    const double dx1 = v[g.index(ip, j, k, l)] - 2.0 * c + v[g.index(im, j, k, l)];
                    const double dy1 = v[g.index(i, jp, k, l)] - 2.0 * c + v[g.index(i, jm, k, l)];
                    const double dx2 = v[g.index(i, j, kp, l)] - 2.0 * c + v[g.index(i, j, km, l)];
                    const double dy2 = v[g.index(i, j, k, lp)] - 2.0 * c + v[g.index(i, j, k, lm)];

                    // mixed central stencils (no center dependence)
                    const double x1x2 = v[g.index(ip, j, kp, l)] - v[g.index(ip, j, km, l)] -
                                        v[g.index(im, j, kp, l)] + v[g.index(im, j, km, l)];
                    const double y1y2 = v[g.index(i, jp, k, lp)] - v[g.index(i, jp, k, lm)] -
                                        v[g.index(i, jm, k, lp)] + v[g.index(i, jm, k, lm)];
                    const double x1y2 = v[g.index(ip, j, k, lp)] - v[g.index(ip, j, k, lm)] -
                                        v[g.index(im, j, k, lp)] + v[g.index(im, j, k, lm)];
                    const double y1x2 = v[g.index(i, jp, kp, l)] - v[g.index(i, jp, km, l)] -
                                        v[g.index(i, jm, kp, l)] + v[g.index(i, jm, km, l)];

                    Herm2& out = H.m[g.index(i, j, k, l)];
                    out.a11 = 0.25 * (dx1 + dy1) * inv_h2;
                    out.a22 = 0.25 * (dx2 + dy2) * inv_h2;
                    out.re12 = 0.25 * (x1x2 + y1y2) * 0.25 * inv_h2;
                    out.im12 = 0.25 * (x1y2 - y1x2) * 0.25 * inv_h2;
                }
            }
        }
    }
    return H;
}

HermitianField flat_background(const Grid& g) {
    HermitianField G;
    G.family = "flat";
    G.m.assign(g.node_count(), Herm2{1.0, 1.0, 0.0, 0.0});
    return G;
}

HermitianField cosine_degenerate_background(const Grid& g, double c) {
    if (c < 0.0 || c > 1.0) {
        throw std::invalid_argument(
            "cosine_degenerate_background: c must lie in [0, 1] to stay semipositive");
    }
    HermitianField G;
    G.family = "cosine-degenerate";
    G.param = c;
    G.m.resize(g.node_count());
    const double h = g.spacing();
    const double two_pi = 2.0 * 3.14159265358979323846;
    for (int i = 0; i < g.N; ++i) {
        const double cx = std::cos(two_pi * i * h);
        for (int j = 0; j < g.N; ++j) {
            const double cy = std::cos(two_pi * j * h);
            const double a11 = 1.0 - 0.5 * c * (cx + cy);
            for (int k = 0; k < g.N; ++k) {
                for (int l = 0; l < g.N; ++l) {
                    G.m[g.index(i, j, k, l)] = Herm2{a11, 1.0, 0.0, 0.0};
                }
            }
        }
    }
    return G;
}

double total_mass(const HermitianField& G, const Grid& g) {
    if (G.m.size() != g.node_count()) {
        throw std::invalid_argument("total_mass: field size does not match grid");
    }
    double sum = 0.0;
    for (const Herm2& m : G.m) sum += m.det();
    return sum * g.cell_volume();
}

void sup_normalize(PotentialField& u) {
    if (u.v.empty()) return;
    const double mx = *std::max_element(u.v.begin(), u.v.end());
    for (double& x : u.v) x -= mx;
    u.sup_normalized = true;
}

} // namespace cmalab
