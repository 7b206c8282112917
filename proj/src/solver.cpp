#include "cmalab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cmalab {

namespace {

// Per-axis flat-index offsets with periodic wrap, rebuilt per coordinate.
struct Strides {
    std::ptrdiff_t s0, s1, s2, s3;
    int N;
    explicit Strides(const Grid& g) : N(g.N) {
        s3 = 1;
        s2 = N;
        s1 = static_cast<std::ptrdiff_t>(N) * N;
        s0 = s1 * N;
    }
    std::ptrdiff_t fwd(int i, std::ptrdiff_t s) const { return (i + 1 == N) ? s * (1 - N) : s; }
    std::ptrdiff_t bwd(int i, std::ptrdiff_t s) const { return (i == 0) ? s * (N - 1) : -s; }
};

struct NodeMatrix {
    double m11, m22, re12, im12;
    double lambda_min() const {
        const double half = 0.5 * (m11 - m22);
        return 0.5 * (m11 + m22) - std::sqrt(half * half + re12 * re12 + im12 * im12);
    }
};

// G + Hu with the u(x) contribution removed from the diagonal.
inline NodeMatrix center_free_matrix(const double* v, std::size_t p, const Herm2& G,
                                     double inv4h2, std::ptrdiff_t oip, std::ptrdiff_t oim,
                                     std::ptrdiff_t ojp, std::ptrdiff_t ojm,
                                     std::ptrdiff_t okp, std::ptrdiff_t okm,
                                     std::ptrdiff_t olp, std::ptrdiff_t olm) {
    const double nb1 = v[p + oip] + v[p + oim] + v[p + ojp] + v[p + ojm];
    const double nb2 = v[p + okp] + v[p + okm] + v[p + olp] + v[p + olm];
    const double x1x2 =
        v[p + oip + okp] - v[p + oip + okm] - v[p + oim + okp] + v[p + oim + okm];
    const double y1y2 =
        v[p + ojp + olp] - v[p + ojp + olm] - v[p + ojm + olp] + v[p + ojm + olm];
    const double x1y2 =
        v[p + oip + olp] - v[p + oip + olm] - v[p + oim + olp] + v[p + oim + olm];
    const double y1x2 =
        v[p + ojp + okp] - v[p + ojp + okm] - v[p + ojm + okp] + v[p + ojm + okm];
    NodeMatrix M;
    M.m11 = G.a11 + inv4h2 * nb1;
    M.m22 = G.a22 + inv4h2 * nb2;
    M.re12 = G.re12 + 0.25 * inv4h2 * (x1x2 + y1y2);
    M.im12 = G.im12 + 0.25 * inv4h2 * (x1y2 - y1x2);
    return M;
}

template <class Visit>
void for_each_node_offset(const Grid& g, const std::array<int, 4>& offset, Visit&& visit) {
    const Strides st(g);
    for (int a = 0; a < g.N; ++a) {
        const int i = (a + offset[0]) % g.N;
        const std::ptrdiff_t oip = st.fwd(i, st.s0), oim = st.bwd(i, st.s0);
        for (int b = 0; b < g.N; ++b) {
            const int j = (b + offset[1]) % g.N;
            const std::ptrdiff_t ojp = st.fwd(j, st.s1), ojm = st.bwd(j, st.s1);
            for (int c = 0; c < g.N; ++c) {
                const int k = (c + offset[2]) % g.N;
                const std::ptrdiff_t okp = st.fwd(k, st.s2), okm = st.bwd(k, st.s2);
                for (int d = 0; d < g.N; ++d) {
                    const int l = (d + offset[3]) % g.N;
                    const std::ptrdiff_t olp = st.fwd(l, st.s3), olm = st.bwd(l, st.s3);
                    const std::size_t p = g.index(i, j, k, l);
                    visit(p, oip, oim, ojp, ojm, okp, okm, olp, olm);
                }
            }
        }
    }
}

} // namespace

MAResult ma_measure(const PotentialField& u, const HermitianField& G, const Grid& g) {
    if (u.v.size() != g.node_count() || G.m.size() != g.node_count()) {
        throw std::invalid_argument("ma_measure: field sizes do not match grid");
    }
    const double h = g.spacing();
    const double inv4h2 = 0.25 / (h * h);
    const double inv_h2 = 1.0 / (h * h);

    MAResult out;
    out.density.w.resize(g.node_count());

    double most_negative = 0.0;
    const double* v = u.v.data();
    for_each_node_offset(g, {0, 0, 0, 0},
                         [&](std::size_t p, std::ptrdiff_t oip, std::ptrdiff_t oim,
                             std::ptrdiff_t ojp, std::ptrdiff_t ojm, std::ptrdiff_t okp,
                             std::ptrdiff_t okm, std::ptrdiff_t olp, std::ptrdiff_t olm) {
                             NodeMatrix M = center_free_matrix(v, p, G.m[p], inv4h2, oip, oim,
                                                               ojp, ojm, okp, okm, olp, olm);
                             const double shift = v[p] * inv_h2;
                             const double a = M.m11 - shift;
                             const double d = M.m22 - shift;
                             const double half = 0.5 * (a - d);
                             const double q = M.re12 * M.re12 + M.im12 * M.im12;
                             const double root = std::sqrt(half * half + q);
                             const double lo = 0.5 * (a + d) - root;
                             const double hi = 0.5 * (a + d) + root;
                             most_negative = std::fmin(most_negative, lo);
                             out.density.w[p] = std::fmax(lo, 0.0) * std::fmax(hi, 0.0);
                         });
    out.clamp_magnitude = -most_negative;
    double mass = 0.0;
    for (double w : out.density.w) mass += w;
    out.mass = mass * g.cell_volume();
    return out;
}

double min_eigenvalue(const PotentialField& u, const HermitianField& G, const Grid& g) {
    const double h = g.spacing();
    const double inv4h2 = 0.25 / (h * h);
    const double inv_h2 = 1.0 / (h * h);
    double worst = std::numeric_limits<double>::infinity();
    const double* v = u.v.data();
    for_each_node_offset(g, {0, 0, 0, 0},
                         [&](std::size_t p, std::ptrdiff_t oip, std::ptrdiff_t oim,
                             std::ptrdiff_t ojp, std::ptrdiff_t ojm, std::ptrdiff_t okp,
                             std::ptrdiff_t okm, std::ptrdiff_t olp, std::ptrdiff_t olm) {
                             NodeMatrix M = center_free_matrix(v, p, G.m[p], inv4h2, oip, oim,
                                                               ojp, ojm, okp, okm, olp, olm);
                             M.m11 -= v[p] * inv_h2;
                             M.m22 -= v[p] * inv_h2;
                             worst = std::min(worst, M.lambda_min());
                         });
    return worst;
}

SolveResult solve(const std::vector<double>& f, const HermitianField& G,
                  const MeasureField& omega, const Grid& g, const SolveOptions& opts) {
    const std::size_t count = g.node_count();
    if (f.size() != count || G.m.size() != count || omega.w.size() != count) {
        throw std::invalid_argument("solve: field sizes do not match grid");
    }
    for (std::size_t p = 0; p < count; ++p) {
        if (f[p] < 0.0 || omega.w[p] < 0.0) {
            throw std::invalid_argument("solve: target density must be nonnegative");
        }
    }

    const double h = g.spacing();
    const double h2 = h * h;
    const double inv4h2 = 0.25 / (h * h);
    const double inv_h2 = 1.0 / (h * h);
    const double omega_relax = opts.relaxation;

    std::vector<double> target(count);
    for (std::size_t p = 0; p < count; ++p) target[p] = f[p] * omega.w[p];

    SolveResult out;
    out.u = (opts.initial != nullptr) ? *opts.initial : zero_field(g);
    if (out.u.v.size() != count) throw std::invalid_argument("solve: bad warm start size");
    out.u.sup_normalized = false;

    double c_lo = opts.c_lo, c_hi = opts.c_hi;
    double c = std::clamp(opts.c_init, c_lo, c_hi);

    double* v = out.u.v.data();
    const double inv_count = 1.0 / static_cast<double>(count);

    const auto sweep = [&](double factor) {
        double sum = 0.0;
        for_each_node_offset(
            g, opts.sweep_offset,
            [&](std::size_t p, std::ptrdiff_t oip, std::ptrdiff_t oim, std::ptrdiff_t ojp,
                std::ptrdiff_t ojm, std::ptrdiff_t okp, std::ptrdiff_t okm, std::ptrdiff_t olp,
                std::ptrdiff_t olm) {
                const NodeMatrix M = center_free_matrix(v, p, G.m[p], inv4h2, oip, oim, ojp,
                                                        ojm, okp, okm, olp, olm);
                const double half = 0.5 * (M.m11 - M.m22);
                const double q = M.re12 * M.re12 + M.im12 * M.im12;
                const double s =
                    0.5 * (M.m11 + M.m22) - std::sqrt(half * half + q + factor * target[p]);
                const double cand = h2 * s;
                const double unew = v[p] + omega_relax * (cand - v[p]);
                v[p] = unew;
                sum += unew;
            });
        return sum * inv_count;
    };

    const auto residual_sup = [&](double factor) {
        double worst = 0.0;
        for_each_node_offset(
            g, opts.sweep_offset,
            [&](std::size_t p, std::ptrdiff_t oip, std::ptrdiff_t oim, std::ptrdiff_t ojp,
                std::ptrdiff_t ojm, std::ptrdiff_t okp, std::ptrdiff_t okm, std::ptrdiff_t olp,
                std::ptrdiff_t olm) {
                const NodeMatrix M = center_free_matrix(v, p, G.m[p], inv4h2, oip, oim, ojp,
                                                        ojm, okp, okm, olp, olm);
                const double shift = v[p] * inv_h2;
                const double a = M.m11 - shift;
                const double d = M.m22 - shift;
                const double q = M.re12 * M.re12 + M.im12 * M.im12;
                const double det = a * d - q;
                worst = std::fmax(worst, std::fabs(det - factor * target[p]));
            });
        return worst;
    };

    const int window = std::max(2, opts.drift_window);
    const double drift_tol = 0.05 * opts.tol * h2;
    const int stall_limit = std::max(2000, 4 * g.N * g.N);

    SolveDiagnostics& diag = out.diag;
    diag.solvability_constant = c;

    double prev_mean = 0.0;
    {
        double s = 0.0;
        for (std::size_t p = 0; p < count; ++p) s += v[p];
        prev_mean = s * inv_count;
    }
    std::vector<double> window_snapshot = out.u.v;

    int sweeps = 0;
    int window_start = 0;
    int last_decision = 0;
    while (sweeps < opts.max_sweeps) {
        const double mean_now = sweep(c);
        ++sweeps;
        if (sweeps != 1 && sweeps - window_start < window) continue;

        const int span = sweeps - window_start;
        const double drift = (mean_now - prev_mean) / span;
        // uniform per-sweep change signals a solvability imbalance; leftover
        // structure means shape modes are still relaxing and the drift sign
        // is not yet trustworthy
        double structure = 0.0;
        for (std::size_t p = 0; p < count; ++p) {
            structure = std::fmax(
                structure, std::fabs((v[p] - window_snapshot[p]) / span - drift));
        }
        window_snapshot = out.u.v;
        prev_mean = mean_now;
        window_start = sweeps;

        if (std::fabs(drift) > drift_tol) {
            const bool uniform = structure < 0.3 * std::fabs(drift);
            const bool stalled = sweeps - last_decision > stall_limit;
            if (!uniform && !stalled) continue;
            last_decision = sweeps;
            if (c_hi - c_lo < 1e-14 * c) {
                // bracket exhausted but drift persists: an earlier decision
                // went wrong; start the bracket over
                c_lo = opts.c_lo;
                c_hi = opts.c_hi;
                ++diag.bracket_resets;
            }
            if (drift > 0.0) {
                c_lo = c;
            } else {
                c_hi = c;
            }
            c = 0.5 * (c_lo + c_hi);
            continue;
        }

        const double res = residual_sup(c);
        if (res < opts.tol) {
            diag.converged = true;
            diag.residual = res;
            break;
        }
    }

    diag.sweeps = sweeps;
    diag.solvability_constant = c;
    if (!diag.converged) diag.residual = residual_sup(c);

    sup_normalize(out.u);
    double inf_norm = 0.0;
    for (double x : out.u.v) inf_norm = std::fmax(inf_norm, std::fabs(x));
    diag.sup_norm = inf_norm;
    diag.psd_violation = std::min(0.0, min_eigenvalue(out.u, G, g));
    return out;
}

ProjectionResult psh_project(const PotentialField& u, const HermitianField& G, const Grid& g,
                             double tol_psd, int max_sweeps) {
    if (u.v.size() != g.node_count() || G.m.size() != g.node_count()) {
        throw std::invalid_argument("psh_project: field sizes do not match grid");
    }
    ProjectionResult out;
    out.u = u;
    out.u.sup_normalized = false;
    const double h = g.spacing();
    const double h2 = h * h;
    const double inv4h2 = 0.25 / (h * h);
    double* v = out.u.v.data();

    int sweeps = 0;
    while (sweeps < max_sweeps) {
        double max_drop = 0.0;
        for_each_node_offset(
            g, {0, 0, 0, 0},
            [&](std::size_t p, std::ptrdiff_t oip, std::ptrdiff_t oim, std::ptrdiff_t ojp,
                std::ptrdiff_t ojm, std::ptrdiff_t okp, std::ptrdiff_t okm, std::ptrdiff_t olp,
                std::ptrdiff_t olm) {
                const NodeMatrix M = center_free_matrix(v, p, G.m[p], inv4h2, oip, oim, ojp,
                                                        ojm, okp, okm, olp, olm);
                const double cap = h2 * M.lambda_min();
                if (cap < v[p]) {
                    max_drop = std::fmax(max_drop, v[p] - cap);
                    v[p] = cap;
                }
            });
        ++sweeps;
        if (max_drop <= 0.25 * tol_psd * h2) {
            const double lmin = min_eigenvalue(out.u, G, g);
            if (lmin >= -tol_psd) {
                out.converged = true;
                out.min_eigenvalue = lmin;
                break;
            }
        }
    }
    out.sweeps = sweeps;
    if (!out.converged) out.min_eigenvalue = min_eigenvalue(out.u, G, g);
    return out;
}

double sor_relaxation(const Grid& g) {
    constexpr double pi = 3.14159265358979323846;
    return 2.0 / (1.0 + std::sin(pi * g.spacing()));
}

PotentialField prolong(const PotentialField& coarse, const Grid& gc, const Grid& gf) {
    if (coarse.v.size() != gc.node_count()) {
        throw std::invalid_argument("prolong: coarse field size mismatch");
    }
    PotentialField fine;
    fine.v.assign(gf.node_count(), 0.0);
    const double ratio = static_cast<double>(gc.N) / gf.N;
    for (int i = 0; i < gf.N; ++i) {
        for (int j = 0; j < gf.N; ++j) {
            for (int k = 0; k < gf.N; ++k) {
                for (int l = 0; l < gf.N; ++l) {
                    const double x[4] = {i * ratio, j * ratio, k * ratio, l * ratio};
                    int base[4];
                    double frac[4];
                    for (int a = 0; a < 4; ++a) {
                        base[a] = static_cast<int>(std::floor(x[a])) % gc.N;
                        frac[a] = x[a] - std::floor(x[a]);
                    }
                    double acc = 0.0;
                    for (int corner = 0; corner < 16; ++corner) {
                        double wgt = 1.0;
                        int idx[4];
                        for (int a = 0; a < 4; ++a) {
                            const int bit = (corner >> a) & 1;
                            idx[a] = (base[a] + bit) % gc.N;
                            wgt *= bit ? frac[a] : (1.0 - frac[a]);
                        }
                        if (wgt != 0.0) {
                            acc += wgt * coarse.v[gc.index(idx[0], idx[1], idx[2], idx[3])];
                        }
                    }
                    fine.v[gf.index(i, j, k, l)] = acc;
                }
            }
        }
    }
    fine.sup_normalized = false;
    return fine;
}

} // namespace cmalab
