#include "cmalab/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cmalab {

NodeSet empty_set(const Grid& g) { return NodeSet(g.node_count(), 0); }

NodeSet full_set(const Grid& g) { return NodeSet(g.node_count(), 1); }

NodeSet set_union(const NodeSet& a, const NodeSet& b) {
    if (a.size() != b.size()) throw std::invalid_argument("set_union: size mismatch");
    NodeSet out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (a[i] || b[i]) ? 1 : 0;
    return out;
}

bool subset_of(const NodeSet& a, const NodeSet& b) {
    if (a.size() != b.size()) throw std::invalid_argument("subset_of: size mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] && !b[i]) return false;
    }
    return true;
}

std::size_t set_size(const NodeSet& K) {
    std::size_t n = 0;
    for (auto m : K) n += m ? 1 : 0;
    return n;
}

NodeSet metric_ball(const Grid& g, const std::array<double, 4>& center, double radius) {
    NodeSet K(g.node_count(), 0);
    const double h = g.spacing();
    const double r2 = radius * radius;
    for (int i = 0; i < g.N; ++i) {
        for (int j = 0; j < g.N; ++j) {
            for (int k = 0; k < g.N; ++k) {
                for (int l = 0; l < g.N; ++l) {
                    const double x[4] = {i * h, j * h, k * h, l * h};
                    double d2 = 0.0;
                    for (int a = 0; a < 4; ++a) {
                        double d = std::fabs(x[a] - center[a]);
                        d = std::fmin(d, 1.0 - d);
                        d2 += d * d;
                    }
                    if (d2 <= r2) K[g.index(i, j, k, l)] = 1;
                }
            }
        }
    }
    return K;
}

namespace {

// One projected sweep of the obstacle iteration; returns the sup change.
double envelope_sweep(std::vector<double>& v, const std::vector<double>& obstacle,
                      const HermitianField& G, const Grid& g, double relaxation) {
    const int N = g.N;
    const double h = g.spacing();
    const double h2 = h * h;
    const double inv4h2 = 0.25 / h2;
    double max_change = 0.0;
    for (int i = 0; i < N; ++i) {
        const int ip = (i + 1) % N, im = (i + N - 1) % N;
        for (int j = 0; j < N; ++j) {
            const int jp = (j + 1) % N, jm = (j + N - 1) % N;
            for (int k = 0; k < N; ++k) {
                const int kp = (k + 1) % N, km = (k + N - 1) % N;
                for (int l = 0; l < N; ++l) {
                    const int lp = (l + 1) % N, lm = (l + N - 1) % N;
                    const std::size_t p = g.index(i, j, k, l);
                    const double nb1 = v[g.index(ip, j, k, l)] + v[g.index(im, j, k, l)] +
                                       v[g.index(i, jp, k, l)] + v[g.index(i, jm, k, l)];
                    const double nb2 = v[g.index(i, j, kp, l)] + v[g.index(i, j, km, l)] +
                                       v[g.index(i, j, k, lp)] + v[g.index(i, j, k, lm)];
                    const double x1x2 = v[g.index(ip, j, kp, l)] - v[g.index(ip, j, km, l)] -
                                        v[g.index(im, j, kp, l)] + v[g.index(im, j, km, l)];
                    const double y1y2 = v[g.index(i, jp, k, lp)] - v[g.index(i, jp, k, lm)] -
                                        v[g.index(i, jm, k, lp)] + v[g.index(i, jm, k, lm)];
                    const double x1y2 = v[g.index(ip, j, k, lp)] - v[g.index(ip, j, k, lm)] -
                                        v[g.index(im, j, k, lp)] + v[g.index(im, j, k, lm)];
                    const double y1x2 = v[g.index(i, jp, kp, l)] - v[g.index(i, jp, km, l)] -
                                        v[g.index(i, jm, kp, l)] + v[g.index(i, jm, km, l)];
                    const Herm2& Gm = G.m[p];
                    const double m11 = Gm.a11 + inv4h2 * nb1;
                    const double m22 = Gm.a22 + inv4h2 * nb2;
                    const double re12 = Gm.re12 + 0.25 * inv4h2 * (x1x2 + y1y2);
                    const double im12 = Gm.im12 + 0.25 * inv4h2 * (x1y2 - y1x2);
                    const double half = 0.5 * (m11 - m22);
                    const double lmin =
                        0.5 * (m11 + m22) - std::sqrt(half * half + re12 * re12 + im12 * im12);
                    const double cand = v[p] + relaxation * (h2 * lmin - v[p]);
                    const double unew = std::fmin(obstacle[p], cand);
                    max_change = std::fmax(max_change, std::fabs(unew - v[p]));
                    v[p] = unew;
                }
            }
        }
    }
    return max_change;
}

} // namespace

EnvelopeResult relative_extremal(const NodeSet& K, const HermitianField& G, const Grid& g,
                                 const EnvelopeOptions& opts) {
    if (K.size() != g.node_count() || G.m.size() != g.node_count()) {
        throw std::invalid_argument("relative_extremal: sizes do not match grid");
    }
    std::vector<double> obstacle(g.node_count());
    for (std::size_t p = 0; p < K.size(); ++p) obstacle[p] = K[p] ? -1.0 : 0.0;

    EnvelopeResult out;
    if (opts.initial != nullptr) {
        out.u = *opts.initial;
        if (out.u.v.size() != g.node_count()) {
            throw std::invalid_argument("relative_extremal: bad warm start size");
        }
        for (std::size_t p = 0; p < obstacle.size(); ++p) {
            out.u.v[p] = std::fmin(out.u.v[p], obstacle[p]);
        }
    } else {
        out.u = zero_field(g);
        for (std::size_t p = 0; p < obstacle.size(); ++p) out.u.v[p] = obstacle[p];
    }
    out.u.sup_normalized = false;

    while (out.sweeps < opts.max_sweeps) {
        const double change = envelope_sweep(out.u.v, obstacle, G, g, opts.relaxation);
        ++out.sweeps;
        if (change <= opts.tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

double capacity(const NodeSet& K, const HermitianField& G, const Grid& g,
                const EnvelopeOptions& opts) {
    if (set_size(K) == 0) return 0.0;
    EnvelopeResult env = relative_extremal(K, G, g, opts);
    MAResult ma = ma_measure(env.u, G, g);
    double sum = 0.0;
    for (std::size_t p = 0; p < K.size(); ++p) {
        if (K[p]) sum += ma.density.w[p];
    }
    return sum * g.cell_volume();
}

ComparisonReport comparison_check(const PotentialField& phi, const PotentialField& psi,
                                  const HermitianField& G, const Grid& g) {
    if (phi.v.size() != g.node_count() || psi.v.size() != g.node_count()) {
        throw std::invalid_argument("comparison_check: sizes do not match grid");
    }
    const MAResult ma_phi = ma_measure(phi, G, g);
    const MAResult ma_psi = ma_measure(psi, G, g);
    ComparisonReport rep;
    for (std::size_t p = 0; p < phi.v.size(); ++p) {
        if (phi.v[p] < psi.v[p]) {
            rep.mass_phi += ma_phi.density.w[p];
            rep.mass_psi += ma_psi.density.w[p];
            ++rep.set_size;
        }
    }
    rep.mass_phi *= g.cell_volume();
    rep.mass_psi *= g.cell_volume();
    rep.violation = std::fmax(0.0, rep.mass_psi - rep.mass_phi);
    return rep;
}

SublevelReport sublevel_capacity_check(const PotentialField& phi, const PotentialField& psi,
                                       double s, const HermitianField& G, const Grid& g,
                                       const EnvelopeOptions& opts) {
    if (phi.v.size() != g.node_count() || psi.v.size() != g.node_count()) {
        throw std::invalid_argument("sublevel_capacity_check: sizes do not match grid");
    }
    // shift phi so 0 <= phi <= C
    const double mn = *std::min_element(phi.v.begin(), phi.v.end());
    std::vector<double> ph(phi.v);
    for (double& x : ph) x -= mn;
    const double C = *std::max_element(ph.begin(), ph.end());
    if (!(s > 0.0) || !(s < C + 1.0)) {
        throw std::invalid_argument("sublevel_capacity_check: need 0 < s < C + 1");
    }

    SublevelReport rep;
    rep.C = C;
    rep.s = s;

    NodeSet K2(g.node_count(), 0);
    const MAResult ma_psi = ma_measure(psi, G, g);
    double mass_s = 0.0;
    for (std::size_t p = 0; p < ph.size(); ++p) {
        if (psi.v[p] + 2.0 * s < ph[p]) {
            K2[p] = 1;
            ++rep.set_2s;
        }
        if (psi.v[p] + s < ph[p]) {
            mass_s += ma_psi.density.w[p];
            ++rep.set_s;
        }
    }
    mass_s *= g.cell_volume();

    rep.lhs_capacity = capacity(K2, G, g, opts);
    const double pref = std::pow((C + 1.0) / s, static_cast<double>(Grid::complex_dim));
    rep.rhs = pref * mass_s;
    rep.violation = std::fmax(0.0, rep.lhs_capacity - rep.rhs);
    return rep;
}

MixedReport mixed_ma_check(const PotentialField& phi, const PotentialField& psi,
                           const std::vector<double>& f, const std::vector<double>& gdens,
                           const MeasureField& omega, const HermitianField& G, const Grid& g) {
    const std::size_t count = g.node_count();
    if (phi.v.size() != count || psi.v.size() != count || f.size() != count ||
        gdens.size() != count || omega.w.size() != count) {
        throw std::invalid_argument("mixed_ma_check: sizes do not match grid");
    }
    const HermitianField H_psi = complex_hessian(psi, g);
    const HermitianField H_phi = complex_hessian(phi, g);

    MixedReport rep;
    for (std::size_t p = 0; p < count; ++p) {
        const Herm2 A = (G.m[p] + H_psi.m[p]).clamped_psd();
        const Herm2 B = (G.m[p] + H_phi.m[p]).clamped_psd();
        const double fw = f[p] * omega.w[p];
        const double gw = gdens[p] * omega.w[p];
        rep.precheck_slack = std::fmax(rep.precheck_slack, fw - A.det());
        rep.precheck_slack = std::fmax(rep.precheck_slack, gw - B.det());
        const double lhs = mixed_det(A, B);
        const double rhs = std::sqrt(fw * gw);
        const double viol = rhs - lhs;
        if (viol > rep.max_violation) {
            rep.max_violation = viol;
            rep.worst_lhs = lhs;
            rep.worst_rhs = rhs;
        }
    }
    rep.max_violation = std::fmax(0.0, rep.max_violation);
    return rep;
}

DominationReport domination_check(const MeasureField& omega, const std::vector<double>& f,
                                  const HermitianField& G, const Grid& g,
                                  const std::vector<NodeSet>& family,
                                  const std::vector<double>& radii,
                                  const EnvelopeOptions& opts) {
    if (family.size() != radii.size() || family.size() < 2) {
        throw std::invalid_argument("domination_check: need matching family and radii");
    }
    DominationReport rep;
    const double vol = g.cell_volume();
    for (std::size_t q = 0; q < family.size(); ++q) {
        DominationRow row;
        row.radius = radii[q];
        row.cap = capacity(family[q], G, g, opts);
        for (std::size_t p = 0; p < family[q].size(); ++p) {
            if (family[q][p]) {
                row.omega_mass += omega.w[p];
                row.f_mass += f[p] * omega.w[p];
            }
        }
        row.omega_mass *= vol;
        row.f_mass *= vol;
        rep.rows.push_back(row);
    }

    std::vector<double> caps, om, fm;
    for (const auto& r : rep.rows) {
        if (r.cap > 0.0 && r.omega_mass > 0.0 && r.f_mass > 0.0) {
            caps.push_back(r.cap);
            om.push_back(r.omega_mass);
            fm.push_back(r.f_mass);
        }
    }
    if (caps.size() < 2) {
        rep.degenerate = true;
        return rep;
    }
    // a decade of capacities is the stated precondition; ball capacities
    // decay only logarithmically in the radius, so desk-scale grids usually
    // fall short of it -- the fit is still computed and the shortfall flagged
    const double span = *std::max_element(caps.begin(), caps.end()) /
                        *std::min_element(caps.begin(), caps.end());
    rep.degenerate = span < 10.0;

    rep.omega_fit = fit_loglog(caps, om);
    rep.f_fit = fit_loglog(caps, fm);
    rep.alpha_hat = rep.omega_fit.slope - 1.0;
    rep.chi_hat = rep.f_fit.slope - 1.0;
    return rep;
}

} // namespace cmalab
