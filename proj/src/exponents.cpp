#include "cmalab/exponents.hpp"

#include <cmath>
#include <stdexcept>

#include "cmalab/quadrature.hpp"

namespace cmalab {

double GrowthFunction::operator()(double y) const {
    return scale * std::pow(y, power);
}

namespace {

void require_valid(const KappaParams& p) {
    if (!p.valid()) {
        throw std::invalid_argument(
            "kappa: need n >= 2, A > 0, Cn > 0 and an increasing positive Q");
    }
}

double monomial_prefactor(const KappaParams& p) {
    const double m = p.Q.power;
    return p.Cn * std::pow(p.A, 1.0 / p.n) * std::pow(p.Q.scale, -1.0 / p.n) *
           (p.n / m + 1.0);
}

} // namespace

double kappa(double r, const KappaParams& p) {
    require_valid(p);
    if (!(r > 0.0)) throw std::invalid_argument("kappa: r must be positive");
    const double m = p.Q.power;
    return monomial_prefactor(p) * std::pow(r, m / (static_cast<double>(p.n) * p.n));
}

double kappa_quadrature(double r, const KappaParams& p) {
    require_valid(p);
    if (!(r > 0.0)) throw std::invalid_argument("kappa: r must be positive");
    const double n = p.n;
    const double m = p.Q.power;
    const double L = std::pow(r, -1.0 / n);

    // Substituting y = L e^v turns the integrand y^{-1} Q(y)^{-1/n} into
    // Q(L e^v)^{-1/n}, a smooth decaying exponential for polynomial Q.
    // Integrate to V and close with the analytic power-law tail.
    const double V = (n / m) * std::log(1e8);
    const auto integrand = [&](double v) {
        return std::pow(p.Q(L * std::exp(v)), -1.0 / n);
    };
    const double head_scale = std::pow(p.Q(L), -1.0 / n) * (n / m);
    const QuadResult q = adaptive_simpson(integrand, 0.0, V, 1e-12 * head_scale);
    const double ymax = L * std::exp(V);
    const double tail = std::pow(p.Q.scale, -1.0 / n) * (n / m) * std::pow(ymax, -m / n);
    if (!q.converged) {
        throw std::runtime_error("kappa_quadrature: adaptive quadrature did not converge");
    }
    const double endpoint = std::pow(p.Q(L), -1.0 / n);
    return p.Cn * std::pow(p.A, 1.0 / n) * (q.value + tail + endpoint);
}

double kappa_inverse(double t, const KappaParams& p) {
    require_valid(p);
    if (!(t > 0.0)) throw std::invalid_argument("kappa_inverse: t must be positive");
    const double m = p.Q.power;
    return std::pow(t / monomial_prefactor(p), static_cast<double>(p.n) * p.n / m);
}

double kappa_inverse_bisect(double t, const KappaParams& p) {
    require_valid(p);
    if (!(t > 0.0)) throw std::invalid_argument("kappa_inverse: t must be positive");
    double lo = 1.0, hi = 1.0;
    int expand = 0;
    while (kappa(hi, p) < t) {
        hi *= 8.0;
        if (++expand > 200) {
            throw std::runtime_error("kappa_inverse: bracket expansion limit (t too large)");
        }
    }
    expand = 0;
    while (kappa(lo, p) > t) {
        lo /= 8.0;
        if (++expand > 200) {
            throw std::runtime_error("kappa_inverse: bracket expansion limit (t too small)");
        }
    }
    double r = std::sqrt(lo * hi);
    for (int it = 0; it < 200; ++it) {
        r = std::sqrt(lo * hi); // geometric midpoint handles wide brackets
        const double k = kappa(r, p);
        if (std::abs(k - t) <= 1e-10 * t) break;
        if (k < t) {
            lo = r;
        } else {
            hi = r;
        }
    }
    return r;
}

double gamma_modulus(double t, double C, const KappaParams& p) {
    if (!(C > 0.0)) throw std::invalid_argument("gamma: C must be positive");
    return C * kappa_inverse(t, p);
}

double beta_limit(int n, double eps) {
    if (n < 2) throw std::invalid_argument("beta_limit: n must be >= 2");
    if (eps < 0.0) throw std::invalid_argument("beta_limit: eps must be >= 0");
    const double nn = n;
    const double disc = (nn - 2.0) * (nn - 2.0) + 2.0 * (nn + 2.0) * eps + eps * eps;
    return 0.5 * ((nn + 2.0 - eps) + std::sqrt(disc));
}

namespace {

double beta_step(double beta_prev, double n, double eps, double delta) {
    const double lhs_factor = 1.0 + 2.0 * n / (beta_prev * (beta_prev + eps));
    const double rhs = n + 2.0 + 5.0 * delta - 2.0 * delta / (beta_prev + eps);
    return rhs / lhs_factor;
}

} // namespace

BetaRunReport beta_sequence(const RecurrenceState& state, int k_max) {
    if (state.n < 2) throw std::invalid_argument("beta_sequence: n must be >= 2");
    if (state.eps < 0.0) throw std::invalid_argument("beta_sequence: eps must be >= 0");
    if (k_max < 1) throw std::invalid_argument("beta_sequence: k_max must be >= 1");
    for (double d : state.deltas) {
        if (d < 0.0) throw std::invalid_argument("beta_sequence: deltas must be >= 0");
    }

    BetaRunReport rep;
    rep.limit = beta_limit(state.n, state.eps);
    rep.betas.reserve(static_cast<std::size_t>(k_max) + 1);
    rep.betas.push_back(state.n + 2.0);
    for (int k = 1; k <= k_max; ++k) {
        const double delta =
            (static_cast<std::size_t>(k - 1) < state.deltas.size()) ? state.deltas[k - 1]
                                                                    : 0.0;
        const double next = beta_step(rep.betas.back(), state.n, state.eps, delta);
        // equality happens at floating-point stationarity near the limit;
        // only a genuine increase marks the schedule inadmissible
        if (next > rep.betas.back() && rep.first_increase < 0) {
            rep.decreasing = false;
            rep.first_increase = k;
        }
        rep.betas.push_back(next);
    }
    rep.final_gap = std::abs(rep.betas.back() - rep.limit);
    return rep;
}

std::vector<double> default_delta_schedule(int n, double eps, int k_max) {
    if (n < 2 || eps < 0.0 || k_max < 1) {
        throw std::invalid_argument("default_delta_schedule: bad parameters");
    }
    const double beta0 = n + 2.0;
    double delta0 = 1.0;
    bool found = false;
    for (int j = 0; j <= 60; ++j) {
        const double beta1 = beta_step(beta0, n, eps, delta0 * 0.5);
        if (beta1 < beta0) {
            found = true;
            break;
        }
        delta0 *= 0.5;
    }
    if (!found) throw std::runtime_error("default_delta_schedule: no admissible delta0");
    std::vector<double> deltas(static_cast<std::size_t>(k_max));
    double d = delta0 * 0.5;
    for (int k = 0; k < k_max; ++k) {
        deltas[static_cast<std::size_t>(k)] = d;
        d *= 0.5;
    }
    return deltas;
}

namespace {

double chi_step(double beta_prev, double n, double epsp, double correction, double delta) {
    const double lhs_factor = 1.0 + 2.0 * n / (beta_prev * (beta_prev + epsp));
    const double rhs = n + 2.0 - correction + 5.0 * delta - 2.0 * delta / (beta_prev + epsp);
    return rhs / lhs_factor;
}

} // namespace

ChiRunReport chi_beta_sequence(const ChiParams& p, const std::vector<double>& deltas,
                               int k_max) {
    if (!p.valid()) throw std::invalid_argument("chi_beta_sequence: need n >= 2, chi > 0");
    if (k_max < 1) throw std::invalid_argument("chi_beta_sequence: k_max must be >= 1");
    const double n = p.n;
    const double epsp = n / p.chi;
    const double correction = epsp / (n + epsp);

    ChiRunReport rep;
    rep.claimed_denominator = n + epsp;
    rep.betas.reserve(static_cast<std::size_t>(k_max) + 1);
    rep.betas.push_back(n + 2.0);
    for (int k = 1; k <= k_max; ++k) {
        const double delta =
            (static_cast<std::size_t>(k - 1) < deltas.size()) ? deltas[k - 1] : 0.0;
        if (delta < 0.0) throw std::invalid_argument("chi_beta_sequence: deltas must be >= 0");
        const double next = chi_step(rep.betas.back(), n, epsp, correction, delta);
        if (next > rep.betas.back() && rep.first_increase < 0) {
            rep.decreasing = false;
            rep.first_increase = k;
        }
        rep.betas.push_back(next);
    }

    // Fixed point of the delta = 0 map, iterated to machine accuracy. The
    // recurrence as written need not have limit n; we report what it does.
    double b = rep.betas.back();
    for (int it = 0; it < 200000; ++it) {
        const double next = chi_step(b, n, epsp, correction, 0.0);
        if (std::abs(next - b) < 1e-15 * b) {
            b = next;
            break;
        }
        b = next;
    }
    rep.observed_limit = b;
    return rep;
}

} // namespace cmalab
