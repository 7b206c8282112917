#pragma once

#include <vector>

namespace cmalab {

// Growth function Q(y) = scale * y^power, increasing and positive on (0, inf).
// power > 0 is required so the defining integral of kappa converges at
// infinity.
struct GrowthFunction {
    double power = 1.0;
    double scale = 1.0;

    bool valid() const { return power > 0.0 && scale > 0.0; }
    double operator()(double y) const;
};

struct KappaParams {
    int n = 2;        // complex dimension, n >= 2
    double A = 1.0;   // L^p norm bound
    double Cn = 1.0;  // dimensional constant
    GrowthFunction Q;

    bool valid() const { return n >= 2 && A > 0.0 && Cn > 0.0 && Q.valid(); }
};

// kappa(r) = Cn * A^{1/n} * ( int_{r^{-1/n}}^inf y^{-1} Q(y)^{-1/n} dy
//                             + Q(r^{-1/n})^{-1/n} ).
// For the monomial family the antiderivative is explicit and kappa() uses it:
//   kappa(r) = Cn * A^{1/n} * scale^{-1/n} * (n/m + 1) * r^{m/n^2}.
// kappa_quadrature evaluates the defining integral with adaptive quadrature
// (log substitution plus analytic power-law tail) and is the cross-check
// route.
double kappa(double r, const KappaParams& p);
double kappa_quadrature(double r, const KappaParams& p);

// Inverse of kappa. The closed-form inversion for the monomial family:
//   r = ( t / (Cn A^{1/n} scale^{-1/n} (n/m + 1)) )^{n^2/m}.
// kappa_inverse_bisect inverts by bisection on an exponentially expanded
// bracket (200 iteration cap, relative tolerance 1e-10) using only the
// monotonicity of kappa.
double kappa_inverse(double t, const KappaParams& p);
double kappa_inverse_bisect(double t, const KappaParams& p);

// gamma(t) = C * kappa^{-1}(t); C must be positive.
double gamma_modulus(double t, double C, const KappaParams& p);

// Limit of the beta recurrence with vanishing delta schedule: the positive
// root of  A (1 + 2n / (A (A + eps))) = n + 2,  i.e.
//   A = ( (n+2-eps) + sqrt((n-2)^2 + 2(n+2) eps + eps^2) ) / 2.
// Satisfies A -> n as eps -> 0+.
double beta_limit(int n, double eps);

// State of the improvement iteration. deltas[k] is the slack used at step
// k+1 (deltas[0] drives beta_0 -> beta_1); an empty schedule means all zeros.
struct RecurrenceState {
    int n = 2;
    double eps = 0.1;
    std::vector<double> deltas;
    std::vector<double> betas; // filled by beta_sequence, beta_0 first
};

struct BetaRunReport {
    std::vector<double> betas;   // beta_0 .. beta_kmax
    bool decreasing = true;      // schedule admissibility, observed not assumed
    int first_increase = -1;     // first k with beta_k >= beta_{k-1}
    double limit = 0.0;          // beta_limit(n, eps)
    double final_gap = 0.0;      // |beta_kmax - limit|
};

// Iterates  beta_{k+1} (1 + 2n/(beta_k (beta_k + eps)))
//             = n + 2 + 5 delta_{k+1} - 2 delta_{k+1}/(beta_k + eps)
// from beta_0 = n + 2.
BetaRunReport beta_sequence(const RecurrenceState& state, int k_max);

// Default schedule delta_k = delta0 * 2^{-k} with delta0 the largest value
// in {2^{-j} : j >= 0} for which beta_1 < beta_0.
std::vector<double> default_delta_schedule(int n, double eps, int k_max);

// Fixed-chi variant: eps is replaced by n/chi and the right-hand side picks
// up the correction -(n/chi)/(n + n/chi).
struct ChiParams {
    int n = 2;
    double chi = 1.0;
    bool valid() const { return n >= 2 && chi > 0.0; }
};

struct ChiRunReport {
    std::vector<double> betas;
    bool decreasing = true;
    int first_increase = -1;
    double observed_limit = 0.0;      // fixed point of the recurrence as written
    double claimed_denominator = 0.0; // n + n/chi
};

ChiRunReport chi_beta_sequence(const ChiParams& p, const std::vector<double>& deltas,
                               int k_max);

} // namespace cmalab
