#pragma once

#include <span>
#include <string>
#include <vector>

#include "cmalab/fitting.hpp"

namespace cmalab {

// Radial potential glued from a fractional power core and a logarithmic
// tail:
//   rho_hat = B r^{2 alpha}            for r <= 1,
//             max(B r^{2a}, log r + D) for 1 <= r <= 2,
//             log r + D                for r >= 2.
// rho (the smooth version) replaces the kink with a regularized maximum of
// width smoothing_width in the collar 3/4 < r < 2 + smoothing_width and
// keeps both branches exact outside it.
struct RadialProfile {
    double B = 4.0;
    double D = 3.96;
    double alpha = 0.1;
    int n = 2;
    double smoothing_width = 0.05;

    // Normalization constant of the core Monge-Ampere density
    // m(r) = ma_constant * B^n * r^{2n(alpha-1)}; filled by
    // calibrate_ma_constant (0 = not calibrated yet).
    double ma_constant = 0.0;
};

struct ProfileCheck {
    bool ok = true;
    std::string violation; // first violated inequality, named
};

// The three profile constraints: D < B, B 2^{2 alpha} < log 2 + D,
// 0 < alpha < 1/(2n).
ProfileCheck validate_profile(const RadialProfile& p);

// The smoothing collar additionally needs branch gaps of at least the
// regularization width at r = 3/4 and r = 2 + width so both exact regions
// survive. Throws if violated.
void require_smoothable(const RadialProfile& p);

// Piecewise and smoothed radial values (r = ||z||).
double rho_hat_radial(double r, const RadialProfile& p);
double rho_smooth_radial(double r, const RadialProfile& p);

// Derivatives of F(t) = rho(e^t) with respect to t = log r; exact per
// branch, analytic through the regularized maximum.
double rho_log_d1(double t, const RadialProfile& p);
double rho_log_d2(double t, const RadialProfile& p);

// Monge-Ampere density (complex Hessian determinant against Lebesgue
// measure) of the full smoothed profile at radius r:
//   m(r) = F''(t) F'(t)^{n-1} / (2^{n+1} r^{2n}),  t = log r.
double ma_density_radial(double r, const RadialProfile& p);

// Point interfaces; z and h are real coordinate vectors of length 2n.
double rho_hat(std::span<const double> z, const RadialProfile& p);
double rho_smooth(std::span<const double> z, const RadialProfile& p);

// rho(z + h) - (1/2) log(1 + ||z||^2): the profile translated by h seen in
// the affine chart of the projective lift.
double projective_lift(std::span<const double> z, const RadialProfile& p,
                       std::span<const double> h);

// Core-region closed form c(n,alpha) B^n ||z||^{2n(alpha-1)}; requires
// 0 < ||z|| <= 3/4 and a calibrated profile.
double ma_density(std::span<const double> z, const RadialProfile& p);

// Finite-difference oracle for the density normalization: evaluates the
// complex Hessian determinant of B ||z||^{2 alpha} on local stencils at a
// few sample points, Richardson-extrapolated in the stencil size.
double calibrate_ma_constant(const RadialProfile& p);
RadialProfile calibrated(RadialProfile p); // convenience: fills ma_constant

// sup_z |rho(z + h) - rho(z)|, searched by golden-section refinement along
// the segment through 0 and -h plus deterministic restarts in the (radius,
// angle) reduction. Requires ||h|| < 1/4.
double sup_distance(const RadialProfile& p, std::span<const double> h);

struct L1Result {
    double value = 0.0;          // int |MA(rho) - MA(rho_h)|
    double core = 0.0;           // ||z|| <= 2||h||
    double annulus = 0.0;        // 2||h|| < ||z|| <= 1/2
    double outer = 0.0;          // ||z|| > 1/2
    double core_majorant = 0.0;  // closed-form bound for the core piece
    double error_estimate = 0.0; // accumulated quadrature error estimate
    bool converged = true;
};

// L1 distance of the Monge-Ampere measures of rho and rho_h, computed in
// the three-piece split. Requires ||h|| < 1/4 and a calibrated profile.
L1Result l1_ma_distance(const RadialProfile& p, std::span<const double> h);

struct SharpnessReport {
    std::vector<double> h_norms;
    std::vector<double> sup_values;
    std::vector<double> l1_values;
    std::vector<double> l1_errors; // quadrature error estimates
    FitResult sup_fit;       // expected slope 2 alpha
    FitResult l1_fit;        // expected slope 2 n alpha
    double slope_ratio = 0.0;   // l1 slope / sup slope, expected n
    double implied_m_lower = 0.0; // the stability exponent bound m >= ratio
    bool conclusive = true;  // false when fit residuals are too large
};

// Runs both distances over the h schedule and fits the two power laws.
// Needs at least 4 norms spanning a decade.
SharpnessReport sharpness_report(const RadialProfile& p, const std::vector<double>& h_norms);

// Default h schedule 10^{-3 + j/4}, j = 0..4.
std::vector<double> default_h_schedule();

} // namespace cmalab
