#pragma once

#include <map>
#include <string>
#include <vector>

namespace spdelab {

// Euler Beta function via log-gamma.
double beta_fn(double a, double b);

// iota_theta = (theta/e)^theta, the sharp constant in ||A^theta S(t)|| <= iota_theta t^{-theta}.
double iota(double theta);

// chi(theta, beta, nu) = sup_{t>=0} t^{2(theta-beta)} int_0^t e^{-2 nu (t-s)} s^{2 beta - 1} ds,
// finite for 0 <= beta <= theta < 1/2. Evaluated numerically.
double chi_sup(double theta, double beta, double nu);

// Data entering the closed-form right-hand sides. Expectations are plug-in
// values supplied by the caller (exact for deterministic data).
struct EstimateInputs {
    double beta = 0.0;
    double sigma = 0.0;
    double delta = 0.0;   // smoothing exponent of the noise, 0 when absent
    double eta = 0.0;     // nonlinearity exponent, 0 when absent
    double rho = 0.0;     // range regularity of F2, 0 when absent
    double nu = 0.0;      // semigroup decay rate (bottom eigenvalue)
    double lambda1 = 0.0; // bottom eigenvalue, ||A^{-s}|| = lambda1^{-s}
    double c_mtype = 1.0; // M-type 2 constant; 1 in the Hilbert flavor

    double sq_xi = 0.0;            // E ||xi||^2
    double sq_frac_xi = 0.0;       // E ||A^beta xi||^2
    double sq_f1 = 0.0;            // E ||F1||^2 in the weighted Holder norm
    double sq_g_smoothed = 0.0;    // E ||A^delta G||^2 (Ga) or E ||G||^2 (Gb)
    double sq_f2_zero = 0.0;       // E ||F2(0)||^2
    double c_f2 = 0.0;             // Lipschitz constant of F2 w.r.t. ||A^eta .||
    double sq_f2_range = 0.0;      // E [sup ||A^rho F2(x)||]^2
    double kappa_sq = 0.0;         // Picard ball radius squared, when applicable
};

// Closed-form right-hand side of a moment estimate at time t, assembled
// term-by-term from the proof constants. Each estimate id matches the audit
// name exposed by the CLI.
double estimate_rhs(const std::string& id, double t, const EstimateInputs& in);

// The bracketed constant multiplying (t-s)^{2(beta+delta-1)} in the
// mean-square increment bound for A I_2.
double e100_constant(const EstimateInputs& in);

// The analogous bracket for A^theta W_0 increments under (Gb):
// iota_theta^2 B(2beta,1-2theta) + iota_{1+theta}^2 B(2beta,1-2beta)/(beta-theta)^2,
// times c(E) and E||G||^2; valid for theta < beta.
double w_theta_constant(double theta, const EstimateInputs& in);

// Picard machinery -----------------------------------------------------------

struct KappaRadius {
    double c1 = 0.0;
    double c2 = 0.0;
    double kappa = 0.0;  // kappa^2 = 2 * 1.05 * max(c1, c2)
};

KappaRadius kappa_and_radius(const EstimateInputs& in);

// Contraction factor of the solution map on the ball, at horizon S.
double contraction_factor(double S, const EstimateInputs& in);

// The three local-time conditions (two ball conditions and the contraction
// condition); all monotone increasing in S.
struct LocalTimeConditions {
    double ball_eta = 0.0;      // must be <= kappa^2 / 2
    double ball_beta = 0.0;     // must be <= kappa^2 / 2
    double contraction = 0.0;   // must be < 1
    bool admissible = false;
    int binding = -1;  // 0,1,2: which condition binds first
};

LocalTimeConditions local_time_conditions(double S, const EstimateInputs& in);

}  // namespace spdelab
