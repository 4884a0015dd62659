#pragma once

#include <array>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spdelab/linear.hpp"

namespace spdelab {

// State-dependent drift F2, Lipschitz against the eta-fractional graph norm.
struct Nonlinearity {
    std::function<std::vector<double>(const std::vector<double>&)> eval;
    double c_f2 = 0.0;  // ||F2(x)-F2(y)|| <= c_f2 ||A^eta (x-y)||
    double eta = 0.0;
    double sq_f2_zero = 0.0;  // E||F2(0)||^2
    double rho = 0.0;         // range-regularity exponent; 0 = undeclared
    double sq_range_bound = 0.0;  // declared bound on E[sup_x ||A^rho F2(x)||]^2
    bool is_zero = false;
};

struct SemilinearProblem {
    LinearProblem linear;
    Nonlinearity f2;

    void validate() const;  // exponent window max{0, 2 eta - 1/2} < beta < eta, 0 < sigma < beta < 1/2
    int modes() const { return linear.modes(); }
};

struct LipschitzAuditReport {
    int pairs = 0;
    double worst_ratio = 0.0;  // max ||F2(x)-F2(y)|| / (c_f2 ||A^eta (x-y)||)
    bool ok = false;           // worst_ratio <= 1 + 1e-9
};

// Load-time audit of the declared Lipschitz constant on random pairs.
LipschitzAuditReport audit_lipschitz(const SemilinearProblem& problem, int pairs, uint64_t seed);

EstimateInputs make_estimate_inputs(const SemilinearProblem& problem);

// kappa with kappa^2/2 = 1.05 max(C1, C2), the ball radius the solution map
// preserves.
KappaRadius semilinear_kappa(const SemilinearProblem& problem);

struct LocalTimeReport {
    double t_loc = 0.0;
    int binding_condition = -1;  // 0/1: ball conditions, 2: contraction
    double contraction_at_t_loc = 0.0;
    double smallest_violated_margin = 0.0;  // when no admissible horizon exists
};

// Largest grid-representable horizon satisfying the two ball conditions and
// the contraction condition, located by bisection at one-cell resolution.
LocalTimeReport local_time(const SemilinearProblem& problem, double kappa, int n_cells,
                           double grading);

struct XiNormState {
    double sup_eta = 0.0;   // sup_t t^{2(eta-beta)} E||A^eta Y(t)||^2
    double sup_beta = 0.0;  // sup_t E||A^beta Y(t)||^2
    double xi_norm() const;
};

struct PicardTraceRow {
    int iteration = 0;
    double xi_distance = 0.0;  // ensemble weighted-space distance to the previous iterate
    double distance_se = 0.0;
    double ratio = 0.0;  // distance contraction ratio (0 on the first row)
    double ratio_se = 0.0;
    double theoretical_factor = 0.0;
    double ball_sup_eta = 0.0;
    double ball_sup_beta = 0.0;
    bool ball_ok = false;
};

struct PicardResult {
    SolutionEnsemble ensemble;  // fixed point, strict data populated
    std::vector<PicardTraceRow> trace;
    bool converged = false;
    int iterations = 0;
    double kappa = 0.0;
    double t_loc = 0.0;
};

class PicardDivergenceError : public std::runtime_error {
public:
    PicardDivergenceError(std::string msg, std::vector<PicardTraceRow> trace)
        : std::runtime_error(std::move(msg)), trace(std::move(trace)) {}
    std::vector<PicardTraceRow> trace;
};

struct PicardOptions {
    SolverOptions solver;       // horizon fields of the problem must satisfy T <= T_loc
    int max_iterations = 25;
    double tolerance = 1e-6;
    enum class InitialIterate { linear_solution, semigroup_only } initial =
        InitialIterate::linear_solution;
    bool check_local_time = true;
};

PicardResult picard_iterate(const SemilinearProblem& problem, const PicardOptions& opts);

struct StrictUpgradeReport {
    double residual = 0.0;              // integrated-equation defect of the fixed point
    double worst_range_norm = 0.0;      // max ||A^rho F2(X(t))|| along trajectories
    bool range_audit_ok = false;
    double max_weighted_ax = 0.0;       // max over early nodes of t^2 E||A X(t)||^2
    std::vector<std::array<double, 4>> h234_rows;  // t, lhs, 3*se, rhs
    bool h234_pass = false;
};

StrictUpgradeReport strict_upgrade_check(const SemilinearProblem& problem,
                                         const PicardOptions& opts);

struct BallSpec {
    double r1 = 0.0;  // forcing Holder-norm radius
    double r2 = 0.0;  // smoothed-noise Holder-norm radius
    double r3 = 0.0;  // fractional initial-value radius
};

struct ContinuousDependenceReport {
    double c_fit = 0.0;        // sup over grid of lhs/rhs
    double c_gronwall = 0.0;   // comparison-lemma bound on the same ratio
    double max_lhs = 0.0;
    double max_rhs = 0.0;
    bool identical_inputs_zero = false;  // lhs exactly 0 when data gaps vanish
    std::vector<std::array<double, 3>> rows;  // t, lhs, rhs
};

ContinuousDependenceReport continuous_dependence(const SemilinearProblem& pa,
                                                 const SemilinearProblem& pb,
                                                 const BallSpec& balls,
                                                 const PicardOptions& opts);

struct ScalingSweepReport {
    std::vector<double> epsilons;
    std::vector<double> gap_norms;  // sqrt(sup_t E||X - Xbar||^2)
    double slope = 0.0;             // log-log regression
};

// Perturbs the initial value by eps * direction and regresses the solution
// gap against eps; first-order dependence shows as unit slope.
ScalingSweepReport continuous_dependence_scaling(const SemilinearProblem& problem,
                                                 const std::vector<double>& direction,
                                                 const std::vector<double>& epsilons,
                                                 const PicardOptions& opts);

struct GronwallReport {
    bool premise_ok = false;
    double worst_premise_gap = 0.0;
    double c_direct = 0.0;  // minimal c with phi <= c f on the grid
    double c_kernel = 0.0;  // iterated-kernel bound (>= c_direct when premise holds)
};

// Comparison bound for phi(t) <= f(t) + a^{-mu} int_a^t (t-r)^{nu-1} phi(r) dr
// on sampled data; c_kernel comes from summing the iterated kernel series.
GronwallReport weighted_gronwall(const std::vector<double>& times, const std::vector<double>& f,
                                 const std::vector<double>& phi, double a, double mu, double nu_exp);

// Same with the kernel prefactor given directly (covers the zero-kernel case).
GronwallReport weighted_gronwall_prefactor(const std::vector<double>& times,
                                           const std::vector<double>& f,
                                           const std::vector<double>& phi, double prefactor,
                                           double nu_exp);

}  // namespace spdelab
