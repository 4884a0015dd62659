#pragma once

#include <string>
#include <vector>

#include "spdelab/linear.hpp"
#include "spdelab/semilinear.hpp"

namespace spdelab {

// Which path of the ensemble the increment statistics are taken from.
// w_theta denotes A^theta applied to the stochastic convolution component.
enum class PathQuantity { state, frac_state, a_i2, w_theta };

struct HolderFit {
    std::vector<double> lags;                // dyadic block widths
    std::vector<double> mean_sq_increments;  // MC average per lag (pair-averaged)
    double slope = 0.0;                      // log-log regression
    double slope_se = 0.0;
    // per-pair ratios mean_sq / lag^target with their 3-SE slack
    struct PairRatio {
        double s = 0.0, t = 0.0;
        double mean_sq = 0.0;
        double ratio = 0.0;
        double three_se_ratio = 0.0;
    };
    std::vector<PairRatio> pairs;
    double target_exponent = 0.0;
};

// Mean-square increments over dyadic index blocks of the grid restricted to
// [t_min, T], regression slope on log lag. Needs >= 500 replicas.
HolderFit increment_moments(const SolutionEnsemble& ensemble, const SpectralOperator& op,
                            PathQuantity quantity, double theta, int num_scales,
                            double t_min = 0.0);

struct E100Report {
    HolderFit fit;
    double bound = 0.0;  // assembled increment constant
    bool ratios_ok = false;
    bool slope_ok = false;  // slope >= 2(beta+delta-1) - 0.1
};

E100Report verify_e100(const SolutionEnsemble& ensemble, const SpectralOperator& op,
                       const EstimateInputs& inputs, int num_scales);

struct WThetaReport {
    int case_applied = 0;  // 1, 2 or 3
    double target = 0.0;   // slope target before the fixed -0.1 slack
    HolderFit fit;
    bool slope_ok = false;
};

// Case table for the theta-smoothed stochastic convolution under the
// unsmoothed-noise hypothesis: near-origin pairs allowed only in case 1.
WThetaReport verify_w_theta_regularity(const SolutionEnsemble& ensemble,
                                       const SpectralOperator& op, double theta, double beta,
                                       double epsilon, int num_scales);

struct AuditRow {
    double t = 0.0;
    double lhs = 0.0;
    double three_se = 0.0;
    double rhs = 0.0;
    bool pass = false;
};

struct VerdictTable {
    std::string estimate;
    std::vector<AuditRow> rows;
    bool all_pass = false;
};

// One-sided moment-bound audit: MC left side <= assembled right side + 3 SE
// at every grid time. Estimate ids: H12.7, H10.5, H17.6, Ph2, H18.2, H23.4.
VerdictTable bound_audit(const std::string& estimate, const SolutionEnsemble& ensemble,
                         const SpectralOperator& op, const EstimateInputs& inputs);

// Normality of a fixed linear functional of the stochastic convolution
// (two-sided 1% test on the standardized sample).
struct GaussianityReport {
    double jb_statistic = 0.0;
    bool pass = false;
};
GaussianityReport gaussianity_check(const SolutionEnsemble& ensemble, size_t node,
                                    const std::vector<double>& functional);

}  // namespace spdelab
