#include "spdelab/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "spdelab/stats.hpp"

namespace spdelab {

namespace {

std::vector<double> path_value(const SolutionEnsemble& ens, const SpectralOperator& op,
                               PathQuantity q, double theta, size_t node, size_t replica) {
    const auto& p = ens.paths[replica];
    const int K = op.mode_count();
    std::vector<double> v(K);
    switch (q) {
        case PathQuantity::state:
            return p.x[node];
        case PathQuantity::frac_state:
            for (int k = 0; k < K; ++k)
                v[k] = std::pow(op.eigenvalues[k], theta) * p.x[node][k];
            return v;
        case PathQuantity::a_i2:
            for (int k = 0; k < K; ++k) v[k] = op.eigenvalues[k] * p.i2[node][k];
            return v;
        case PathQuantity::w_theta:
            for (int k = 0; k < K; ++k)
                v[k] = std::pow(op.eigenvalues[k], theta) * p.i2[node][k];
            return v;
    }
    throw std::logic_error("unreachable");
}

}  // namespace

HolderFit increment_moments(const SolutionEnsemble& ensemble, const SpectralOperator& op,
                            PathQuantity quantity, double theta, int num_scales, double t_min) {
    if (ensemble.paths.size() < 500)
        throw std::invalid_argument("increment statistics need >= 500 replicas");
    const auto& times = ensemble.times;
    size_t first = 0;
    while (first + 1 < times.size() && times[first] < t_min) ++first;
    const size_t span = times.size() - 1 - first;
    if (span < 4) throw std::invalid_argument("grid too short for increment statistics");

    HolderFit fit;
    const size_t R = ensemble.paths.size();
    for (int scale = 0; scale < num_scales; ++scale) {
        const size_t block = span >> scale;
        if (block == 0) break;
        double lag_sum = 0.0;
        std::vector<double> level_means;
        size_t count = 0;
        for (size_t s = first; s + block <= times.size() - 1; s += block) {
            const size_t t_idx = s + block;
            std::vector<double> sq(R);
            for (size_t r = 0; r < R; ++r) {
                const auto a = path_value(ensemble, op, quantity, theta, t_idx, r);
                const auto b = path_value(ensemble, op, quantity, theta, s, r);
                double acc = 0.0;
                for (size_t k = 0; k < a.size(); ++k) acc += (a[k] - b[k]) * (a[k] - b[k]);
                sq[r] = acc;
            }
            const auto m = mean_with_error(sq);
            HolderFit::PairRatio pr;
            pr.s = times[s];
            pr.t = times[t_idx];
            pr.mean_sq = m.mean;
            pr.three_se_ratio = 3.0 * m.std_error;  // scaled by lag^target later
            fit.pairs.push_back(pr);
            level_means.push_back(m.mean);
            lag_sum += times[t_idx] - times[s];
            ++count;
        }
        double level = 0.0;
        for (double v : level_means) level += v;
        fit.lags.push_back(lag_sum / static_cast<double>(count));
        fit.mean_sq_increments.push_back(level / static_cast<double>(count));
    }
    if (fit.lags.size() >= 4) {
        std::vector<double> lx, ly;
        for (size_t i = 0; i < fit.lags.size(); ++i) {
            if (fit.mean_sq_increments[i] <= 0.0) continue;
            lx.push_back(std::log(fit.lags[i]));
            ly.push_back(std::log(fit.mean_sq_increments[i]));
        }
        if (lx.size() >= 4) {
            const auto f = least_squares(lx, ly);
            fit.slope = f.slope;
            fit.slope_se = f.slope_se;
        }
    }
    return fit;
}

E100Report verify_e100(const SolutionEnsemble& ensemble, const SpectralOperator& op,
                       const EstimateInputs& inputs, int num_scales) {
    E100Report rep;
    rep.bound = e100_constant(inputs);
    const double target = 2.0 * (inputs.beta + inputs.delta - 1.0);
    rep.fit = increment_moments(ensemble, op, PathQuantity::a_i2, 0.0, num_scales);
    rep.fit.target_exponent = target;
    rep.ratios_ok = true;
    for (auto& pr : rep.fit.pairs) {
        const double lag_pow = std::pow(pr.t - pr.s, target);
        pr.ratio = pr.mean_sq / lag_pow;
        pr.three_se_ratio /= lag_pow;
        if (pr.ratio > rep.bound + pr.three_se_ratio) rep.ratios_ok = false;
    }
    rep.slope_ok = rep.fit.slope >= target - 0.1;
    return rep;
}

WThetaReport verify_w_theta_regularity(const SolutionEnsemble& ensemble,
                                       const SpectralOperator& op, double theta, double beta,
                                       double epsilon, int num_scales) {
    WThetaReport rep;
    if (theta < 0.0 || theta > beta)
        throw std::domain_error("w_theta regularity table covers 0 <= theta <= beta");
    double t_min = 0.0;
    if (theta < beta) {
        rep.case_applied = 1;
        rep.target = 2.0 * (beta - theta);
    } else if (beta >= 0.25) {
        rep.case_applied = 2;
        rep.target = 2.0 * (0.5 - theta);
        t_min = epsilon;
    } else {
        rep.case_applied = 3;
        rep.target = 2.0 * theta;
        t_min = epsilon;
    }
    rep.fit = increment_moments(ensemble, op, PathQuantity::w_theta, theta, num_scales, t_min);
    rep.fit.target_exponent = rep.target;
    rep.slope_ok = rep.fit.slope >= rep.target - 0.1;
    return rep;
}

VerdictTable bound_audit(const std::string& estimate, const SolutionEnsemble& ensemble,
                         const SpectralOperator& op, const EstimateInputs& inputs) {
    static const char* known[] = {"H12.7", "H10.5", "H17.6", "Ph2", "H18.2", "H23.4"};
    bool ok = false;
    for (const char* k : known) ok = ok || estimate == k;
    if (!ok) throw std::invalid_argument("unknown estimate id: " + estimate);

    const auto& times = ensemble.times;
    const size_t R = ensemble.paths.size();
    const int K = op.mode_count();
    VerdictTable table;
    table.estimate = estimate;
    table.all_pass = true;

    std::vector<double> lam_beta(K);
    for (int k = 0; k < K; ++k) lam_beta[k] = std::pow(op.eigenvalues[k], inputs.beta);

    for (size_t n = 0; n < times.size(); ++n) {
        const double t = times[n];
        if (t == 0.0 && (estimate == "H12.7" || estimate == "H23.4")) continue;
        std::vector<double> sample(R);
        for (size_t r = 0; r < R; ++r) {
            const auto& p = ensemble.paths[r];
            double v = 0.0;
            if (estimate == "H12.7") {
                double x2 = 0.0, ax2 = 0.0;
                for (int k = 0; k < K; ++k) {
                    x2 += p.x[n][k] * p.x[n][k];
                    ax2 += p.ax[n][k] * p.ax[n][k];
                }
                v = x2 + t * t * ax2;
            } else if (estimate == "H23.4") {
                for (int k = 0; k < K; ++k) v += p.ax[n][k] * p.ax[n][k];
            } else {
                for (int k = 0; k < K; ++k) {
                    const double w = lam_beta[k] * p.x[n][k];
                    v += w * w;
                }
            }
            sample[r] = v;
        }
        const auto m = mean_with_error(sample);
        AuditRow row;
        row.t = t;
        row.lhs = m.mean;
        row.three_se = 3.0 * m.std_error;
        row.rhs = estimate_rhs(estimate, t, inputs);
        row.pass = row.lhs <= row.rhs + row.three_se;
        if (!row.pass) table.all_pass = false;
        table.rows.push_back(row);
    }
    return table;
}

GaussianityReport gaussianity_check(const SolutionEnsemble& ensemble, size_t node,
                                    const std::vector<double>& functional) {
    std::vector<double> sample(ensemble.paths.size());
    for (size_t r = 0; r < ensemble.paths.size(); ++r) {
        double s = 0.0;
        const auto& v = ensemble.paths[r].i2[node];
        for (size_t k = 0; k < v.size() && k < functional.size(); ++k) s += functional[k] * v[k];
        sample[r] = s;
    }
    const auto jb = jarque_bera(sample);
    return {jb.statistic, jb.pass_1pct};
}

}  // namespace spdelab
