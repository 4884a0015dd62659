#include "spdelab/semilinear.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "spdelab/grids.hpp"
#include "spdelab/holder.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

void SemilinearProblem::validate() const {
    linear.validate(linear.noise.delta.has_value());
    const double beta = linear.f1.beta, eta = f2.eta;
    if (!(beta < eta && std::max(0.0, 2.0 * eta - 0.5) < beta))
        throw std::domain_error("exponents must satisfy max{0, 2 eta - 1/2} < beta < eta");
    if (!f2.is_zero && f2.c_f2 < 0.0) throw std::domain_error("Lipschitz constant must be >= 0");
}

LipschitzAuditReport audit_lipschitz(const SemilinearProblem& problem, int pairs, uint64_t seed) {
    const int K = problem.modes();
    const auto& lam = problem.linear.op.eigenvalues;
    const CounterRng rng(seed);
    LipschitzAuditReport rep;
    rep.pairs = pairs;
    for (int p = 0; p < pairs; ++p) {
        std::vector<double> x(K), y(K);
        for (int k = 0; k < K; ++k) {
            const auto z = rng.normal_pair(p, streams::kScratch + 3, k);
            x[k] = z.z1 / lam[k];
            y[k] = z.z2 / lam[k];
        }
        const auto fx = problem.f2.eval(x);
        const auto fy = problem.f2.eval(y);
        double num = 0.0, den = 0.0;
        for (int k = 0; k < K; ++k) {
            const double d = fx[k] - fy[k];
            num += d * d;
            const double e = std::pow(lam[k], problem.f2.eta) * (x[k] - y[k]);
            den += e * e;
        }
        if (den == 0.0) continue;
        const double ratio = std::sqrt(num) / (problem.f2.c_f2 * std::sqrt(den));
        rep.worst_ratio = std::max(rep.worst_ratio, ratio);
    }
    rep.ok = rep.worst_ratio <= 1.0 + 1e-9;
    return rep;
}

EstimateInputs make_estimate_inputs(const SemilinearProblem& problem) {
    EstimateInputs in = make_estimate_inputs(problem.linear);
    in.eta = problem.f2.eta;
    in.rho = problem.f2.rho;
    in.c_f2 = problem.f2.c_f2;
    in.sq_f2_zero = problem.f2.sq_f2_zero;
    in.sq_f2_range = problem.f2.sq_range_bound;
    in.kappa_sq = kappa_and_radius(in).kappa * kappa_and_radius(in).kappa;
    return in;
}

KappaRadius semilinear_kappa(const SemilinearProblem& problem) {
    EstimateInputs in = make_estimate_inputs(problem.linear);
    in.eta = problem.f2.eta;
    return kappa_and_radius(in);
}

LocalTimeReport local_time(const SemilinearProblem& problem, double kappa, int n_cells,
                           double grading) {
    problem.validate();
    EstimateInputs in = make_estimate_inputs(problem.linear);
    in.eta = problem.f2.eta;
    in.c_f2 = problem.f2.c_f2;
    in.sq_f2_zero = problem.f2.sq_f2_zero;
    in.kappa_sq = kappa * kappa;
    const auto nodes = graded_grid(problem.linear.horizon, n_cells, grading);

    LocalTimeReport rep;
    auto admissible = [&](int idx) { return local_time_conditions(nodes[idx], in).admissible; };
    if (!admissible(1)) {
        const auto c = local_time_conditions(nodes[1], in);
        const double m = std::min({0.5 * in.kappa_sq - c.ball_eta, 0.5 * in.kappa_sq - c.ball_beta,
                                   1.0 - c.contraction});
        rep.smallest_violated_margin = m;
        throw std::runtime_error(
            "no admissible local horizon; smallest violated margin = " + std::to_string(m));
    }
    // Conditions are monotone in the horizon: bisect on the node index.
    int lo = 1, hi = n_cells;
    if (admissible(hi)) {
        lo = hi;
    } else {
        while (hi - lo > 1) {
            const int mid = (lo + hi) / 2;
            (admissible(mid) ? lo : hi) = mid;
        }
    }
    const auto c = local_time_conditions(nodes[lo], in);
    rep.t_loc = nodes[lo];
    rep.binding_condition = c.binding;
    rep.contraction_at_t_loc = c.contraction;
    return rep;
}

double XiNormState::xi_norm() const { return std::sqrt(sup_eta + sup_beta); }

namespace {

using Field = std::vector<std::vector<double>>;  // [node][mode]

// Product-integration convolution of the semigroup against nodal samples,
// cell value = endpoint average (first cell included; samples stay bounded).
Field convolve_nodal(const SpectralOperator& op, const std::vector<double>& nodes,
                     const Field& samples) {
    const int K = op.mode_count();
    Field out(nodes.size(), std::vector<double>(K, 0.0));
    std::vector<double> state(K, 0.0);
    for (size_t c = 0; c + 1 < nodes.size(); ++c) {
        const double w = nodes[c + 1] - nodes[c];
        for (int k = 0; k < K; ++k) {
            const double lam = op.eigenvalues[k];
            const double decay = std::exp(-lam * w);
            const double fv = 0.5 * (samples[c][k] + samples[c + 1][k]);
            state[k] = decay * state[k] + fv * (1.0 - decay) / lam;
        }
        out[c + 1] = state;
    }
    return out;
}

struct SupWithError {
    double sup = 0.0;
    double se = 0.0;
    size_t argmax = 0;
};

// sup over nodes of weight(n) * mean_r per_replica(n, r), with the standard
// error of the mean taken at the argmax node.
SupWithError sup_of_means(const std::vector<double>& nodes,
                          const std::function<double(size_t)>& weight,
                          const std::function<double(size_t, size_t)>& value, size_t replicas,
                          size_t first_node) {
    SupWithError s;
    std::vector<double> at_arg(replicas);
    for (size_t n = first_node; n < nodes.size(); ++n) {
        double m = 0.0;
        for (size_t r = 0; r < replicas; ++r) m += value(n, r);
        m = weight(n) * m / static_cast<double>(replicas);
        if (m >= s.sup) {
            s.sup = m;
            s.argmax = n;
        }
    }
    for (size_t r = 0; r < replicas; ++r) at_arg[r] = weight(s.argmax) * value(s.argmax, r);
    s.se = mean_with_error(at_arg).std_error;
    return s;
}

double frac_sq_norm(const std::vector<double>& lam_pow, const std::vector<double>& v) {
    double s = 0.0;
    for (size_t k = 0; k < v.size(); ++k) {
        const double w = lam_pow[k] * v[k];
        s += w * v[k] * lam_pow[k];
    }
    return s;
}

}  // namespace

PicardResult picard_iterate(const SemilinearProblem& problem, const PicardOptions& opts) {
    problem.validate();
    if (!problem.f2.is_zero) {
        const auto audit = audit_lipschitz(problem, 1000, opts.solver.seed ^ 0x5eed);
        if (!audit.ok)
            throw std::runtime_error("nonlinearity violates its declared Lipschitz constant (ratio " +
                                     std::to_string(audit.worst_ratio) + ")");
    }

    const auto kr = semilinear_kappa(problem);
    PicardResult result;
    result.kappa = kr.kappa;
    {
        LocalTimeReport lt;
        try {
            lt = local_time(problem, kr.kappa, opts.solver.n_cells, opts.solver.grading);
            result.t_loc = lt.t_loc;
        } catch (const std::runtime_error&) {
            if (opts.check_local_time) throw;
        }
        if (opts.check_local_time && problem.linear.horizon > result.t_loc * (1.0 + 1e-12))
            throw std::domain_error("horizon exceeds the admissible local existence time");
    }

    EstimateInputs in = make_estimate_inputs(problem.linear);
    in.eta = problem.f2.eta;
    in.c_f2 = problem.f2.c_f2;
    in.sq_f2_zero = problem.f2.sq_f2_zero;
    in.kappa_sq = kr.kappa * kr.kappa;
    const double factor_bound = contraction_factor(problem.linear.horizon, in);

    SolverOptions sopts = opts.solver;
    sopts.strict = problem.linear.noise.delta.has_value();
    SolutionEnsemble base = solve_linear(problem.linear, sopts);

    const int K = problem.modes();
    const auto& nodes = base.times;
    const size_t R = base.paths.size();
    const double beta = problem.linear.f1.beta, eta = problem.f2.eta;

    std::vector<double> lam_eta(K), lam_beta(K);
    for (int k = 0; k < K; ++k) {
        lam_eta[k] = std::pow(problem.linear.op.eigenvalues[k], eta);
        lam_beta[k] = std::pow(problem.linear.op.eigenvalues[k], beta);
    }

    std::vector<Field> current(R), previous(R);
    for (size_t r = 0; r < R; ++r) {
        if (opts.initial == PicardOptions::InitialIterate::linear_solution) {
            current[r] = base.paths[r].x;
        } else {
            current[r].assign(nodes.size(), std::vector<double>(K, 0.0));
            for (size_t n = 0; n < nodes.size(); ++n)
                for (int k = 0; k < K; ++k)
                    current[r][n][k] = std::exp(-problem.linear.op.eigenvalues[k] * nodes[n]) *
                                       base.paths[r].xi[k];
        }
    }

    auto eta_weight = [&](size_t n) { return std::pow(nodes[n], 2.0 * (eta - beta)); };
    auto unit_weight = [](size_t) { return 1.0; };

    std::vector<Field> f2_values(R, Field(nodes.size()));
    double prev_distance = 0.0, prev_se = 0.0;

    for (int iter = 1; iter <= opts.max_iterations; ++iter) {
        previous = current;
        parallel_for(static_cast<int>(R), opts.solver.workers, [&](int ri) {
            const size_t r = static_cast<size_t>(ri);
            for (size_t n = 0; n < nodes.size(); ++n)
                f2_values[r][n] = problem.f2.is_zero ? std::vector<double>(K, 0.0)
                                                     : problem.f2.eval(previous[r][n]);
            const Field conv = convolve_nodal(problem.linear.op, nodes, f2_values[r]);
            for (size_t n = 0; n < nodes.size(); ++n)
                for (int k = 0; k < K; ++k)
                    current[r][n][k] = base.paths[r].x[n][k] + conv[n][k];
        });

        auto gap_eta = [&](size_t n, size_t r) {
            std::vector<double> d(K);
            for (int k = 0; k < K; ++k) d[k] = current[r][n][k] - previous[r][n][k];
            return frac_sq_norm(lam_eta, d);
        };
        auto gap_beta = [&](size_t n, size_t r) {
            std::vector<double> d(K);
            for (int k = 0; k < K; ++k) d[k] = current[r][n][k] - previous[r][n][k];
            return frac_sq_norm(lam_beta, d);
        };
        const auto a = sup_of_means(nodes, eta_weight, gap_eta, R, 1);
        const auto b = sup_of_means(nodes, unit_weight, gap_beta, R, 0);
        const double dist_sq = a.sup + b.sup;
        const double dist = std::sqrt(dist_sq);
        const double se_sq = std::sqrt(a.se * a.se + b.se * b.se);
        const double dist_se = dist > 0.0 ? se_sq / (2.0 * dist) : std::sqrt(se_sq);

        PicardTraceRow row;
        row.iteration = iter;
        row.xi_distance = dist;
        row.distance_se = dist_se;
        row.theoretical_factor = factor_bound;
        if (iter > 1 && prev_distance > 0.0) {
            row.ratio = dist / prev_distance;
            row.ratio_se = row.ratio * std::sqrt(std::pow(dist_se / std::max(dist, 1e-300), 2) +
                                                 std::pow(prev_se / prev_distance, 2));
        }
        auto ball_eta = [&](size_t n, size_t r) { return frac_sq_norm(lam_eta, current[r][n]); };
        auto ball_beta = [&](size_t n, size_t r) { return frac_sq_norm(lam_beta, current[r][n]); };
        row.ball_sup_eta = sup_of_means(nodes, eta_weight, ball_eta, R, 1).sup;
        row.ball_sup_beta = sup_of_means(nodes, unit_weight, ball_beta, R, 0).sup;
        row.ball_ok = std::max(row.ball_sup_eta, row.ball_sup_beta) <= kr.kappa * kr.kappa;
        result.trace.push_back(row);

        prev_distance = dist;
        prev_se = dist_se;
        if (dist < opts.tolerance) {
            result.converged = true;
            result.iterations = iter;
            break;
        }
    }
    if (!result.converged)
        throw PicardDivergenceError("Picard iteration did not reach tolerance within " +
                                        std::to_string(opts.max_iterations) + " iterations",
                                    result.trace);

    // Assemble the fixed-point ensemble; the drift path raises the state by
    // one power of A, so A X = A X_lin + A * conv(F2).
    result.ensemble.times = nodes;
    result.ensemble.seed = sopts.seed;
    result.ensemble.paths.resize(R);
    for (size_t r = 0; r < R; ++r) {
        SolutionPath p = base.paths[r];
        const Field conv = convolve_nodal(problem.linear.op, nodes, f2_values[r]);
        for (size_t n = 0; n < nodes.size(); ++n)
            for (int k = 0; k < K; ++k) {
                p.x[n][k] = current[r][n][k];
                if (!p.ax.empty())
                    p.ax[n][k] += problem.linear.op.eigenvalues[k] * conv[n][k];
            }
        p.frac.clear();
        for (double theta : sopts.theta_list) {
            Field f(nodes.size(), std::vector<double>(K, 0.0));
            for (size_t n = 0; n < nodes.size(); ++n)
                for (int k = 0; k < K; ++k)
                    f[n][k] = std::pow(problem.linear.op.eigenvalues[k], theta) * p.x[n][k];
            p.frac.emplace_back(theta, std::move(f));
        }
        result.ensemble.paths[r] = std::move(p);
    }
    return result;
}

StrictUpgradeReport strict_upgrade_check(const SemilinearProblem& problem,
                                         const PicardOptions& opts) {
    if (problem.f2.rho <= 0.0 || problem.f2.sq_range_bound <= 0.0)
        throw std::domain_error("strict upgrade needs a declared range-regularity bound");
    auto result = picard_iterate(problem, opts);
    const auto& nodes = result.ensemble.times;
    const int K = problem.modes();
    const size_t R = result.ensemble.paths.size();

    std::vector<double> lam_rho(K);
    for (int k = 0; k < K; ++k)
        lam_rho[k] = std::pow(problem.linear.op.eigenvalues[k], problem.f2.rho);
    const double declared = std::sqrt(problem.f2.sq_range_bound);

    StrictUpgradeReport rep;
    std::vector<double> residuals(R, 0.0);
    std::vector<std::vector<double>> ax_sq(nodes.size(), std::vector<double>(R, 0.0));

    for (size_t r = 0; r < R; ++r) {
        const auto& p = result.ensemble.paths[r];
        // Runtime audit of the declared range bound along the trajectory.
        Field f2v(nodes.size());
        for (size_t n = 0; n < nodes.size(); ++n) {
            f2v[n] = problem.f2.eval(p.x[n]);
            rep.worst_range_norm = std::max(rep.worst_range_norm, frac_sq_norm(lam_rho, f2v[n]));
        }
        // Integrated-equation defect with the drift term included.
        std::vector<double> series(nodes.size());
        double worst = 0.0;
        std::vector<std::vector<double>> int_ax(K), int_f1(K), int_f2(K);
        for (int k = 0; k < K; ++k) {
            for (size_t n = 0; n < nodes.size(); ++n) series[n] = p.ax[n][k];
            int_ax[k] = cumulative_integral_singular(nodes, series);
            for (size_t n = 0; n < nodes.size(); ++n) series[n] = f2v[n][k];
            int_f2[k] = cumulative_trapezoid(nodes, series);
            if (!problem.linear.f1.is_zero) {
                series[0] = 0.0;
                for (size_t n = 1; n < nodes.size(); ++n)
                    series[n] = problem.linear.f1.eval(nodes[n])[k];
                int_f1[k] = cumulative_integral_singular(nodes, series);
            }
        }
        for (size_t n = 1; n < nodes.size(); ++n) {
            double sq = 0.0, axsq = 0.0;
            for (int k = 0; k < K; ++k) {
                double res = p.x[n][k] + int_ax[k][n] - p.xi[k] - int_f2[k][n] -
                             p.int_g_dw[n][k];
                if (!problem.linear.f1.is_zero) res -= int_f1[k][n];
                sq += res * res;
                axsq += p.ax[n][k] * p.ax[n][k];
            }
            worst = std::max(worst, std::sqrt(sq));
            ax_sq[n][r] = axsq;
        }
        residuals[r] = worst;
    }
    rep.worst_range_norm = std::sqrt(rep.worst_range_norm);
    rep.range_audit_ok = rep.worst_range_norm <= declared * (1.0 + 1e-9);
    if (!rep.range_audit_ok)
        throw std::runtime_error("trajectory exceeds the declared range-regularity bound (" +
                                 std::to_string(rep.worst_range_norm) + " > " +
                                 std::to_string(declared) + ")");
    double rms = 0.0;
    for (double v : residuals) rms += v * v;
    rep.residual = std::sqrt(rms / static_cast<double>(R));

    EstimateInputs in = make_estimate_inputs(problem);
    rep.h234_pass = true;
    for (size_t n = 1; n < nodes.size(); ++n) {
        const auto m = mean_with_error(ax_sq[n]);
        const double rhs = estimate_rhs("H23.4", nodes[n], in);
        rep.h234_rows.push_back({nodes[n], m.mean, 3.0 * m.std_error, rhs});
        if (m.mean > rhs + 3.0 * m.std_error) rep.h234_pass = false;
        if (n <= 5)
            rep.max_weighted_ax = std::max(rep.max_weighted_ax, nodes[n] * nodes[n] * m.mean);
    }
    return rep;
}

namespace {

double sampled_gap_sq_holder(const std::function<std::vector<double>(double)>& fa,
                             const std::function<std::vector<double>(double)>& fb, double beta,
                             double sigma, double horizon) {
    const auto grid = graded_grid(horizon, 384, 2.0);
    WeightedHolderPath path;
    path.beta = beta;
    path.sigma = sigma;
    path.horizon = horizon;
    for (size_t j = 1; j < grid.size(); ++j) {
        auto va = fa(grid[j]);
        const auto vb = fb(grid[j]);
        for (size_t k = 0; k < va.size(); ++k) va[k] -= vb[k];
        path.times.push_back(grid[j]);
        path.values.push_back(std::move(va));
    }
    const double total = holder_norm(path).total;
    return total * total;
}

}  // namespace

ContinuousDependenceReport continuous_dependence(const SemilinearProblem& pa,
                                                 const SemilinearProblem& pb,
                                                 const BallSpec& balls, const PicardOptions& opts) {
    for (const auto* p : {&pa, &pb}) {
        if (p->linear.sq_frac_xi(p->linear.f1.beta) > balls.r3 * balls.r3)
            throw std::domain_error("initial value outside the configured ball");
        if (p->linear.f1.sq_holder_norm > balls.r1 * balls.r1)
            throw std::domain_error("forcing outside the configured ball");
        if (p->linear.noise.sq_holder_norm_smoothed > balls.r2 * balls.r2)
            throw std::domain_error("noise outside the configured ball");
    }
    if (pa.linear.horizon != pb.linear.horizon)
        throw std::invalid_argument("continuous dependence needs a common horizon");

    const auto ra = picard_iterate(pa, opts);
    const auto rb = picard_iterate(pb, opts);
    const auto& nodes = ra.ensemble.times;
    const int K = pa.modes();
    const size_t R = ra.ensemble.paths.size();
    const double beta = pa.linear.f1.beta, eta = pa.f2.eta;

    std::vector<double> lam_eta(K), lam_beta(K);
    for (int k = 0; k < K; ++k) {
        lam_eta[k] = std::pow(pa.linear.op.eigenvalues[k], eta);
        lam_beta[k] = std::pow(pa.linear.op.eigenvalues[k], beta);
    }

    double d_xi = 0.0;
    for (int k = 0; k < K; ++k) {
        const double d = pa.linear.xi_base[k] - pb.linear.xi_base[k];
        d_xi += d * d;
    }
    const double delta = pa.linear.noise.delta.value_or(0.0);
    const auto& op = pa.linear.op;
    const double d_f1 = sampled_gap_sq_holder(pa.linear.f1.eval, pb.linear.f1.eval, beta,
                                              pa.linear.f1.sigma, pa.linear.horizon);
    auto smoothed = [&](const NoiseTerm& nz) {
        return [&nz, &op, delta](double t) {
            auto g = nz.eval(t);
            for (size_t k = 0; k < g.size(); ++k) g[k] *= std::pow(op.eigenvalues[k], delta);
            return g;
        };
    };
    const double d_g = sampled_gap_sq_holder(smoothed(pa.linear.noise), smoothed(pb.linear.noise),
                                             beta + 0.5, pa.linear.noise.sigma, pa.linear.horizon);

    ContinuousDependenceReport rep;
    std::vector<double> qvec(nodes.size(), 0.0);
    for (size_t n = 1; n < nodes.size(); ++n) {
        double m_eta = 0.0, m_beta = 0.0, m_plain = 0.0;
        for (size_t r = 0; r < R; ++r) {
            std::vector<double> d(K);
            for (int k = 0; k < K; ++k)
                d[k] = ra.ensemble.paths[r].x[n][k] - rb.ensemble.paths[r].x[n][k];
            m_eta += frac_sq_norm(lam_eta, d);
            m_beta += frac_sq_norm(lam_beta, d);
            double s = 0.0;
            for (double v : d) s += v * v;
            m_plain += s;
        }
        m_eta /= static_cast<double>(R);
        m_beta /= static_cast<double>(R);
        m_plain /= static_cast<double>(R);
        const double w = std::pow(nodes[n], 2.0 * eta);
        const double lhs = w * (m_eta + m_beta) + m_plain;
        const double rhs = d_xi + std::pow(nodes[n], 2.0 * beta) * d_f1 + d_g;
        qvec[n] = w * (m_eta + m_beta);
        rep.rows.push_back({nodes[n], lhs, rhs});
        rep.max_lhs = std::max(rep.max_lhs, lhs);
        rep.max_rhs = std::max(rep.max_rhs, rhs);
        if (rhs > 0.0) rep.c_fit = std::max(rep.c_fit, lhs / rhs);
    }
    rep.identical_inputs_zero = (d_xi == 0.0 && d_f1 == 0.0 && d_g == 0.0 && rep.max_lhs == 0.0);

    // Comparison-lemma consistency on [a, T]: the weighted gap obeys an
    // integral inequality with kernel exponent nu = 1 - 2 eta.
    if (rep.max_rhs > 0.0 && nodes.size() > 8) {
        const size_t ia = std::max<size_t>(2, nodes.size() / 8);
        const double a = nodes[ia];
        const double T = nodes.back();
        const double pref = 4.0 * pa.f2.c_f2 * pa.f2.c_f2 * std::pow(T, 2.0 * eta + 1.0) *
                            (iota(beta) * iota(beta) * std::pow(T, 2.0 * (eta - beta)) +
                             iota(eta) * iota(eta)) *
                            std::pow(a, -2.0 * eta);
        double c_raw = 0.0;
        for (size_t n = 1; n <= ia; ++n) {
            const double rhs = d_xi + std::pow(nodes[n], 2.0 * beta) * d_f1 + d_g;
            if (rhs > 0.0) c_raw = std::max(c_raw, qvec[n] / rhs);
        }
        std::vector<double> ts, fs, ps;
        for (size_t n = ia; n < nodes.size(); ++n) {
            ts.push_back(nodes[n]);
            fs.push_back(std::max(c_raw, rep.c_fit) *
                         (d_xi + std::pow(nodes[n], 2.0 * beta) * d_f1 + d_g));
            ps.push_back(qvec[n]);
        }
        const auto gr = weighted_gronwall_prefactor(ts, fs, ps, pref, 1.0 - 2.0 * eta);
        rep.c_gronwall = gr.c_kernel * std::max(c_raw, rep.c_fit);
    }
    return rep;
}

ScalingSweepReport continuous_dependence_scaling(const SemilinearProblem& problem,
                                                 const std::vector<double>& direction,
                                                 const std::vector<double>& epsilons,
                                                 const PicardOptions& opts) {
    ScalingSweepReport rep;
    rep.epsilons = epsilons;
    const auto base = picard_iterate(problem, opts);
    const int K = problem.modes();
    for (double eps : epsilons) {
        SemilinearProblem pb = problem;
        for (int k = 0; k < K; ++k) pb.linear.xi_base[k] += eps * direction[k];
        const auto rb = picard_iterate(pb, opts);
        double worst = 0.0;
        for (size_t n = 0; n < base.ensemble.times.size(); ++n) {
            double m = 0.0;
            for (size_t r = 0; r < base.ensemble.paths.size(); ++r) {
                double s = 0.0;
                for (int k = 0; k < K; ++k) {
                    const double d =
                        base.ensemble.paths[r].x[n][k] - rb.ensemble.paths[r].x[n][k];
                    s += d * d;
                }
                m += s;
            }
            worst = std::max(worst, m / static_cast<double>(base.ensemble.paths.size()));
        }
        rep.gap_norms.push_back(std::sqrt(worst));
    }
    std::vector<double> lx, ly;
    for (size_t i = 0; i < epsilons.size(); ++i) {
        lx.push_back(std::log(epsilons[i]));
        ly.push_back(std::log(std::max(rep.gap_norms[i], 1e-300)));
    }
    rep.slope = least_squares(lx, ly).slope;
    return rep;
}

GronwallReport weighted_gronwall_prefactor(const std::vector<double>& times,
                                           const std::vector<double>& f,
                                           const std::vector<double>& phi, double prefactor,
                                           double nu_exp) {
    if (times.size() != f.size() || times.size() != phi.size() || times.size() < 2)
        throw std::invalid_argument("gronwall: sample size mismatch");
    if (prefactor < 0.0 || nu_exp <= 0.0)
        throw std::domain_error("gronwall: need prefactor >= 0 and nu > 0");
    for (size_t i = 1; i < f.size(); ++i)
        if (f[i] < f[i - 1] - 1e-12 * (1.0 + std::abs(f[i])))
            throw std::invalid_argument("gronwall: comparison function must be increasing");

    // Exact kernel mass per cell against piecewise-averaged phi.
    auto apply_kernel = [&](const std::vector<double>& v) {
        std::vector<double> out(v.size(), 0.0);
        for (size_t i = 1; i < times.size(); ++i) {
            double acc = 0.0;
            for (size_t j = 0; j + 1 <= i; ++j) {
                const double hi = std::pow(times[i] - times[j], nu_exp);
                const double lo = (j + 1 == i) ? 0.0 : std::pow(times[i] - times[j + 1], nu_exp);
                acc += 0.5 * (v[j] + v[j + 1]) * (hi - lo) / nu_exp;
            }
            out[i] = prefactor * acc;
        }
        return out;
    };

    GronwallReport rep;
    rep.premise_ok = true;
    const auto kphi = apply_kernel(phi);
    for (size_t i = 0; i < times.size(); ++i) {
        const double gap = phi[i] - (f[i] + kphi[i]);
        rep.worst_premise_gap = std::max(rep.worst_premise_gap, gap);
        if (gap > 1e-9 * (1.0 + std::abs(f[i]) + std::abs(phi[i]))) rep.premise_ok = false;
        if (f[i] > 0.0)
            rep.c_direct = std::max(rep.c_direct, phi[i] / f[i]);
        else if (phi[i] > 0.0)
            rep.c_direct = std::numeric_limits<double>::infinity();
    }
    if (!rep.premise_ok)
        throw std::invalid_argument("gronwall: premise violated on the grid (gap " +
                                    std::to_string(rep.worst_premise_gap) + ")");

    std::vector<double> total = f, term = f;
    double fmax = 0.0;
    for (double v : f) fmax = std::max(fmax, std::abs(v));
    for (int it = 0; it < 200; ++it) {
        term = apply_kernel(term);
        double tmax = 0.0;
        for (size_t i = 0; i < term.size(); ++i) {
            total[i] += term[i];
            tmax = std::max(tmax, std::abs(term[i]));
        }
        if (tmax <= 1e-14 * std::max(fmax, 1.0)) break;
        if (tmax > 1e18) {
            rep.c_kernel = std::numeric_limits<double>::infinity();
            return rep;
        }
    }
    for (size_t i = 0; i < f.size(); ++i)
        if (f[i] > 0.0) rep.c_kernel = std::max(rep.c_kernel, total[i] / f[i]);
    if (fmax == 0.0) rep.c_kernel = 0.0;
    return rep;
}

GronwallReport weighted_gronwall(const std::vector<double>& times, const std::vector<double>& f,
                                 const std::vector<double>& phi, double a, double mu,
                                 double nu_exp) {
    if (a <= 0.0) throw std::domain_error("gronwall: need a > 0");
    return weighted_gronwall_prefactor(times, f, phi, std::pow(a, -mu), nu_exp);
}

}  // namespace spdelab
