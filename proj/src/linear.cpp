#include "spdelab/linear.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "spdelab/grids.hpp"

namespace spdelab {

void parallel_for(int n, int workers, const std::function<void(int)>& body) {
    if (workers <= 0) workers = static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(1, std::min(workers, n));
    if (workers == 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) body(i);
        });
    for (auto& t : pool) t.join();
}

void LinearProblem::validate(bool strict) const {
    op.validate();
    if (horizon <= 0.0) throw std::domain_error("horizon must be positive");
    if (!(f1.sigma > 0.0 && f1.sigma < f1.beta && f1.beta < 0.5))
        throw std::domain_error("forcing exponents must satisfy 0 < sigma < beta < 1/2");
    if (static_cast<int>(xi_base.size()) != modes())
        throw std::invalid_argument("initial value has wrong mode count");
    if (!xi_random_std.empty() && static_cast<int>(xi_random_std.size()) != modes())
        throw std::invalid_argument("initial-value randomness has wrong mode count");
    if (strict) {
        if (!noise.delta)
            throw std::domain_error("strict construction needs the smoothed-noise hypothesis");
        if (!(*noise.delta > 1.0 - noise.beta && *noise.delta <= 1.0))
            throw std::domain_error("smoothing exponent must lie in (1-beta, 1]");
    }
}

double LinearProblem::sq_xi() const {
    double s = 0.0;
    for (double v : xi_base) s += v * v;
    for (double v : xi_random_std) s += v * v;
    return s;
}

double LinearProblem::sq_frac_xi(double theta) const {
    double s = 0.0;
    for (int k = 0; k < modes(); ++k) {
        const double w = std::pow(op.eigenvalues[k], 2.0 * theta);
        s += w * xi_base[k] * xi_base[k];
        if (!xi_random_std.empty()) s += w * xi_random_std[k] * xi_random_std[k];
    }
    return s;
}

std::vector<double> LinearProblem::xi_for(uint32_t replica, uint64_t seed) const {
    std::vector<double> xi = xi_base;
    if (!xi_random_std.empty()) {
        const CounterRng rng(seed);
        for (int k = 0; k < modes(); ++k)
            xi[k] += xi_random_std[k] * rng.normal(replica, streams::kInitialValue + k, 0);
    }
    return xi;
}

namespace {

std::vector<double> refine_nodes(const std::vector<double>& nodes, int refine) {
    if (refine <= 1) return nodes;
    std::vector<double> fine;
    fine.reserve((nodes.size() - 1) * refine + 1);
    for (size_t j = 0; j + 1 < nodes.size(); ++j)
        for (int s = 0; s < refine; ++s)
            fine.push_back(nodes[j] + (nodes[j + 1] - nodes[j]) * s / refine);
    fine.push_back(nodes.back());
    return fine;
}

// Per-cell frozen sample of f: midpoint, or endpoint average away from the
// origin (the first cell always uses its midpoint; node 0 may be singular).
std::vector<double> cell_value(const std::function<std::vector<double>(double)>& f, double lo,
                               double hi, SolverOptions::Quadrature rule) {
    if (rule == SolverOptions::Quadrature::midpoint || lo <= 0.0) return f(0.5 * (lo + hi));
    auto a = f(lo);
    const auto b = f(hi);
    for (size_t k = 0; k < a.size(); ++k) a[k] = 0.5 * (a[k] + b[k]);
    return a;
}

}  // namespace

std::vector<std::vector<double>> deterministic_convolution(
    const SpectralOperator& op, const std::function<std::vector<double>(double)>& f,
    const std::vector<double>& nodes, int refine, SolverOptions::Quadrature rule) {
    const int K = op.mode_count();
    const auto fine = refine_nodes(nodes, refine);
    std::vector<std::vector<double>> out(nodes.size(), std::vector<double>(K, 0.0));
    std::vector<double> state(K, 0.0);
    const size_t per_coarse = (fine.size() - 1) / (nodes.size() - 1);
    for (size_t c = 0; c + 1 < fine.size(); ++c) {
        const double w = fine[c + 1] - fine[c];
        const auto fv = cell_value(f, fine[c], fine[c + 1], rule);
        for (int k = 0; k < K; ++k) {
            const double lam = op.eigenvalues[k];
            const double decay = std::exp(-lam * w);
            state[k] = decay * state[k] + fv[k] * (1.0 - decay) / lam;
        }
        if ((c + 1) % per_coarse == 0) out[(c + 1) / per_coarse] = state;
    }
    return out;
}

StochasticConvolution stochastic_convolution(const SpectralOperator& op, const NoiseTerm& noise,
                                             const std::vector<double>& nodes, int refine,
                                             const WienerSource& w) {
    const int K = op.mode_count();
    const auto fine = refine_nodes(nodes, refine);
    const auto& master = w.grid();
    if (!is_nested_refinement(fine, master))
        throw std::invalid_argument("master grid must be a nested refinement of the solver grid");
    const size_t sub = (master.size() - 1) / (fine.size() - 1);

    StochasticConvolution out;
    out.i2.assign(nodes.size(), std::vector<double>(K, 0.0));
    out.int_g_dw.assign(nodes.size(), std::vector<double>(K, 0.0));
    std::vector<double> state(K, 0.0), running(K, 0.0);
    const size_t per_coarse = (fine.size() - 1) / (nodes.size() - 1);
    for (size_t c = 0; c + 1 < fine.size(); ++c) {
        const auto g = noise.eval(0.5 * (fine[c] + fine[c + 1]));
        for (size_t s = 0; s < sub; ++s) {
            const size_t m = c * sub + s;
            const double dt = master[m + 1] - master[m];
            for (int k = 0; k < K; ++k) {
                const auto step = ou_convolution_step(op.eigenvalues[k], g[k], dt, state[k],
                                                      w.dw(static_cast<int>(m), k) / std::sqrt(dt),
                                                      w.bridge_z(static_cast<int>(m), k));
                state[k] = step.new_state;
                running[k] += g[k] * step.brownian_increment;
            }
        }
        if ((c + 1) % per_coarse == 0) {
            const size_t n = (c + 1) / per_coarse;
            out.i2[n] = state;
            out.int_g_dw[n] = running;
        }
    }
    return out;
}

namespace {

// Defect-split evaluation of A I1 at the requested nodes:
//   A S(t) xi  +  int A S(t-s)[f(s) - f(t)] ds  +  [I - S(t)] f(t),
// which keeps the convolution integrand integrable up to s = t.
std::vector<std::vector<double>> a_i1_split(const SpectralOperator& op, const ForcingTerm& f1,
                                            const std::vector<double>& nodes, int refine,
                                            SolverOptions::Quadrature rule) {
    const int K = op.mode_count();
    std::vector<std::vector<double>> out(nodes.size(), std::vector<double>(K, 0.0));
    if (f1.is_zero) return out;
    const auto fine = refine_nodes(nodes, refine);
    std::vector<std::vector<double>> cell_f(fine.size() - 1);
    for (size_t c = 0; c + 1 < fine.size(); ++c)
        cell_f[c] = cell_value(f1.eval, fine[c], fine[c + 1], rule);
    const size_t per_coarse = (fine.size() - 1) / (nodes.size() - 1);
    for (size_t n = 1; n < nodes.size(); ++n) {
        const double t = nodes[n];
        const auto ft = f1.eval(t);
        auto& row = out[n];
        for (int k = 0; k < K; ++k) {
            const double lam = op.eigenvalues[k];
            double acc = 0.0;
            for (size_t c = 0; c < n * per_coarse; ++c) {
                const double e_hi = std::exp(-lam * (t - fine[c + 1]));
                const double e_lo = std::exp(-lam * (t - fine[c]));
                acc += (cell_f[c][k] - ft[k]) * (e_hi - e_lo);
            }
            row[k] = acc + (1.0 - std::exp(-lam * t)) * ft[k];
        }
    }
    return out;
}

}  // namespace

SolutionEnsemble solve_linear_with_increments(const LinearProblem& problem,
                                              const SolverOptions& opts,
                                              const std::vector<std::vector<double>>& dw_rows) {
    problem.validate(opts.strict);
    if (!dw_rows.empty() && dw_rows.size() < static_cast<size_t>(opts.replicas))
        throw std::invalid_argument("replay increments cover fewer replicas than requested");
    const int K = problem.modes();
    const auto nodes = graded_grid(problem.horizon, opts.n_cells, opts.grading);
    const auto fine = refine_nodes(nodes, opts.refine);
    const auto master = refine_nodes(fine, opts.master_factor);

    const auto conv_x = problem.f1.is_zero
                            ? std::vector<std::vector<double>>(nodes.size(), std::vector<double>(K, 0.0))
                            : deterministic_convolution(problem.op, problem.f1.eval, nodes,
                                                        opts.refine, opts.quadrature);
    std::vector<std::vector<double>> conv_ax;
    if (opts.strict) conv_ax = a_i1_split(problem.op, problem.f1, nodes, opts.refine, opts.quadrature);

    SolutionEnsemble ens;
    ens.times = nodes;
    ens.seed = opts.seed;
    ens.paths.resize(opts.replicas);

    parallel_for(opts.replicas, opts.workers, [&](int r) {
        SolutionPath path;
        path.replica = static_cast<uint32_t>(r);
        path.times = nodes;
        path.xi = problem.xi_for(static_cast<uint32_t>(r), opts.seed);
        const WienerSource w =
            dw_rows.empty()
                ? WienerSource(master, K, opts.seed, static_cast<uint32_t>(r))
                : WienerSource(master, K, opts.seed, static_cast<uint32_t>(r), dw_rows[r]);
        StochasticConvolution sc;
        if (problem.noise.is_zero) {
            sc.i2.assign(nodes.size(), std::vector<double>(K, 0.0));
            sc.int_g_dw.assign(nodes.size(), std::vector<double>(K, 0.0));
        } else {
            sc = stochastic_convolution(problem.op, problem.noise, nodes, opts.refine, w);
        }
        path.i2 = std::move(sc.i2);
        path.int_g_dw = std::move(sc.int_g_dw);
        path.x.assign(nodes.size(), std::vector<double>(K, 0.0));
        if (opts.strict) path.ax.assign(nodes.size(), std::vector<double>(K, 0.0));
        for (size_t n = 0; n < nodes.size(); ++n) {
            for (int k = 0; k < K; ++k) {
                const double lam = problem.op.eigenvalues[k];
                const double sxi = std::exp(-lam * nodes[n]) * path.xi[k];
                path.x[n][k] = sxi + conv_x[n][k] + path.i2[n][k];
                if (opts.strict)
                    path.ax[n][k] = lam * sxi + conv_ax[n][k] + lam * path.i2[n][k];
            }
        }
        for (double theta : opts.theta_list) {
            std::vector<std::vector<double>> p(nodes.size(), std::vector<double>(K, 0.0));
            for (size_t n = 0; n < nodes.size(); ++n)
                for (int k = 0; k < K; ++k)
                    p[n][k] = std::pow(problem.op.eigenvalues[k], theta) * path.x[n][k];
            path.frac.emplace_back(theta, std::move(p));
        }
        if (!opts.keep_i2) {
            path.i2.clear();
            path.i2.shrink_to_fit();
        }
        if (!opts.keep_int_g_dw) {
            path.int_g_dw.clear();
            path.int_g_dw.shrink_to_fit();
        }
        ens.paths[r] = std::move(path);
    });
    return ens;
}

SolutionEnsemble solve_linear(const LinearProblem& problem, const SolverOptions& opts) {
    if (opts.replay) return solve_linear_with_increments(problem, opts, *opts.replay);
    return solve_linear_with_increments(problem, opts, {});
}

double strict_residual(const LinearProblem& problem, const SolutionPath& path) {
    if (path.ax.empty()) throw std::invalid_argument("strict residual needs the A X path");
    if (path.int_g_dw.empty())
        throw std::invalid_argument("strict residual needs the coupled Brownian integral");
    const int K = problem.modes();
    const size_t n = path.times.size();

    // Per-mode cumulative integrals; the A X and forcing samples blow up like
    // a power at the origin, handled by the fitted first cell.
    std::vector<std::vector<double>> int_ax(K), int_f1(K);
    std::vector<double> series(n, 0.0);
    for (int k = 0; k < K; ++k) {
        for (size_t i = 0; i < n; ++i) series[i] = path.ax[i][k];
        int_ax[k] = cumulative_integral_singular(path.times, series);
    }
    if (!problem.f1.is_zero) {
        std::vector<double> fk(n, 0.0);
        for (int k = 0; k < K; ++k) {
            fk[0] = 0.0;
            for (size_t i = 1; i < n; ++i) fk[i] = problem.f1.eval(path.times[i])[k];
            int_f1[k] = cumulative_integral_singular(path.times, fk);
        }
    }
    double worst = 0.0;
    for (size_t i = 1; i < n; ++i) {
        double sq = 0.0;
        for (int k = 0; k < K; ++k) {
            double r = path.x[i][k] + int_ax[k][i] - path.xi[k] - path.int_g_dw[i][k];
            if (!problem.f1.is_zero) r -= int_f1[k][i];
            sq += r * r;
        }
        worst = std::max(worst, std::sqrt(sq));
    }
    return worst;
}

double mild_residual(const LinearProblem& problem, const SolverOptions& opts) {
    SolverOptions base = opts;
    base.replicas = 1;
    base.replay = nullptr;
    base.master_factor = 2 * opts.master_factor;
    SolverOptions refined = base;
    refined.refine = 2 * opts.refine;
    refined.master_factor = opts.master_factor;
    const auto a = solve_linear(problem, base);
    const auto b = solve_linear(problem, refined);
    double worst = 0.0;
    for (size_t i = 0; i < a.times.size(); ++i) {
        double sq = 0.0;
        for (int k = 0; k < problem.modes(); ++k) {
            const double d = a.paths[0].x[i][k] - b.paths[0].x[i][k];
            sq += d * d;
        }
        worst = std::max(worst, std::sqrt(sq));
    }
    return worst;
}

UniquenessReport uniqueness_probe(const LinearProblem& problem, const SolverOptions& opts) {
    SolverOptions a = opts;
    a.replicas = 1;
    a.replay = nullptr;
    a.quadrature = SolverOptions::Quadrature::midpoint;
    SolverOptions b = a;
    b.quadrature = SolverOptions::Quadrature::endpoint_average;
    const auto ea = solve_linear(problem, a);
    const auto eb = solve_linear(problem, b);
    UniquenessReport rep;
    for (size_t i = 0; i < ea.times.size(); ++i) {
        double sq = 0.0;
        for (int k = 0; k < problem.modes(); ++k) {
            const double d = ea.paths[0].x[i][k] - eb.paths[0].x[i][k];
            sq += d * d;
        }
        rep.max_gap = std::max(rep.max_gap, std::sqrt(sq));
    }
    if (opts.strict) {
        rep.residual_a = strict_residual(problem, ea.paths[0]);
        rep.residual_b = strict_residual(problem, eb.paths[0]);
    }
    return rep;
}

EstimateInputs make_estimate_inputs(const LinearProblem& problem) {
    EstimateInputs in;
    in.beta = problem.f1.beta;
    in.sigma = problem.f1.sigma;
    in.delta = problem.noise.delta.value_or(0.0);
    in.nu = problem.op.nu();
    in.lambda1 = problem.op.eigenvalues.front();
    in.c_mtype = 1.0;
    in.sq_xi = problem.sq_xi();
    in.sq_frac_xi = problem.sq_frac_xi(problem.f1.beta);
    in.sq_f1 = problem.f1.sq_holder_norm;
    in.sq_g_smoothed = problem.noise.sq_holder_norm_smoothed;
    return in;
}

}  // namespace spdelab
