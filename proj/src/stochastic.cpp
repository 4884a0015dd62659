#include "spdelab/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spdelab/grids.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

WienerSource::WienerSource(std::vector<double> grid, int h_modes, uint64_t seed, uint32_t replica)
    : grid_(std::move(grid)), h_modes_(h_modes), seed_(seed), replica_(replica) {
    if (grid_.size() < 2) throw std::invalid_argument("wiener grid needs >= 2 nodes");
    const int n = steps();
    dw_.resize(static_cast<size_t>(n) * h_modes_);
    z2_.resize(dw_.size());
    const CounterRng rng(seed_);
    for (int j = 0; j < n; ++j) {
        const double sdt = std::sqrt(grid_[j + 1] - grid_[j]);
        for (int m = 0; m < h_modes_; ++m) {
            const auto z = rng.normal_pair(replica_, streams::kWienerBase + m, j);
            dw_[static_cast<size_t>(j) * h_modes_ + m] = sdt * z.z1;
            z2_[static_cast<size_t>(j) * h_modes_ + m] = z.z2;
        }
    }
}

WienerSource::WienerSource(std::vector<double> grid, int h_modes, uint64_t seed, uint32_t replica,
                           std::vector<double> dw_by_step_mode)
    : grid_(std::move(grid)), h_modes_(h_modes), seed_(seed), replica_(replica),
      dw_(std::move(dw_by_step_mode)) {
    const int n = steps();
    if (dw_.size() != static_cast<size_t>(n) * h_modes_)
        throw std::invalid_argument("supplied increments do not match grid/mode shape");
    z2_.resize(dw_.size());
    const CounterRng rng(seed_);
    for (int j = 0; j < n; ++j)
        for (int m = 0; m < h_modes_; ++m)
            z2_[static_cast<size_t>(j) * h_modes_ + m] =
                rng.normal_pair(replica_, streams::kWienerBase + m, j).z2;
}

int NoiseOperatorPath::h_modes() const {
    if (diagonal) return diag.empty() ? 0 : static_cast<int>(diag.front().size());
    return mats.empty() ? 0 : mats.front().cols;
}

void NoiseOperatorPath::validate() const {
    if (grid.size() < 2) throw std::invalid_argument("noise grid needs >= 2 nodes");
    const size_t n = grid.size() - 1;
    if (diagonal) {
        if (diag.size() != n) throw std::invalid_argument("noise cells do not match grid");
    } else {
        if (mats.size() != n) throw std::invalid_argument("noise cells do not match grid");
    }
    if (!(beta > 0.0 && beta < 0.5)) throw std::domain_error("noise beta must lie in (0,1/2)");
    if (delta && !(*delta > 1.0 - beta && *delta <= 1.0))
        throw std::domain_error("smoothing exponent must lie in (1-beta, 1]");
}

double NoiseOperatorPath::hs_norm(int cell) const {
    double s = 0.0;
    if (diagonal) {
        for (double v : diag[cell]) s += v * v;
    } else {
        for (double v : mats[cell].a) s += v * v;
    }
    return std::sqrt(s);
}

NoiseOperatorPath make_diagonal_noise(const std::vector<double>& grid,
                                      const std::function<std::vector<double>(double)>& eval,
                                      std::optional<double> delta, double beta, double sigma) {
    NoiseOperatorPath g;
    g.grid = grid;
    g.diagonal = true;
    g.delta = delta;
    g.beta = beta;
    g.sigma = sigma;
    g.diag.reserve(grid.size() - 1);
    for (size_t j = 0; j + 1 < grid.size(); ++j)
        g.diag.push_back(eval(0.5 * (grid[j] + grid[j + 1])));
    g.validate();
    return g;
}

WeightedHolderPath smoothed_noise_path(const SpectralOperator& op, const NoiseOperatorPath& g) {
    g.validate();
    if (!g.diagonal) throw std::invalid_argument("smoothed noise path needs the diagonal fast path");
    const double d = g.delta.value_or(0.0);
    WeightedHolderPath path;
    path.beta = g.beta + 0.5;
    path.sigma = g.sigma;
    path.horizon = g.grid.back();
    for (int j = 0; j < g.cells(); ++j) {
        std::vector<double> v(g.diag[j].size());
        for (size_t k = 0; k < v.size(); ++k)
            v[k] = std::pow(op.eigenvalues[k], d) * g.diag[j][k];
        path.times.push_back(0.5 * (g.grid[j] + g.grid[j + 1]));
        path.values.push_back(std::move(v));
    }
    path.validate();
    return path;
}

GammaNormResult gamma_norm(const RowMatrix& map, NormFlavor flavor, const SpectralOperator& op,
                           LpSpec lp, int mc_samples, uint64_t seed) {
    if (map.rows == 0 || map.cols == 0) throw std::invalid_argument("gamma norm of empty map");
    if (flavor == NormFlavor::hilbert) {
        double s = 0.0;
        for (double v : map.a) s += v * v;
        return {std::sqrt(s), 0.0};
    }
    if (mc_samples < 100) throw std::invalid_argument("lp gamma norm needs >= 100 samples");
    const CounterRng rng(seed);
    std::vector<double> sq(mc_samples);
    for (int r = 0; r < mc_samples; ++r) {
        std::vector<double> image(map.rows, 0.0);
        for (int n = 0; n < map.cols; ++n) {
            const double gaussian = rng.normal(r, streams::kScratch, n);
            for (int k = 0; k < map.rows; ++k) image[k] += gaussian * map.at(k, n);
        }
        const double nv = norm(op, ModalVector(std::move(image), NormFlavor::lp, lp));
        sq[r] = nv * nv;
    }
    const auto m = mean_with_error(sq);
    const double value = std::sqrt(std::max(m.mean, 0.0));
    const double se = value > 0.0 ? m.std_error / (2.0 * value) : std::sqrt(m.std_error);
    return {value, se};
}

double operator_norm_power_iteration(const RowMatrix& m, double tol) {
    if (m.rows != m.cols) throw std::invalid_argument("power iteration expects a square map");
    const int n = m.rows;
    std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n))), w(n), u(n);
    double prev = 0.0;
    for (int it = 0; it < 10000; ++it) {
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += m.at(i, j) * v[j];
            w[i] = s;
        }
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += m.at(i, j) * w[i];
            u[j] = s;
        }
        double nu_ = l2_norm(u);
        if (nu_ == 0.0) return 0.0;
        for (double& x : u) x /= nu_;
        const double est = std::sqrt(nu_);
        if (std::abs(est - prev) <= tol * std::max(1.0, est)) return est;
        prev = est;
        v = u;
    }
    return prev;
}

SubmultReport gamma_submultiplicativity_check(const RowMatrix& phi1, const RowMatrix& phi2,
                                              int trials, NormFlavor flavor,
                                              const SpectralOperator& op, uint64_t seed) {
    if (phi1.cols != phi2.rows) throw std::invalid_argument("phi1 phi2 shape mismatch");
    SubmultReport rep;
    rep.trials = trials;
    const CounterRng rng(seed);
    for (int t = 0; t < trials; ++t) {
        RowMatrix a = phi1, b = phi2;
        if (t > 0) {  // trial 0 checks the supplied pair verbatim
            for (size_t i = 0; i < a.a.size(); ++i)
                a.a[i] = rng.normal(t, streams::kScratch, static_cast<uint32_t>(i));
            for (size_t i = 0; i < b.a.size(); ++i)
                b.a[i] = rng.normal(t, streams::kScratch + 1, static_cast<uint32_t>(i));
        }
        RowMatrix prod(a.rows, b.cols);
        for (int i = 0; i < a.rows; ++i)
            for (int j = 0; j < b.cols; ++j) {
                double s = 0.0;
                for (int k = 0; k < a.cols; ++k) s += a.at(i, k) * b.at(k, j);
                prod.at(i, j) = s;
            }
        double op_norm, slack = 0.0;
        GammaNormResult lhs, rhs;
        if (flavor == NormFlavor::hilbert) {
            op_norm = operator_norm_power_iteration(a);
            lhs = gamma_norm(prod, flavor, op);
            rhs = gamma_norm(b, flavor, op);
            slack = 1e-9 * (1.0 + rhs.value * op_norm);
        } else {
            // Estimated induced norm (random-direction search) plus joint MC error.
            op_norm = 0.0;
            for (int probe = 0; probe < 256; ++probe) {
                std::vector<double> x(a.cols);
                for (int k = 0; k < a.cols; ++k)
                    x[k] = rng.normal(t, streams::kScratch + 2, probe * a.cols + k);
                std::vector<double> ax(a.rows, 0.0);
                for (int i = 0; i < a.rows; ++i)
                    for (int k = 0; k < a.cols; ++k) ax[i] += a.at(i, k) * x[k];
                const double nx = norm(op, ModalVector(x, NormFlavor::lp));
                if (nx == 0.0) continue;
                op_norm = std::max(op_norm, norm(op, ModalVector(ax, NormFlavor::lp)) / nx);
            }
            lhs = gamma_norm(prod, flavor, op, {}, 2000, seed + 17 * t);
            rhs = gamma_norm(b, flavor, op, {}, 2000, seed + 17 * t + 7);
            slack = 3.0 * (lhs.std_error + op_norm * rhs.std_error);
        }
        const double margin = lhs.value - (op_norm * rhs.value + slack);
        rep.worst_margin = std::max(rep.worst_margin, margin);
        if (margin > 0.0) ++rep.failures;
    }
    return rep;
}

HsEmbeddingReport hs_embedding_demo(int n_modes) {
    if (n_modes < 1) throw std::invalid_argument("embedding demo needs >= 1 mode");
    HsEmbeddingReport rep;
    rep.mode_eigenvalues.resize(n_modes);
    for (int m = 1; m <= n_modes; ++m) {
        rep.mode_eigenvalues[m - 1] = 1.0 / (static_cast<double>(m) * m);
        rep.partial_trace += rep.mode_eigenvalues[m - 1];
    }
    // Materialized check of diagonality on a small truncation.
    const int n = std::min(n_modes, 64);
    RowMatrix jj(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            if (i == j) s = 1.0 / (static_cast<double>(i + 1) * (i + 1));
            jj.at(i, j) = s;
            if (i != j) rep.max_offdiagonal = std::max(rep.max_offdiagonal, std::abs(s));
        }
    return rep;
}

std::vector<std::vector<double>> ito_integral(const NoiseOperatorPath& g, const WienerSource& w) {
    g.validate();
    if (g.grid.size() != w.grid().size())
        throw std::invalid_argument("ito integral: grids do not coincide");
    for (size_t j = 0; j < g.grid.size(); ++j)
        if (std::abs(g.grid[j] - w.grid()[j]) > 1e-12)
            throw std::invalid_argument("ito integral: grids do not coincide");
    const int modes = g.diagonal ? g.h_modes() : g.mats.front().rows;
    if (g.h_modes() > w.h_modes())
        throw std::invalid_argument("ito integral: more noise columns than Wiener modes");
    std::vector<std::vector<double>> out(g.grid.size(), std::vector<double>(modes, 0.0));
    for (int j = 0; j < g.cells(); ++j) {
        out[j + 1] = out[j];
        if (g.diagonal) {
            for (int k = 0; k < modes; ++k) out[j + 1][k] += g.diag[j][k] * w.dw(j, k);
        } else {
            for (int k = 0; k < modes; ++k) {
                double s = 0.0;
                for (int n = 0; n < g.mats[j].cols; ++n) s += g.mats[j].at(k, n) * w.dw(j, n);
                out[j + 1][k] += s;
            }
        }
    }
    return out;
}

double ou_noise_variance(double lambda, double dt) {
    if (lambda <= 0.0) throw std::domain_error("ou rate must be positive");
    return -std::expm1(-2.0 * lambda * dt) / (2.0 * lambda);
}

double ou_brownian_covariance(double lambda, double dt) {
    if (lambda <= 0.0) throw std::domain_error("ou rate must be positive");
    return -std::expm1(-lambda * dt) / lambda;
}

OuStep ou_convolution_step(double lambda, double g, double dt, double state, double z1, double z2) {
    if (lambda <= 0.0) throw std::domain_error("ou rate must be positive");
    if (dt <= 0.0) throw std::domain_error("ou step must be positive");
    const double var_xi = ou_noise_variance(lambda, dt);
    const double cov = ou_brownian_covariance(lambda, dt);
    const double sd_xi = std::sqrt(var_xi);
    const double corr = cov / (std::sqrt(dt) * sd_xi);
    const double ortho = std::sqrt(std::max(0.0, 1.0 - corr * corr));
    const double xi = sd_xi * (corr * z1 + ortho * z2);
    OuStep s;
    s.brownian_increment = std::sqrt(dt) * z1;
    s.new_state = std::exp(-lambda * dt) * state + g * xi;
    return s;
}

OuStep ou_convolution_step(double lambda, double g, double dt, double state, const CounterRng& rng,
                           uint32_t replica, uint32_t stream, uint32_t step) {
    const auto z = rng.normal_pair(replica, stream, step);
    return ou_convolution_step(lambda, g, dt, state, z.z1, z.z2);
}

void export_increments_csv(const std::vector<WienerSource>& sources, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write increments file: " + file);
    out << "replica,step,mode,value\n";
    char buf[32];
    for (const auto& w : sources)
        for (int j = 0; j < w.steps(); ++j)
            for (int m = 0; m < w.h_modes(); ++m) {
                std::snprintf(buf, sizeof buf, "%.17g", w.dw(j, m));
                out << w.replica() << ',' << j << ',' << m << ',' << buf << '\n';
            }
}

std::vector<std::vector<double>> import_increments_csv(const std::string& file, int steps,
                                                       int h_modes, int replicas) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open increments file: " + file);
    std::vector<std::vector<double>> dw(replicas,
                                        std::vector<double>(static_cast<size_t>(steps) * h_modes));
    std::vector<std::vector<char>> seen(replicas,
                                        std::vector<char>(static_cast<size_t>(steps) * h_modes, 0));
    std::string line;
    bool header_skipped = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (!header_skipped && line.find("replica") != std::string::npos) {
            header_skipped = true;
            continue;
        }
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        long r, j, m;
        double v;
        if (!(ss >> r >> j >> m >> v))
            throw std::runtime_error("malformed increments row: " + line);
        if (r < 0 || r >= replicas || j < 0 || j >= steps || m < 0 || m >= h_modes)
            throw std::runtime_error("increments row out of range: " + line);
        dw[r][static_cast<size_t>(j) * h_modes + m] = v;
        seen[r][static_cast<size_t>(j) * h_modes + m] = 1;
    }
    for (int r = 0; r < replicas; ++r)
        for (const char s : seen[r])
            if (!s) throw std::runtime_error("increments file does not cover grid/mode shape");
    return dw;
}

}  // namespace spdelab
