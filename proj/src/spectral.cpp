#include "spdelab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spdelab/rng.hpp"

namespace spdelab {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

void SpectralOperator::validate() const {
    if (eigenvalues.empty()) throw std::invalid_argument("operator has no modes");
    if (eigenvalues.front() <= 0.0)
        throw std::domain_error("spectrum must be strictly positive");
    if (!std::is_sorted(eigenvalues.begin(), eigenvalues.end()))
        throw std::invalid_argument("eigenvalues must be ascending");
    if (domain_length <= 0.0) throw std::domain_error("domain length must be positive");
}

std::vector<double> synthesize(const SpectralOperator& op,
                               const std::vector<double>& coeffs, int m) {
    if (m < 2) throw std::invalid_argument("spatial grid needs at least 2 points");
    std::vector<double> u(m, 0.0);
    const double h = op.domain_length / (m - 1);
    for (int i = 0; i < m; ++i) {
        const double x = i * h;
        double s = 0.0;
        for (size_t k = 0; k < coeffs.size(); ++k)
            if (coeffs[k] != 0.0) s += coeffs[k] * op.eigenfunction(static_cast<int>(k), x);
        u[i] = s;
    }
    return u;
}

double norm(const SpectralOperator& op, const ModalVector& x) {
    if (x.flavor == NormFlavor::hilbert) return x.hilbert_norm();
    const int m = x.lp.grid_points;
    const double p = x.lp.p;
    if (p < 1.0) throw std::domain_error("lp norm needs p >= 1");
    const auto u = synthesize(op, x.coeffs, m);
    const double h = op.domain_length / (m - 1);
    double s = 0.0;
    for (int i = 0; i < m; ++i) {
        const double w = (i == 0 || i == m - 1) ? 0.5 * h : h;
        s += w * std::pow(std::abs(u[i]), p);
    }
    return std::pow(s, 1.0 / p);
}

ModalVector semigroup_apply(const SpectralOperator& op, double t, const ModalVector& x) {
    if (t < 0.0) throw std::domain_error("semigroup time must be nonnegative");
    if (x.mode_count() != op.mode_count())
        throw std::invalid_argument("semigroup_apply: mode count mismatch");
    ModalVector r = x;
    for (int k = 0; k < op.mode_count(); ++k)
        r.coeffs[k] *= std::exp(-op.eigenvalues[k] * t);
    return r;
}

ModalVector frac_power_apply(const SpectralOperator& op, double theta, const ModalVector& x) {
    if (x.mode_count() != op.mode_count())
        throw std::invalid_argument("frac_power_apply: mode count mismatch");
    ModalVector r = x;
    if (theta == 0.0) return r;
    for (int k = 0; k < op.mode_count(); ++k)
        r.coeffs[k] *= std::pow(op.eigenvalues[k], theta);
    return r;
}

double semigroup_bound_constant(double theta) {
    if (theta < 0.0)
        throw std::domain_error("iota_theta defined for theta >= 0; compose with A^{-|theta|}");
    if (theta == 0.0) return 1.0;
    return std::pow(theta / std::exp(1.0), theta);
}

SmoothingDefectReport smoothing_defect_bound_check(const SpectralOperator& op,
                                                   double theta,
                                                   const std::vector<double>& t_grid,
                                                   int trials, uint64_t seed) {
    if (theta <= 0.0 || theta > 1.0)
        throw std::domain_error("smoothing defect bound needs 0 < theta <= 1");
    const double bound_factor = semigroup_bound_constant(1.0 - theta) / theta;
    const CounterRng rng(seed);
    SmoothingDefectReport rep;
    rep.trials = trials;
    const int K = op.mode_count();
    for (int trial = 0; trial < trials; ++trial) {
        ModalVector x(std::vector<double>(K, 0.0));
        for (int k = 0; k < K; ++k)
            x.coeffs[k] = rng.normal(trial, streams::kScratch, k);
        const double nx = x.hilbert_norm();
        if (nx == 0.0) continue;
        for (double t : t_grid) {
            if (t <= 0.0) continue;
            double defect = 0.0;  // ||[S(t)-I]A^{-theta}x||
            for (int k = 0; k < K; ++k) {
                const double lam = op.eigenvalues[k];
                const double d = (std::exp(-lam * t) - 1.0) * std::pow(lam, -theta) * x.coeffs[k];
                defect += d * d;
            }
            defect = std::sqrt(defect);
            const double ratio = defect / (bound_factor * std::pow(t, theta) * nx);
            if (ratio > rep.max_ratio) {
                rep.max_ratio = ratio;
                rep.worst_t = t;
            }
        }
    }
    return rep;
}

SpectralOperator yosida_approx(const SpectralOperator& op, int n) {
    if (n <= 0) throw std::domain_error("Yosida index must be positive");
    SpectralOperator a = op;
    for (double& lam : a.eigenvalues) lam = lam / (1.0 + lam / n);
    a.name = op.name + "-yosida" + std::to_string(n);
    return a;
}

SpectralOperator make_cable_neumann(double length, int modes) {
    if (length <= 0.0) throw std::domain_error("domain length must be positive");
    if (modes < 1) throw std::invalid_argument("need at least one mode");
    SpectralOperator op;
    op.domain_length = length;
    op.name = "cable_neumann";
    op.eigenvalues.resize(modes);
    for (int k = 0; k < modes; ++k) {
        const double freq = k * kPi / length;
        op.eigenvalues[k] = 1.0 + freq * freq;
    }
    op.eigenfunction = [length](int k, double x) {
        if (k == 0) return 1.0 / std::sqrt(length);
        return std::sqrt(2.0 / length) * std::cos(k * kPi * x / length);
    };
    op.validate();
    return op;
}

SpectralOperator make_dirichlet_divform(double length, double b0, int modes) {
    if (length <= 0.0) throw std::domain_error("domain length must be positive");
    if (b0 <= 0.0) throw std::domain_error("zeroth-order coefficient must be positive");
    if (modes < 1) throw std::invalid_argument("need at least one mode");
    SpectralOperator op;
    op.domain_length = length;
    op.name = "dirichlet_divform";
    op.eigenvalues.resize(modes);
    for (int k = 0; k < modes; ++k) {
        const double freq = (k + 1) * kPi / length;
        op.eigenvalues[k] = b0 + freq * freq;
    }
    op.eigenfunction = [length](int k, double x) {
        return std::sqrt(2.0 / length) * std::sin((k + 1) * kPi * x / length);
    };
    op.validate();
    return op;
}

SpectralOperator make_whole_line_truncated(double length, int modes) {
    auto op = make_dirichlet_divform(length, 1.0, modes);
    op.name = "whole_line_truncated";
    return op;
}

SpectralOperator load_spectrum_csv(const std::string& path, double length) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open spectrum file: " + path);
    std::vector<std::pair<long, double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        long idx;
        double lam;
        if (ss >> idx >> lam) rows.emplace_back(idx, lam);
    }
    if (rows.empty()) throw std::runtime_error("spectrum file has no rows: " + path);
    std::sort(rows.begin(), rows.end());
    SpectralOperator op;
    op.domain_length = length;
    op.name = "csv:" + path;
    for (const auto& [idx, lam] : rows) op.eigenvalues.push_back(lam);
    op.eigenfunction = [length](int k, double x) {
        return std::sqrt(2.0 / length) * std::sin((k + 1) * kPi * x / length);
    };
    op.validate();
    return op;
}

}  // namespace spdelab
