#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace spdelab {

// Graded time grid t_j = T (j/n)^r, j = 0..n. Grading r >= 1 resolves the
// t^{beta-1} blow-up of weighted-Holder data near t = 0.
inline std::vector<double> graded_grid(double horizon, int n, double r = 2.0) {
    if (horizon <= 0.0) throw std::domain_error("horizon must be positive");
    if (n < 1) throw std::invalid_argument("grid needs at least one cell");
    if (r < 1.0) throw std::domain_error("grading exponent must be >= 1");
    std::vector<double> t(n + 1);
    for (int j = 0; j <= n; ++j) t[j] = horizon * std::pow(static_cast<double>(j) / n, r);
    t[n] = horizon;
    return t;
}

inline std::vector<double> cell_midpoints(const std::vector<double>& nodes) {
    std::vector<double> m(nodes.size() - 1);
    for (size_t j = 0; j + 1 < nodes.size(); ++j) m[j] = 0.5 * (nodes[j] + nodes[j + 1]);
    return m;
}

// Cumulative trapezoid: out[j] = integral over [t_0, t_j].
inline std::vector<double> cumulative_trapezoid(const std::vector<double>& t,
                                                const std::vector<double>& v) {
    if (t.size() != v.size()) throw std::invalid_argument("trapezoid: size mismatch");
    std::vector<double> out(t.size(), 0.0);
    for (size_t j = 1; j < t.size(); ++j)
        out[j] = out[j - 1] + 0.5 * (v[j] + v[j - 1]) * (t[j] - t[j - 1]);
    return out;
}

// Cumulative integral from 0 of a sample that may blow up like s^p, p > -1,
// at s = 0. The first cell [0, t_1] is integrated from a two-point power-law
// fit through the first interior nodes (v_0 is never used); trapezoid after.
// Falls back to a one-sided rectangle when the fit is not meaningful.
inline std::vector<double> cumulative_integral_singular(const std::vector<double>& t,
                                                        const std::vector<double>& v) {
    if (t.size() != v.size() || t.size() < 3)
        throw std::invalid_argument("singular integral needs >= 3 nodes");
    if (t.front() != 0.0) throw std::invalid_argument("grid must start at 0");
    std::vector<double> out(t.size(), 0.0);
    const double v1 = v[1], v2 = v[2];
    double first;
    if (v1 != 0.0 && v2 != 0.0 && (v1 > 0.0) == (v2 > 0.0) && t[1] > 0.0 && t[2] > t[1]) {
        double p = std::log(std::abs(v2) / std::abs(v1)) / std::log(t[2] / t[1]);
        p = std::max(-0.99, std::min(p, 6.0));
        // integral of c s^p over [0, t1] with c = v1 / t1^p
        first = v1 * t[1] / (p + 1.0);
    } else {
        first = v1 * t[1];
    }
    out[1] = first;
    for (size_t j = 2; j < t.size(); ++j)
        out[j] = out[j - 1] + 0.5 * (v[j] + v[j - 1]) * (t[j] - t[j - 1]);
    return out;
}

// True when `coarse` is a subsequence of `fine` obtained by keeping every
// (fine_cells/coarse_cells)-th node; used for nested-refinement coupling.
inline bool is_nested_refinement(const std::vector<double>& coarse,
                                 const std::vector<double>& fine) {
    if ((fine.size() - 1) % (coarse.size() - 1) != 0) return false;
    const size_t m = (fine.size() - 1) / (coarse.size() - 1);
    for (size_t j = 0; j < coarse.size(); ++j)
        if (std::abs(fine[j * m] - coarse[j]) > 1e-12 * std::max(1.0, std::abs(coarse[j])))
            return false;
    return true;
}

}  // namespace spdelab
