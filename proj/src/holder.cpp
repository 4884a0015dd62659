#include "spdelab/holder.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spdelab {

void WeightedHolderPath::validate() const {
    if (times.size() != values.size())
        throw std::invalid_argument("holder path: times/values size mismatch");
    if (times.size() < 3) throw std::invalid_argument("holder path needs >= 3 nodes");
    if (times.front() <= 0.0) throw std::invalid_argument("holder path lives on (0,T]");
    for (size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw std::invalid_argument("holder path times must be strictly increasing");
    if (times.back() > horizon * (1.0 + 1e-12))
        throw std::invalid_argument("holder path exceeds its horizon");
    if (!(beta > 0.0 && beta < 1.0)) throw std::domain_error("beta must lie in (0,1)");
    if (!(sigma > 0.0 && sigma < beta)) throw std::domain_error("sigma must lie in (0,beta)");
    const size_t k = values.front().size();
    for (const auto& v : values)
        if (v.size() != k) throw std::invalid_argument("holder path values change shape");
}

namespace {

double diff_norm(const std::vector<double>& a, const std::vector<double>& b,
                 const std::function<double(const std::vector<double>&)>& vec_norm) {
    std::vector<double> d(a.size());
    for (size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    return vec_norm(d);
}

}  // namespace

HolderNormReport holder_norm(const WeightedHolderPath& path,
                             const std::function<double(const std::vector<double>&)>& vec_norm) {
    path.validate();
    const size_t n = path.size();
    const double beta = path.beta, sigma = path.sigma;

    HolderNormReport rep;
    std::vector<double> point_norm(n);
    for (size_t i = 0; i < n; ++i) {
        point_norm[i] = vec_norm(path.values[i]);
        const double weighted = std::pow(path.times[i], 1.0 - beta) * point_norm[i];
        rep.weighted_sup = std::max(rep.weighted_sup, weighted);
    }

    // w(t_i) = sup over s = t_j < t_i of the weighted difference quotient.
    std::vector<double> modulus(n, 0.0);
    for (size_t i = 1; i < n; ++i) {
        double w = 0.0;
        for (size_t j = 0; j < i; ++j) {
            const double dn = diff_norm(path.values[i], path.values[j], vec_norm);
            const double q = std::pow(path.times[j], 1.0 - beta + sigma) * dn /
                             std::pow(path.times[i] - path.times[j], sigma);
            w = std::max(w, q);
        }
        modulus[i] = w;
        rep.weighted_seminorm = std::max(rep.weighted_seminorm, w);
    }
    rep.total = rep.weighted_sup + rep.weighted_seminorm;

    // Aitken extrapolation of g(t) = t^{1-beta} F(t) on the three smallest nodes.
    const size_t k = path.values.front().size();
    rep.limit_estimate.assign(k, 0.0);
    for (size_t c = 0; c < k; ++c) {
        const double g1 = std::pow(path.times[0], 1.0 - beta) * path.values[0][c];
        const double g2 = std::pow(path.times[1], 1.0 - beta) * path.values[1][c];
        const double g3 = std::pow(path.times[2], 1.0 - beta) * path.values[2][c];
        const double denom = (g3 - g2) - (g2 - g1);
        rep.limit_estimate[c] = std::abs(denom) > 1e-14 * (std::abs(g3) + 1.0)
                                    ? g3 - (g3 - g2) * (g3 - g2) / denom
                                    : g3;
    }

    const size_t head = std::min<size_t>(5, n - 1);
    for (size_t i = 1; i <= head; ++i)
        rep.vanishing_modulus.emplace_back(path.times[i], modulus[i]);
    rep.vanishing_trend =
        rep.vanishing_modulus.size() >= 2 &&
        rep.vanishing_modulus.front().second <=
            rep.vanishing_modulus.back().second + 1e-12 * (1.0 + rep.weighted_seminorm);
    return rep;
}

HolderNormReport holder_norm(const WeightedHolderPath& path) {
    return holder_norm(path, [](const std::vector<double>& v) { return l2_norm(v); });
}

EmbeddingReport embedding_check(const WeightedHolderPath& path, double beta_low) {
    path.validate();
    if (!(beta_low > path.sigma && beta_low < path.beta))
        throw std::domain_error("embedding exponent must lie in (sigma, beta)");
    EmbeddingReport rep;
    const auto at_beta = holder_norm(path);
    WeightedHolderPath lowered = path;
    lowered.beta = beta_low;
    const auto at_low = holder_norm(lowered);
    rep.norm_at_beta = at_beta.total;
    rep.norm_at_beta_low = at_low.total;
    rep.sup_factor_bound = std::pow(path.horizon, path.beta - beta_low) * at_beta.weighted_sup;
    rep.sup_factor_ok = at_low.weighted_sup <= rep.sup_factor_bound * (1.0 + 1e-12);
    return rep;
}

WeightedHolderPath make_forcing_power_profile(double beta, double sigma,
                                              const std::function<double(double)>& f,
                                              const std::vector<double>& direction,
                                              const std::vector<double>& grid,
                                              double horizon) {
    if (std::abs(f(0.0)) > 1e-14)
        throw std::invalid_argument("power profile requires f(0) = 0");
    WeightedHolderPath path;
    path.beta = beta;
    path.sigma = sigma;
    path.horizon = horizon;
    for (double t : grid) {
        if (t <= 0.0) continue;
        const double amp = std::pow(t, beta - 1.0) * f(t);
        std::vector<double> v(direction.size());
        for (size_t i = 0; i < direction.size(); ++i) v[i] = amp * direction[i];
        path.times.push_back(t);
        path.values.push_back(std::move(v));
    }
    path.validate();
    return path;
}

WeightedHolderPath make_forcing_sampled(double beta, double sigma,
                                        std::vector<double> times,
                                        std::vector<std::vector<double>> values,
                                        double horizon) {
    WeightedHolderPath path;
    path.beta = beta;
    path.sigma = sigma;
    path.horizon = horizon;
    path.times = std::move(times);
    path.values = std::move(values);
    path.validate();
    return path;
}

void export_path_csv(const WeightedHolderPath& path, const std::string& file) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write path file: " + file);
    char buf[32];
    for (size_t i = 0; i < path.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", path.times[i]);
        out << buf;
        for (double v : path.values[i]) {
            std::snprintf(buf, sizeof buf, "%.17g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

WeightedHolderPath import_path_csv(const std::string& file, double beta, double sigma) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open path file: " + file);
    WeightedHolderPath path;
    path.beta = beta;
    path.sigma = sigma;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double t;
        if (!(ss >> t)) continue;
        std::vector<double> v;
        double x;
        while (ss >> x) v.push_back(x);
        path.times.push_back(t);
        path.values.push_back(std::move(v));
    }
    if (path.times.empty()) throw std::runtime_error("path file has no rows: " + file);
    path.horizon = path.times.back();
    path.validate();
    return path;
}

}  // namespace spdelab
