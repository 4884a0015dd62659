#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace spdelab {

struct MeanWithError {
    double mean = 0.0;
    double std_error = 0.0;
    size_t n = 0;
};

inline MeanWithError mean_with_error(const std::vector<double>& xs) {
    if (xs.empty()) throw std::invalid_argument("mean of empty sample");
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double s2 = 0.0;
    for (double x : xs) s2 += (x - m) * (x - m);
    const size_t n = xs.size();
    const double var = n > 1 ? s2 / static_cast<double>(n - 1) : 0.0;
    return {m, std::sqrt(var / static_cast<double>(n)), n};
}

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least squares needs >= 2 points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw std::invalid_argument("degenerate abscissae");
    LineFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    if (x.size() > 2) {
        double rss = 0.0;
        for (size_t i = 0; i < x.size(); ++i) {
            const double r = y[i] - f.intercept - f.slope * x[i];
            rss += r * r;
        }
        f.slope_se = std::sqrt(rss / (n - 2.0) / sxx);
    }
    return f;
}

struct JarqueBera {
    double statistic = 0.0;
    bool pass_1pct = false;  // chi^2(2) critical value 9.21034 at 1%
};

inline JarqueBera jarque_bera(const std::vector<double>& xs) {
    if (xs.size() < 8) throw std::invalid_argument("JB needs a real sample");
    const double n = static_cast<double>(xs.size());
    double m = 0.0;
    for (double x : xs) m += x;
    m /= n;
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double x : xs) {
        const double d = x - m;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    const double skew = m3 / std::pow(m2, 1.5);
    const double kurt = m4 / (m2 * m2);
    JarqueBera jb;
    jb.statistic = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
    jb.pass_1pct = jb.statistic <= 9.21034;
    return jb;
}

}  // namespace spdelab
