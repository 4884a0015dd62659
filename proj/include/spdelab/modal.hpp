#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdelab {

enum class NormFlavor { hilbert, lp };

// Parameters of the discrete L^p norm: the function is synthesized on a
// uniform spatial grid of grid_points nodes and integrated with trapezoid
// weights.
struct LpSpec {
    double p = 2.0;
    int grid_points = 256;
};

// Element of the state space E in truncated eigenbasis coordinates.
struct ModalVector {
    std::vector<double> coeffs;
    NormFlavor flavor = NormFlavor::hilbert;
    LpSpec lp{};

    ModalVector() = default;
    explicit ModalVector(std::vector<double> c, NormFlavor f = NormFlavor::hilbert,
                         LpSpec spec = {})
        : coeffs(std::move(c)), flavor(f), lp(spec) {}

    int mode_count() const { return static_cast<int>(coeffs.size()); }

    double hilbert_norm() const {
        double s = 0.0;
        for (double c : coeffs) s += c * c;
        return std::sqrt(s);
    }
};

inline void require_same_shape(const ModalVector& a, const ModalVector& b,
                               const char* where) {
    if (a.coeffs.size() != b.coeffs.size())
        throw std::invalid_argument(std::string(where) + ": mode count mismatch (" +
                                    std::to_string(a.coeffs.size()) + " vs " +
                                    std::to_string(b.coeffs.size()) + ")");
    if (a.flavor != b.flavor)
        throw std::invalid_argument(std::string(where) + ": norm flavor mismatch");
}

inline ModalVector operator+(const ModalVector& a, const ModalVector& b) {
    require_same_shape(a, b, "ModalVector::operator+");
    ModalVector r = a;
    for (size_t k = 0; k < r.coeffs.size(); ++k) r.coeffs[k] += b.coeffs[k];
    return r;
}

inline ModalVector operator-(const ModalVector& a, const ModalVector& b) {
    require_same_shape(a, b, "ModalVector::operator-");
    ModalVector r = a;
    for (size_t k = 0; k < r.coeffs.size(); ++k) r.coeffs[k] -= b.coeffs[k];
    return r;
}

inline ModalVector operator*(double c, const ModalVector& a) {
    ModalVector r = a;
    for (double& v : r.coeffs) v *= c;
    return r;
}

inline double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double c : v) s += c * c;
    return std::sqrt(s);
}

}  // namespace spdelab
