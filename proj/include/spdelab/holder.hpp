#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spdelab/modal.hpp"

namespace spdelab {

// Time-sampled element of the weighted Holder space on (0,T]: pointwise size
// tempered by t^{1-beta}, increments sigma-Holder with weight s^{1-beta+sigma},
// and modulus w(t) -> 0 at the origin. Values are coefficient vectors (modal
// coordinates, or flattened matrices measured in Hilbert-Schmidt norm).
struct WeightedHolderPath {
    std::vector<double> times;                // strictly increasing, in (0, T]
    std::vector<std::vector<double>> values;  // one vector per node
    double beta = 0.0;   // in (0,1)
    double sigma = 0.0;  // in (0,beta)
    double horizon = 0.0;
    NormFlavor flavor = NormFlavor::hilbert;

    void validate() const;
    size_t size() const { return times.size(); }
};

struct HolderNormReport {
    double weighted_sup = 0.0;       // sup_t t^{1-beta} ||F(t)||
    double weighted_seminorm = 0.0;  // sup_{s<t} s^{1-beta+sigma} ||F(t)-F(s)|| / (t-s)^sigma
    double total = 0.0;              // their sum
    std::vector<double> limit_estimate;  // extrapolated limit of t^{1-beta} F(t) at 0
    // modulus w(t) on the five smallest nodes, pairs (t, w)
    std::vector<std::pair<double, double>> vanishing_modulus;
    bool vanishing_trend = false;  // w decreases toward the origin
};

// Grid suprema are exhaustive O(N^2) pair sweeps; they approximate the
// continuum suprema from below, so refine-and-compare (N vs 2N) when the
// value matters.
HolderNormReport holder_norm(const WeightedHolderPath& path,
                             const std::function<double(const std::vector<double>&)>& vec_norm);
HolderNormReport holder_norm(const WeightedHolderPath& path);  // hilbert values

struct EmbeddingReport {
    double norm_at_beta = 0.0;
    double norm_at_beta_low = 0.0;
    // pointwise factor check of weighted_sup(beta_low) <= T^{beta-beta_low} weighted_sup(beta)
    double sup_factor_bound = 0.0;
    bool sup_factor_ok = false;
};

// Same samples measured in the weaker space with exponent beta_low (Eq-style
// inclusion of the finer space into the coarser).
EmbeddingReport embedding_check(const WeightedHolderPath& path, double beta_low);

// F(t) = t^{beta-1} f(t) * direction, the canonical member of the space;
// rejects profiles with f(0) != 0.
WeightedHolderPath make_forcing_power_profile(double beta, double sigma,
                                              const std::function<double(double)>& f,
                                              const std::vector<double>& direction,
                                              const std::vector<double>& grid,
                                              double horizon);

WeightedHolderPath make_forcing_sampled(double beta, double sigma,
                                        std::vector<double> times,
                                        std::vector<std::vector<double>> values,
                                        double horizon);

// CSV layout: column 1 time, columns 2..K+1 coefficients.
void export_path_csv(const WeightedHolderPath& path, const std::string& file);
WeightedHolderPath import_path_csv(const std::string& file, double beta, double sigma);

}  // namespace spdelab
