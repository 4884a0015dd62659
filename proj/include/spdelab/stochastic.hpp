#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spdelab/holder.hpp"
#include "spdelab/modal.hpp"
#include "spdelab/rng.hpp"
#include "spdelab/spectral.hpp"

namespace spdelab {

struct RowMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;  // row-major

    RowMatrix() = default;
    RowMatrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}
    double& at(int r, int c) { return a[static_cast<size_t>(r) * cols + c]; }
    double at(int r, int c) const { return a[static_cast<size_t>(r) * cols + c]; }
};

// Brownian increments of one replica on a master grid, plus the orthogonal
// bridge draws used by exact convolution sampling. RNG-backed by counters;
// a file-backed source keeps the supplied increments and regenerates only
// the bridge draws from the seed, so export-then-replay is bit-identical.
class WienerSource {
public:
    WienerSource(std::vector<double> grid, int h_modes, uint64_t seed, uint32_t replica);
    WienerSource(std::vector<double> grid, int h_modes, uint64_t seed, uint32_t replica,
                 std::vector<double> dw_by_step_mode);

    const std::vector<double>& grid() const { return grid_; }
    int steps() const { return static_cast<int>(grid_.size()) - 1; }
    int h_modes() const { return h_modes_; }
    uint32_t replica() const { return replica_; }
    uint64_t seed() const { return seed_; }

    double dw(int step, int mode) const { return dw_[static_cast<size_t>(step) * h_modes_ + mode]; }
    double bridge_z(int step, int mode) const {
        return z2_[static_cast<size_t>(step) * h_modes_ + mode];
    }

private:
    std::vector<double> grid_;
    int h_modes_;
    uint64_t seed_;
    uint32_t replica_;
    std::vector<double> dw_;
    std::vector<double> z2_;
};

// Time-dependent noise map G; values are frozen per grid cell (evaluated at
// cell midpoints so integrable t^{beta-1/2} profiles stay finite).
struct NoiseOperatorPath {
    std::vector<double> grid;  // nodes 0 = t_0 < ... < t_N = T
    bool diagonal = true;
    std::vector<std::vector<double>> diag;  // [cell][mode] when diagonal
    std::vector<RowMatrix> mats;            // [cell] otherwise
    std::optional<double> delta;            // smoothing exponent; nullopt = unsmoothed
    double beta = 0.0;
    double sigma = 0.0;

    int cells() const { return static_cast<int>(grid.size()) - 1; }
    int h_modes() const;
    void validate() const;
    // Hilbert-Schmidt norm of the cell value.
    double hs_norm(int cell) const;
};

NoiseOperatorPath make_diagonal_noise(const std::vector<double>& grid,
                                      const std::function<std::vector<double>(double)>& eval,
                                      std::optional<double> delta, double beta, double sigma);

// Holder path of A^delta G (its per-cell Hilbert-Schmidt norms), used to
// measure the smoothed noise in the weighted Holder norm.
WeightedHolderPath smoothed_noise_path(const SpectralOperator& op, const NoiseOperatorPath& g);

struct GammaNormResult {
    double value = 0.0;
    double std_error = 0.0;  // zero for the exact Hilbert-Schmidt branch
};

// gamma-radonifying norm of a map H -> E: exact Hilbert-Schmidt value in the
// hilbert flavor; Monte Carlo second moment of the Gaussian image series in
// the lp flavor.
GammaNormResult gamma_norm(const RowMatrix& map, NormFlavor flavor, const SpectralOperator& op,
                           LpSpec lp = {}, int mc_samples = 0, uint64_t seed = 1);

struct SubmultReport {
    int trials = 0;
    int failures = 0;
    double worst_margin = 0.0;  // max over trials of lhs - rhs (<= 0 when clean)
};

// ||phi1 phi2||_gamma <= ||phi1||_L(E) ||phi2||_gamma on randomized instances.
SubmultReport gamma_submultiplicativity_check(const RowMatrix& phi1, const RowMatrix& phi2,
                                              int trials, NormFlavor flavor,
                                              const SpectralOperator& op, uint64_t seed);

double operator_norm_power_iteration(const RowMatrix& m, double tol = 1e-10);

struct HsEmbeddingReport {
    std::vector<double> mode_eigenvalues;  // JJ* eigenvalue per retained mode
    double partial_trace = 0.0;
    double max_offdiagonal = 0.0;  // from the materialized check (small n only)
};

// Weighted embedding with weights 1/n; JJ* acts diagonally with eigenvalue
// 1/m^2 and summable trace.
HsEmbeddingReport hs_embedding_demo(int n_modes);

// Left-endpoint Ito sum of G against the increments; returns the running
// integral at every node. Grids must coincide.
std::vector<std::vector<double>> ito_integral(const NoiseOperatorPath& g, const WienerSource& w);

// Exact-in-distribution update of the scalar convolution
// int e^{-lambda (t-s)} g dw over one step, jointly sampled with the plain
// Brownian increment of the same window so strict-form checks can reuse it:
//   Var(xi) = (1 - e^{-2 lambda dt}) / (2 lambda),
//   Var(dw) = dt,  Cov(xi, dw) = (1 - e^{-lambda dt}) / lambda.
struct OuStep {
    double new_state = 0.0;
    double brownian_increment = 0.0;
};

OuStep ou_convolution_step(double lambda, double g, double dt, double state, double z1, double z2);
OuStep ou_convolution_step(double lambda, double g, double dt, double state, const CounterRng& rng,
                           uint32_t replica, uint32_t stream, uint32_t step);

double ou_noise_variance(double lambda, double dt);       // (1-e^{-2 lambda dt})/(2 lambda)
double ou_brownian_covariance(double lambda, double dt);  // (1-e^{-lambda dt})/lambda

// CSV schema: replica,step,mode,value — one row per master-grid increment.
void export_increments_csv(const std::vector<WienerSource>& sources, const std::string& file);
std::vector<std::vector<double>> import_increments_csv(const std::string& file, int steps,
                                                       int h_modes, int replicas);

}  // namespace spdelab
