#pragma once

#include <optional>
#include <string>
#include <vector>

#include "spdelab/linear.hpp"
#include "spdelab/semilinear.hpp"

namespace spdelab {

// Experiment description: a named preset plus overridable scalar knobs,
// loaded from a flat key = value file.
struct ExperimentConfig {
    std::string preset = "cable-linear";
    uint64_t seed = 20240601;
    int replicas = 256;
    int workers = 0;
    std::string out_dir = "out";

    std::string operator_name = "cable_neumann";  // cable_neumann | dirichlet_divform | whole_line_truncated | csv:<path>
    double length = 3.14159265358979323846;
    int modes = 32;
    double b0 = 1.0;
    double p = 2.0;
    int spatial_points = 256;

    double beta = 0.4;
    double sigma = 0.2;
    std::optional<double> delta = 0.8;  // absent = unsmoothed-noise route
    double eta = 0.0;
    double rho = 0.0;

    double horizon = 1.0;
    int cells = 256;
    double grading = 2.0;
    int refine = 1;

    std::string forcing_kind = "power";  // none | power
    double forcing_scale = 1.0;
    std::string noise_kind = "power";  // none | constant | power
    double noise_scale = 1.0;
    std::string xi_kind = "smooth";  // zero | smooth | random
    double xi_scale = 1.0;

    double f2_scale = 0.0;
    int f2_low_modes = 4;
    double f2_offset = 0.0;
    double shift_eps = 0.05;

    std::vector<std::string> suites;
    std::vector<std::string> audits;
    std::vector<double> wtheta_thetas;
    int num_scales = 6;
    double eps_offset = 0.125;

    int solutions_replicas = 4;
    int export_replicas = 0;
    int picard_max_iters = 25;
    double picard_tol = 1e-6;
    std::vector<double> contdep_epsilons = {0.01, 0.005, 0.0025};
};

std::vector<std::string> list_presets();

// Preset defaults; throws for unknown names.
ExperimentConfig preset_config(const std::string& name);

// key = value file; a `preset` line resets the defaults before overrides.
ExperimentConfig load_config(const std::string& path);

// Exponent-window and shape validation; throws std::domain_error with the
// violated hypothesis named. No solver runs on an invalid config.
void validate_config(const ExperimentConfig& cfg);

struct BuiltExperiment {
    SpectralOperator op;
    LinearProblem linear;
    std::optional<SemilinearProblem> semilinear;
};

BuiltExperiment build_experiment(const ExperimentConfig& cfg);

}  // namespace spdelab
