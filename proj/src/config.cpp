#include "spdelab/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "spdelab/grids.hpp"
#include "spdelab/holder.hpp"

namespace spdelab {

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

std::vector<double> split_doubles(const std::string& s) {
    std::vector<double> out;
    for (const auto& item : split_list(s)) out.push_back(std::stod(item));
    return out;
}

}  // namespace

std::vector<std::string> list_presets() {
    return {"zero",          "cable-linear",      "cable-linear-gb", "cable-e100",
            "wtheta-highbeta", "wtheta-lowbeta",  "semilinear-p48",  "semilinear-gb",
            "semilinear-shift", "semilinear-contdep"};
}

ExperimentConfig preset_config(const std::string& name) {
    ExperimentConfig c;
    c.preset = name;
    if (name == "zero") {
        c.modes = 8;
        c.cells = 64;
        c.replicas = 4;
        c.forcing_kind = "none";
        c.noise_kind = "none";
        c.xi_kind = "zero";
        c.suites = {"solve", "residuals"};
    } else if (name == "cable-linear") {
        c.replicas = 2000;
        c.suites = {"solve", "residuals", "audits", "gaussianity"};
        c.audits = {"H12.7", "H10.5"};
    } else if (name == "cable-linear-gb") {
        c.delta.reset();
        c.replicas = 2000;
        c.suites = {"solve", "audits"};
        c.audits = {"H17.6"};
    } else if (name == "cable-e100") {
        c.modes = 16;
        c.cells = 64;
        c.grading = 1.0;
        c.replicas = 2000;
        c.forcing_kind = "none";
        c.xi_kind = "zero";
        c.suites = {"solve", "e100"};
        c.num_scales = 5;
    } else if (name == "wtheta-highbeta" || name == "wtheta-lowbeta") {
        c.modes = 16;
        c.cells = 64;
        c.grading = 1.0;
        c.replicas = 2000;
        c.delta.reset();
        c.forcing_kind = "none";
        c.xi_kind = "zero";
        c.suites = {"solve", "wtheta"};
        c.num_scales = 5;
        if (name == "wtheta-lowbeta") {
            c.beta = 0.2;
            c.sigma = 0.1;
            c.wtheta_thetas = {0.0, 0.1, 0.2};
        } else {
            c.wtheta_thetas = {0.0, 0.2, 0.4};
        }
    } else if (name == "semilinear-p48") {
        c.operator_name = "whole_line_truncated";
        c.modes = 16;
        c.cells = 128;
        c.horizon = 0.5;
        c.replicas = 2000;
        c.beta = 0.42;
        c.sigma = 0.2;
        c.delta = 0.8;
        c.eta = 0.45;
        c.rho = 1.0;
        c.forcing_scale = 0.3;
        c.noise_scale = 0.3;
        c.xi_scale = 0.5;
        c.f2_scale = 0.15;
        c.f2_offset = 0.5;
        c.suites = {"picard", "audits", "strictup"};
        c.audits = {"Ph2"};
    } else if (name == "semilinear-gb") {
        c.operator_name = "whole_line_truncated";
        c.modes = 16;
        c.cells = 128;
        c.horizon = 0.5;
        c.replicas = 2000;
        c.beta = 0.35;
        c.sigma = 0.15;
        c.delta.reset();
        c.eta = 0.35;
        c.forcing_scale = 0.3;
        c.noise_scale = 0.3;
        c.xi_scale = 0.5;
        c.f2_scale = 0.15;
        c.f2_offset = 0.5;
        c.suites = {"picard", "audits"};
        c.audits = {"H18.2"};
    } else if (name == "semilinear-shift") {
        c.operator_name = "cable_neumann";
        c.modes = 8;
        c.cells = 256;
        c.horizon = 0.5;
        c.replicas = 8;
        c.beta = 0.42;
        c.sigma = 0.2;
        c.delta = 0.8;
        c.eta = 0.45;
        c.forcing_kind = "none";
        c.noise_kind = "constant";
        c.noise_scale = 0.5;
        c.xi_scale = 1.0;
        c.shift_eps = 0.05;
        c.suites = {"picard", "shift-oracle"};
        c.picard_tol = 1e-10;
    } else if (name == "semilinear-contdep") {
        c.operator_name = "whole_line_truncated";
        c.modes = 12;
        c.cells = 96;
        c.horizon = 0.5;
        c.replicas = 400;
        c.beta = 0.42;
        c.sigma = 0.2;
        c.delta = 0.8;
        c.eta = 0.45;
        c.forcing_scale = 0.3;
        c.noise_scale = 0.3;
        c.xi_scale = 0.5;
        c.f2_scale = 0.15;
        c.f2_offset = 0.5;
        c.suites = {"contdep"};
        c.picard_tol = 1e-9;
    } else if (name != "cable-linear" && name != "custom") {
        throw std::invalid_argument("unknown preset: " + name);
    }
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    ExperimentConfig cfg;
    bool preset_seen = false;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t"));
            s.erase(s.find_last_not_of(" \t") + 1);
            return s;
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key == "preset") {
            cfg = preset_config(val);
            preset_seen = true;
        } else if (key == "seed") {
            cfg.seed = std::stoull(val);
        } else if (key == "replicas") {
            cfg.replicas = std::stoi(val);
        } else if (key == "workers") {
            cfg.workers = std::stoi(val);
        } else if (key == "out") {
            cfg.out_dir = val;
        } else if (key == "operator") {
            cfg.operator_name = val;
        } else if (key == "length") {
            cfg.length = std::stod(val);
        } else if (key == "modes") {
            cfg.modes = std::stoi(val);
        } else if (key == "b0") {
            cfg.b0 = std::stod(val);
        } else if (key == "p") {
            cfg.p = std::stod(val);
        } else if (key == "spatial_points") {
            cfg.spatial_points = std::stoi(val);
        } else if (key == "beta") {
            cfg.beta = std::stod(val);
        } else if (key == "sigma") {
            cfg.sigma = std::stod(val);
        } else if (key == "delta") {
            if (val == "none")
                cfg.delta.reset();
            else
                cfg.delta = std::stod(val);
        } else if (key == "eta") {
            cfg.eta = std::stod(val);
        } else if (key == "rho") {
            cfg.rho = std::stod(val);
        } else if (key == "horizon") {
            cfg.horizon = std::stod(val);
        } else if (key == "cells") {
            cfg.cells = std::stoi(val);
        } else if (key == "grading") {
            cfg.grading = std::stod(val);
        } else if (key == "refine") {
            cfg.refine = std::stoi(val);
        } else if (key == "forcing") {
            cfg.forcing_kind = val;
        } else if (key == "forcing_scale") {
            cfg.forcing_scale = std::stod(val);
        } else if (key == "noise") {
            cfg.noise_kind = val;
        } else if (key == "noise_scale") {
            cfg.noise_scale = std::stod(val);
        } else if (key == "xi") {
            cfg.xi_kind = val;
        } else if (key == "xi_scale") {
            cfg.xi_scale = std::stod(val);
        } else if (key == "f2_scale") {
            cfg.f2_scale = std::stod(val);
        } else if (key == "f2_low_modes") {
            cfg.f2_low_modes = std::stoi(val);
        } else if (key == "f2_offset") {
            cfg.f2_offset = std::stod(val);
        } else if (key == "shift_eps") {
            cfg.shift_eps = std::stod(val);
        } else if (key == "suites") {
            cfg.suites = split_list(val);
        } else if (key == "audits") {
            cfg.audits = split_list(val);
        } else if (key == "wtheta_thetas") {
            cfg.wtheta_thetas = split_doubles(val);
        } else if (key == "num_scales") {
            cfg.num_scales = std::stoi(val);
        } else if (key == "eps_offset") {
            cfg.eps_offset = std::stod(val);
        } else if (key == "solutions_replicas") {
            cfg.solutions_replicas = std::stoi(val);
        } else if (key == "export_replicas") {
            cfg.export_replicas = std::stoi(val);
        } else if (key == "picard_max_iters") {
            cfg.picard_max_iters = std::stoi(val);
        } else if (key == "picard_tol") {
            cfg.picard_tol = std::stod(val);
        } else if (key == "contdep_epsilons") {
            cfg.contdep_epsilons = split_doubles(val);
        } else {
            throw std::invalid_argument("unknown config key: " + key);
        }
    }
    (void)preset_seen;
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (!(cfg.sigma > 0.0 && cfg.sigma < cfg.beta && cfg.beta < 0.5))
        throw std::domain_error("hypothesis violated: need 0 < sigma < beta < 1/2");
    if (cfg.delta && !(*cfg.delta > 1.0 - cfg.beta && *cfg.delta <= 1.0))
        throw std::domain_error("hypothesis violated: smoothing exponent outside (1-beta, 1]");
    const bool semilinear =
        cfg.f2_scale != 0.0 || cfg.preset.rfind("semilinear", 0) == 0 ||
        std::find(cfg.suites.begin(), cfg.suites.end(), "picard") != cfg.suites.end();
    if (semilinear) {
        if (cfg.delta) {
            if (!(cfg.beta < cfg.eta && std::max(0.0, 2.0 * cfg.eta - 0.5) < cfg.beta))
                throw std::domain_error(
                    "hypothesis violated: need max{0, 2 eta - 1/2} < beta < eta");
        } else {
            if (!(cfg.beta <= cfg.eta && std::max(0.0, 2.0 * cfg.eta - 0.5) < cfg.beta))
                throw std::domain_error(
                    "hypothesis violated: need max{0, 2 eta - 1/2} < beta <= eta");
        }
    }
    for (const auto& th : cfg.wtheta_thetas)
        if (th < 0.0 || th > cfg.beta)
            throw std::domain_error("hypothesis violated: theta outside [0, beta]");
    if (cfg.modes < 1 || cfg.cells < 8 || cfg.replicas < 1)
        throw std::domain_error("degenerate run shape");
    if (cfg.grading < 1.0) throw std::domain_error("grading must be >= 1");
    if (cfg.horizon <= 0.0) throw std::domain_error("horizon must be positive");
}

namespace {

double sampled_sq_holder(const std::function<std::vector<double>(double)>& eval, double beta,
                         double sigma, double horizon) {
    const auto grid = graded_grid(horizon, 768, 2.0);
    WeightedHolderPath path;
    path.beta = beta;
    path.sigma = sigma;
    path.horizon = horizon;
    for (size_t j = 1; j < grid.size(); ++j) {
        path.times.push_back(grid[j]);
        path.values.push_back(eval(grid[j]));
    }
    const double total = holder_norm(path).total;
    return total * total;
}

}  // namespace

BuiltExperiment build_experiment(const ExperimentConfig& cfg) {
    validate_config(cfg);
    BuiltExperiment built;
    if (cfg.operator_name == "cable_neumann") {
        built.op = make_cable_neumann(cfg.length, cfg.modes);
    } else if (cfg.operator_name == "dirichlet_divform") {
        built.op = make_dirichlet_divform(cfg.length, cfg.b0, cfg.modes);
    } else if (cfg.operator_name == "whole_line_truncated") {
        built.op = make_whole_line_truncated(cfg.length, cfg.modes);
    } else if (cfg.operator_name.rfind("csv:", 0) == 0) {
        built.op = load_spectrum_csv(cfg.operator_name.substr(4), cfg.length);
    } else {
        throw std::invalid_argument("unknown operator preset: " + cfg.operator_name);
    }
    const auto& op = built.op;
    const int K = cfg.modes;

    LinearProblem lp;
    lp.op = op;
    lp.horizon = cfg.horizon;

    lp.f1.beta = cfg.beta;
    lp.f1.sigma = cfg.sigma;
    if (cfg.forcing_kind == "none") {
        lp.f1.is_zero = true;
        lp.f1.eval = [K](double) { return std::vector<double>(K, 0.0); };
    } else if (cfg.forcing_kind == "power") {
        const double beta = cfg.beta, sigma = cfg.sigma, scale = cfg.forcing_scale;
        lp.f1.eval = [K, beta, sigma, scale](double t) {
            std::vector<double> v(K);
            const double amp = scale * std::pow(t, beta - 1.0) * std::pow(t, sigma);
            for (int k = 0; k < K; ++k) v[k] = amp / ((k + 1.0) * (k + 1.0));
            return v;
        };
        lp.f1.sq_holder_norm = sampled_sq_holder(lp.f1.eval, cfg.beta, cfg.sigma, cfg.horizon);
    } else {
        throw std::invalid_argument("unknown forcing preset: " + cfg.forcing_kind);
    }

    lp.noise.beta = cfg.beta;
    lp.noise.sigma = cfg.sigma;
    lp.noise.delta = cfg.delta;
    const double d = cfg.delta.value_or(0.0);
    if (cfg.noise_kind == "none") {
        lp.noise.is_zero = true;
        lp.noise.eval = [K](double) { return std::vector<double>(K, 0.0); };
    } else {
        std::vector<double> weights(K);
        for (int k = 0; k < K; ++k)
            weights[k] = cfg.noise_scale * std::pow(op.eigenvalues[k], -d) / (k + 1.0);
        if (cfg.noise_kind == "constant") {
            lp.noise.eval = [weights](double) { return weights; };
        } else if (cfg.noise_kind == "power") {
            const double e = cfg.beta - 0.5;
            lp.noise.eval = [weights, e](double t) {
                auto v = weights;
                const double amp = std::pow(t, e);
                for (auto& x : v) x *= amp;
                return v;
            };
        } else {
            throw std::invalid_argument("unknown noise preset: " + cfg.noise_kind);
        }
        auto smoothed = [&op, d, eval = lp.noise.eval](double t) {
            auto g = eval(t);
            for (size_t k = 0; k < g.size(); ++k) g[k] *= std::pow(op.eigenvalues[k], d);
            return g;
        };
        lp.noise.sq_holder_norm_smoothed =
            sampled_sq_holder(smoothed, cfg.beta + 0.5, cfg.sigma, cfg.horizon);
    }

    lp.xi_base.assign(K, 0.0);
    if (cfg.xi_kind == "smooth" || cfg.xi_kind == "random") {
        for (int k = 0; k < K; ++k) lp.xi_base[k] = cfg.xi_scale / ((k + 1.0) * (k + 1.0));
        if (cfg.xi_kind == "random") {
            lp.xi_random_std.assign(K, 0.0);
            for (int k = 0; k < K; ++k) lp.xi_random_std[k] = 0.25 * lp.xi_base[k];
        }
    } else if (cfg.xi_kind != "zero") {
        throw std::invalid_argument("unknown initial-value preset: " + cfg.xi_kind);
    }
    built.linear = std::move(lp);

    const bool semilinear = cfg.f2_scale != 0.0 || cfg.preset == "semilinear-shift" ||
                            cfg.preset.rfind("semilinear", 0) == 0;
    if (semilinear) {
        SemilinearProblem sp;
        sp.linear = built.linear;
        sp.f2.eta = cfg.eta;
        if (cfg.preset == "semilinear-shift") {
            const double eps = cfg.shift_eps;
            std::vector<double> lam = op.eigenvalues;
            sp.f2.eval = [lam, eps](const std::vector<double>& x) {
                std::vector<double> v(x.size());
                for (size_t k = 0; k < x.size(); ++k) v[k] = eps * x[k] / lam[k];
                return v;
            };
            sp.f2.c_f2 = eps * std::pow(op.eigenvalues.front(), -(1.0 + cfg.eta));
            sp.f2.sq_f2_zero = 0.0;
        } else {
            const double a = cfg.f2_scale, b = cfg.f2_offset;
            const int low = std::min(cfg.f2_low_modes, K);
            sp.f2.eval = [a, b, low, K](const std::vector<double>& x) {
                std::vector<double> v(K, 0.0);
                for (int k = 0; k < low; ++k) v[k] = a * (std::tanh(x[k]) + b);
                return v;
            };
            sp.f2.c_f2 = a * std::pow(op.eigenvalues.front(), -cfg.eta);
            sp.f2.sq_f2_zero = a * a * b * b * low;
            sp.f2.rho = cfg.rho;
            if (cfg.rho > 0.0) {
                double s = 0.0;
                for (int k = 0; k < low; ++k)
                    s += std::pow(op.eigenvalues[k], 2.0 * cfg.rho);
                sp.f2.sq_range_bound = a * a * (1.0 + std::abs(b)) * (1.0 + std::abs(b)) * s;
            }
        }
        sp.f2.is_zero = (cfg.f2_scale == 0.0 && cfg.preset != "semilinear-shift");
        built.semilinear = std::move(sp);
    }
    return built;
}

}  // namespace spdelab
