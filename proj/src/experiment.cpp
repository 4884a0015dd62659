#include "spdelab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>

#include <json.hpp>

#include "spdelab/grids.hpp"
#include "spdelab/regularity.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct SuiteState {
    ExperimentConfig cfg;
    BuiltExperiment built;
    std::vector<std::vector<double>> replay_rows;
    std::optional<SolutionEnsemble> linear_full;   // residual-grade run, few replicas
    std::optional<SolutionEnsemble> linear_audit;  // audit-grade run, all replicas
    std::optional<PicardResult> picard;
    json verdicts = json::object();
    json values = json::object();
    std::vector<std::string> artifacts;
    std::ofstream audits_csv;
    std::ofstream fits_csv;

    SolverOptions solver_options(bool light_storage) const {
        SolverOptions s;
        s.n_cells = cfg.cells;
        s.grading = cfg.grading;
        s.refine = cfg.refine;
        s.seed = cfg.seed;
        s.replicas = cfg.replicas;
        s.workers = cfg.workers;
        s.strict = built.linear.noise.delta.has_value();
        if (light_storage) {
            s.keep_i2 = false;
            s.keep_int_g_dw = false;
        }
        if (!replay_rows.empty()) s.replay = &replay_rows;
        return s;
    }

    PicardOptions picard_options() const {
        PicardOptions p;
        p.solver = solver_options(false);
        p.max_iterations = cfg.picard_max_iters;
        p.tolerance = cfg.picard_tol;
        return p;
    }

    const SolutionEnsemble& linear_ensemble() {
        if (!linear_full) {
            SolverOptions s = solver_options(false);
            s.replicas = std::min(cfg.replicas, 64);
            linear_full = solve_linear(built.linear, s);
        }
        return *linear_full;
    }

    const SolutionEnsemble& audit_ensemble() {
        if (!linear_audit) linear_audit = solve_linear(built.linear, solver_options(true));
        return *linear_audit;
    }

    const PicardResult& picard_result() {
        if (!picard) {
            if (!built.semilinear) throw std::domain_error("suite needs a semilinear preset");
            picard = picard_iterate(*built.semilinear, picard_options());
        }
        return *picard;
    }

    void open_audit_csv(const std::string& dir) {
        if (audits_csv.is_open()) return;
        audits_csv.open(dir + "/audits.csv");
        if (!audits_csv) throw std::runtime_error("cannot write audits.csv");
        audits_csv << "estimate,time,lhs,three_se,rhs,verdict\n";
        artifacts.push_back("audits.csv");
    }

    void open_fits_csv(const std::string& dir) {
        if (fits_csv.is_open()) return;
        fits_csv.open(dir + "/holder_fits.csv");
        if (!fits_csv) throw std::runtime_error("cannot write holder_fits.csv");
        fits_csv << "fit,quantity,case,target,lag,mean_sq\n";
        artifacts.push_back("holder_fits.csv");
    }

    void write_table(const VerdictTable& table) {
        for (const auto& row : table.rows)
            audits_csv << table.estimate << ',' << fmt(row.t) << ',' << fmt(row.lhs) << ','
                       << fmt(row.three_se) << ',' << fmt(row.rhs) << ','
                       << (row.pass ? "PASS" : "FAIL") << '\n';
    }
};

void suite_solve(SuiteState& st, const std::string& dir) {
    const bool semilinear_state = st.built.semilinear && st.cfg.preset != "semilinear-shift" &&
                                  std::find(st.cfg.suites.begin(), st.cfg.suites.end(),
                                            "picard") != st.cfg.suites.end();
    const SolutionEnsemble& ens =
        semilinear_state ? st.picard_result().ensemble : st.linear_ensemble();
    std::ofstream out(dir + "/solutions.csv");
    if (!out) throw std::runtime_error("cannot write solutions.csv");
    out << "replica,time,mode,value\n";
    const size_t rmax = std::min<size_t>(ens.paths.size(), st.cfg.solutions_replicas);
    for (size_t r = 0; r < rmax; ++r)
        for (size_t n = 0; n < ens.times.size(); ++n)
            for (size_t k = 0; k < ens.paths[r].x[n].size(); ++k)
                out << r << ',' << fmt(ens.times[n]) << ',' << k << ','
                    << fmt(ens.paths[r].x[n][k]) << '\n';
    st.artifacts.push_back("solutions.csv");

    if (st.cfg.export_replicas > 0) {
        const auto nodes = graded_grid(st.cfg.horizon, st.cfg.cells, st.cfg.grading);
        std::vector<double> master;
        master.reserve(st.cfg.cells * st.cfg.refine + 1);
        for (size_t j = 0; j + 1 < nodes.size(); ++j)
            for (int s = 0; s < st.cfg.refine; ++s)
                master.push_back(nodes[j] + (nodes[j + 1] - nodes[j]) * s / st.cfg.refine);
        master.push_back(nodes.back());
        std::vector<WienerSource> sources;
        for (int r = 0; r < std::min(st.cfg.export_replicas, st.cfg.replicas); ++r) {
            if (!st.replay_rows.empty())
                sources.emplace_back(master, st.cfg.modes, st.cfg.seed, r, st.replay_rows[r]);
            else
                sources.emplace_back(master, st.cfg.modes, st.cfg.seed, r);
        }
        export_increments_csv(sources, dir + "/increments.csv");
        st.artifacts.push_back("increments.csv");
    }
}

void suite_residuals(SuiteState& st) {
    const auto& ens = st.linear_ensemble();
    double rms = 0.0, worst = 0.0;
    for (const auto& p : ens.paths) {
        const double r = st.solver_options(false).strict ? strict_residual(st.built.linear, p) : 0.0;
        rms += r * r;
        worst = std::max(worst, r);
    }
    rms = std::sqrt(rms / static_cast<double>(ens.paths.size()));
    SolverOptions s = st.solver_options(false);
    s.replicas = 1;
    const double mild = mild_residual(st.built.linear, s);
    const auto uniq = uniqueness_probe(st.built.linear, s);
    st.values["strict_residual_rms"] = rms;
    st.values["strict_residual_max"] = worst;
    st.values["mild_residual"] = mild;
    st.values["uniqueness_gap"] = uniq.max_gap;
    const double allowance = 2.0 * (uniq.residual_a + uniq.residual_b) + 2.0 * mild + 1e-12;
    st.verdicts["residuals.finite"] = std::isfinite(rms) && std::isfinite(mild);
    st.verdicts["residuals.uniqueness"] = uniq.max_gap <= allowance;
}

void suite_audits(SuiteState& st, const std::string& dir) {
    st.open_audit_csv(dir);
    for (const auto& id : st.cfg.audits) {
        VerdictTable table;
        if (id == "H12.7" || id == "H10.5" || id == "H17.6") {
            table = bound_audit(id, st.audit_ensemble(), st.built.op,
                                make_estimate_inputs(st.built.linear));
        } else if (id == "Ph2" || id == "H18.2" || id == "H23.4") {
            if (!st.built.semilinear) throw std::domain_error("audit needs a semilinear preset");
            table = bound_audit(id, st.picard_result().ensemble, st.built.op,
                                make_estimate_inputs(*st.built.semilinear));
        } else {
            throw std::invalid_argument("unknown estimate id: " + id);
        }
        st.write_table(table);
        st.verdicts["audit." + id] = table.all_pass;
    }
}

void suite_e100(SuiteState& st, const std::string& dir) {
    st.open_fits_csv(dir);
    EstimateInputs in = make_estimate_inputs(st.built.linear);
    const auto rep = verify_e100(st.audit_ensemble(), st.built.op, in, st.cfg.num_scales);
    for (size_t i = 0; i < rep.fit.lags.size(); ++i)
        st.fits_csv << "e100,a_i2,0," << fmt(rep.fit.target_exponent) << ','
                    << fmt(rep.fit.lags[i]) << ',' << fmt(rep.fit.mean_sq_increments[i]) << '\n';
    st.values["e100.bound"] = rep.bound;
    st.values["e100.slope"] = rep.fit.slope;
    st.values["e100.slope_se"] = rep.fit.slope_se;
    st.verdicts["e100.ratios"] = rep.ratios_ok;
    st.verdicts["e100.slope"] = rep.slope_ok;
}

void suite_wtheta(SuiteState& st, const std::string& dir) {
    st.open_fits_csv(dir);
    for (double theta : st.cfg.wtheta_thetas) {
        const auto rep =
            verify_w_theta_regularity(st.audit_ensemble(), st.built.op, theta, st.cfg.beta,
                                      st.cfg.eps_offset * st.cfg.horizon, st.cfg.num_scales);
        const std::string label = "wtheta:" + fmt(theta);
        for (size_t i = 0; i < rep.fit.lags.size(); ++i)
            st.fits_csv << "wtheta," << fmt(theta) << ',' << rep.case_applied << ','
                        << fmt(rep.target) << ',' << fmt(rep.fit.lags[i]) << ','
                        << fmt(rep.fit.mean_sq_increments[i]) << '\n';
        st.values[label + ".slope"] = rep.fit.slope;
        st.values[label + ".case"] = rep.case_applied;
        st.verdicts[label] = rep.slope_ok;
    }
}

void suite_gaussianity(SuiteState& st) {
    // Fixed functional of the plain Brownian integral of G at the horizon,
    // accumulated without storing paths.
    const int probes = 10000;
    const int K = std::min(4, st.cfg.modes);
    const auto nodes = graded_grid(st.cfg.horizon, st.cfg.cells, st.cfg.grading);
    const CounterRng rng(st.cfg.seed);
    std::vector<double> sample(probes, 0.0);
    parallel_for(probes, st.cfg.workers, [&](int r) {
        double acc = 0.0;
        for (size_t j = 0; j + 1 < nodes.size(); ++j) {
            const auto g = st.built.linear.noise.eval(0.5 * (nodes[j] + nodes[j + 1]));
            const double sdt = std::sqrt(nodes[j + 1] - nodes[j]);
            for (int k = 0; k < K; ++k)
                acc += g[k] * sdt *
                       rng.normal(static_cast<uint32_t>(r) + 0x10000u,
                                  streams::kWienerBase + k, static_cast<uint32_t>(j)) /
                       (k + 1.0);
        }
        sample[r] = acc;
    });
    const auto jb = jarque_bera(sample);
    st.values["gaussianity.jb"] = jb.statistic;
    st.verdicts["gaussianity"] = jb.pass_1pct;
}

void suite_picard(SuiteState& st, const std::string& dir) {
    const auto& res = st.picard_result();
    std::ofstream out(dir + "/picard_trace.csv");
    if (!out) throw std::runtime_error("cannot write picard_trace.csv");
    out << "iter,xi_distance,ratio,bound\n";
    bool ball_ok = true, contraction_ok = true;
    for (const auto& row : res.trace) {
        out << row.iteration << ',' << fmt(row.xi_distance) << ',' << fmt(row.ratio) << ','
            << fmt(row.theoretical_factor) << '\n';
        ball_ok = ball_ok && row.ball_ok;
        if (row.iteration >= 2 && row.theoretical_factor < 1.0)
            contraction_ok =
                contraction_ok && row.ratio <= row.theoretical_factor + 3.0 * row.ratio_se;
    }
    st.artifacts.push_back("picard_trace.csv");
    st.values["picard.kappa"] = res.kappa;
    st.values["picard.t_loc"] = res.t_loc;
    st.values["picard.iterations"] = res.iterations;
    st.verdicts["picard.converged"] = res.converged;
    st.verdicts["picard.ball"] = ball_ok;
    st.verdicts["picard.contraction"] = contraction_ok;
}

void suite_strictup(SuiteState& st, const std::string& dir) {
    if (!st.built.semilinear) throw std::domain_error("strict upgrade needs a semilinear preset");
    const auto rep = strict_upgrade_check(*st.built.semilinear, st.picard_options());
    st.open_audit_csv(dir);
    VerdictTable table;
    table.estimate = "H23.4";
    table.all_pass = rep.h234_pass;
    for (const auto& r : rep.h234_rows) {
        AuditRow row;
        row.t = r[0];
        row.lhs = r[1];
        row.three_se = r[2];
        row.rhs = r[3];
        row.pass = row.lhs <= row.rhs + row.three_se;
        table.rows.push_back(row);
    }
    st.write_table(table);
    st.values["strictup.residual_rms"] = rep.residual;
    st.values["strictup.range_norm"] = rep.worst_range_norm;
    st.values["strictup.max_weighted_ax"] = rep.max_weighted_ax;
    st.verdicts["strictup.range_audit"] = rep.range_audit_ok;
    st.verdicts["audit.H23.4"] = rep.h234_pass;
}

void suite_shift_oracle(SuiteState& st) {
    if (!st.built.semilinear || st.cfg.preset != "semilinear-shift")
        throw std::domain_error("shift oracle needs the semilinear-shift preset");
    PicardOptions popts = st.picard_options();
    popts.check_local_time = false;  // the linear-drift case admits the full horizon
    const auto fixed_point = picard_iterate(*st.built.semilinear, popts);

    LinearProblem shifted = st.built.linear;
    shifted.op.eigenvalues.clear();
    for (double lam : st.built.op.eigenvalues)
        shifted.op.eigenvalues.push_back(lam - st.cfg.shift_eps / lam);
    const auto exact = solve_linear(shifted, st.solver_options(false));

    double worst_rel = 0.0;
    const auto& times = exact.times;
    for (size_t r = 0; r < exact.paths.size(); ++r) {
        double num = 0.0, den = 0.0;
        for (size_t n = 1; n < times.size(); ++n) {
            const double w = times[n] - times[n - 1];
            for (int k = 0; k < st.cfg.modes; ++k) {
                const double d =
                    fixed_point.ensemble.paths[r].x[n][k] - exact.paths[r].x[n][k];
                num += w * d * d;
                den += w * exact.paths[r].x[n][k] * exact.paths[r].x[n][k];
            }
        }
        worst_rel = std::max(worst_rel, std::sqrt(num / std::max(den, 1e-300)));
    }
    st.values["shift.rel_l2_error"] = worst_rel;
    st.verdicts["shift.oracle"] = worst_rel < 1e-3;
}

void suite_contdep(SuiteState& st, const std::string& dir) {
    if (!st.built.semilinear) throw std::domain_error("dependence suite needs a semilinear preset");
    const auto& pa = *st.built.semilinear;
    PicardOptions popts = st.picard_options();

    BallSpec balls;
    balls.r1 = std::sqrt(1.5 * pa.linear.f1.sq_holder_norm + 1e-12);
    balls.r2 = std::sqrt(1.5 * pa.linear.noise.sq_holder_norm_smoothed + 1e-12);
    balls.r3 = std::sqrt(1.5 * pa.linear.sq_frac_xi(pa.linear.f1.beta) + 1e-12);

    const auto same = continuous_dependence(pa, pa, balls, popts);
    st.verdicts["contdep.identical_zero"] = same.identical_inputs_zero;

    SemilinearProblem pb = pa;
    std::vector<double> direction(st.cfg.modes);
    for (int k = 0; k < st.cfg.modes; ++k) direction[k] = 1.0 / (k + 1.0);
    const double eps0 = st.cfg.contdep_epsilons.front();
    for (int k = 0; k < st.cfg.modes; ++k) pb.linear.xi_base[k] += eps0 * direction[k];
    const auto rep = continuous_dependence(pa, pb, balls, popts);
    st.open_audit_csv(dir);
    VerdictTable table;
    table.estimate = "Eq22";
    table.all_pass = true;
    for (const auto& r : rep.rows) {
        AuditRow row;
        row.t = r[0];
        row.lhs = r[1];
        row.rhs = rep.c_fit * r[2];
        row.pass = row.lhs <= row.rhs * (1.0 + 1e-12) + 1e-300;
        table.all_pass = table.all_pass && row.pass;
        table.rows.push_back(row);
    }
    st.write_table(table);
    st.values["contdep.c_fit"] = rep.c_fit;
    st.values["contdep.c_gronwall"] = rep.c_gronwall;
    st.verdicts["contdep.eq22"] = table.all_pass;

    const auto sweep =
        continuous_dependence_scaling(pa, direction, st.cfg.contdep_epsilons, popts);
    st.values["contdep.slope"] = sweep.slope;
    st.verdicts["contdep.slope"] = std::abs(sweep.slope - 1.0) <= 0.1;
}

}  // namespace

int run_experiment(const ExperimentConfig& cfg, const std::string& replay_increments) {
    const auto start = std::chrono::steady_clock::now();
    validate_config(cfg);
    SuiteState st;
    st.cfg = cfg;
    st.built = build_experiment(cfg);
    fs::create_directories(cfg.out_dir);
    const std::string dir = cfg.out_dir;

    if (!replay_increments.empty()) {
        const int master_steps = cfg.cells * cfg.refine;
        st.replay_rows =
            import_increments_csv(replay_increments, master_steps, cfg.modes, cfg.replicas);
    }

    for (const auto& suite : cfg.suites) {
        if (suite == "solve")
            suite_solve(st, dir);
        else if (suite == "residuals")
            suite_residuals(st);
        else if (suite == "audits")
            suite_audits(st, dir);
        else if (suite == "e100")
            suite_e100(st, dir);
        else if (suite == "wtheta")
            suite_wtheta(st, dir);
        else if (suite == "gaussianity")
            suite_gaussianity(st);
        else if (suite == "picard")
            suite_picard(st, dir);
        else if (suite == "strictup")
            suite_strictup(st, dir);
        else if (suite == "shift-oracle")
            suite_shift_oracle(st);
        else if (suite == "contdep")
            suite_contdep(st, dir);
        else
            throw std::invalid_argument("unknown suite: " + suite);
    }
    if (st.audits_csv.is_open()) st.audits_csv.close();
    if (st.fits_csv.is_open()) st.fits_csv.close();

    bool all_pass = true;
    for (const auto& [key, val] : st.verdicts.items()) {
        (void)key;
        all_pass = all_pass && val.get<bool>();
    }

    json summary;
    summary["schema_version"] = 1;
    summary["preset"] = cfg.preset;
    summary["seed"] = cfg.seed;
    summary["replicas"] = cfg.replicas;
    json model;
    model["operator"] = cfg.operator_name;
    model["modes"] = cfg.modes;
    model["length"] = cfg.length;
    model["beta"] = cfg.beta;
    model["sigma"] = cfg.sigma;
    if (cfg.delta)
        model["delta"] = *cfg.delta;
    else
        model["delta"] = nullptr;
    model["eta"] = cfg.eta;
    model["rho"] = cfg.rho;
    model["horizon"] = cfg.horizon;
    model["cells"] = cfg.cells;
    model["grading"] = cfg.grading;
    model["refine"] = cfg.refine;
    model["forcing"] = cfg.forcing_kind;
    model["forcing_scale"] = cfg.forcing_scale;
    model["noise"] = cfg.noise_kind;
    model["noise_scale"] = cfg.noise_scale;
    model["xi"] = cfg.xi_kind;
    model["xi_scale"] = cfg.xi_scale;
    model["f2_scale"] = cfg.f2_scale;
    summary["model"] = model;
    summary["suites"] = cfg.suites;
    summary["verdicts"] = st.verdicts;
    summary["values"] = st.values;
    summary["artifacts"] = st.artifacts;
    summary["all_pass"] = all_pass;
    {
        std::ofstream out(dir + "/summary.json");
        if (!out) throw std::runtime_error("cannot write summary.json");
        out << summary.dump(2) << '\n';
    }
    {
        const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        std::ofstream out(dir + "/timing.log");
        out << "wall_ms=" << ms << '\n';
    }
    return all_pass ? 0 : 1;
}

}  // namespace spdelab
