#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "spdelab/experiment.hpp"
#include "spdelab/semilinear.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string out;
    std::string increments;
    uint64_t seed = 0;
    bool seed_set = false;
    int workers = -1;
};

spdelab::ExperimentConfig resolve(const CommonFlags& flags) {
    spdelab::ExperimentConfig cfg = flags.config.empty()
                                        ? spdelab::preset_config("cable-linear")
                                        : spdelab::load_config(flags.config);
    if (flags.seed_set) cfg.seed = flags.seed;
    if (flags.workers >= 0) cfg.workers = flags.workers;
    if (!flags.out.empty()) cfg.out_dir = flags.out;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectral laboratory for stochastic parabolic evolution equations"};
    app.require_subcommand(1);
    CommonFlags flags;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", flags.config, "experiment config file");
        cmd->add_option("--seed", flags.seed, "override the master seed")
            ->each([&](const std::string&) { flags.seed_set = true; });
        cmd->add_option("--workers", flags.workers, "replica worker threads (0 = hardware)");
        cmd->add_option("--out", flags.out, "output directory");
    };

    auto* run_cmd = app.add_subcommand("run", "run an experiment and write its artifacts");
    add_common(run_cmd);
    auto* replay_cmd =
        app.add_subcommand("replay", "rerun an experiment from exported Wiener increments");
    add_common(replay_cmd);
    replay_cmd->add_option("--increments", flags.increments, "increments CSV to consume")
        ->required();
    auto* list_cmd = app.add_subcommand("list-presets", "list experiment presets");
    auto* validate_cmd =
        app.add_subcommand("validate-config", "check hypothesis windows without running");
    add_common(validate_cmd);

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) {
            for (const auto& name : spdelab::list_presets()) std::printf("%s\n", name.c_str());
            return 0;
        }
        const auto cfg = resolve(flags);
        if (validate_cmd->parsed()) {
            spdelab::validate_config(cfg);
            std::printf("config ok: preset=%s modes=%d cells=%d replicas=%d\n",
                        cfg.preset.c_str(), cfg.modes, cfg.cells, cfg.replicas);
            return 0;
        }
        if (run_cmd->parsed()) return spdelab::run_experiment(cfg);
        if (replay_cmd->parsed()) return spdelab::run_experiment(cfg, flags.increments);
    } catch (const spdelab::PicardDivergenceError& e) {
        std::fprintf(stderr, "iteration failure: %s\n", e.what());
        return 1;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "hypothesis violation: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "invalid configuration: %s\n", e.what());
        return 2;
    } catch (const std::runtime_error& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
