#pragma once

#include <string>

#include "spdelab/config.hpp"

namespace spdelab {

// Runs every suite named by the config and writes the artifact set
// (solutions.csv, audits.csv, holder_fits.csv, picard_trace.csv,
// increments.csv, summary.json) into the output directory. The summary is
// byte-deterministic for a fixed config + seed; wall time goes to a separate
// timing.log. Returns the process exit code: 0 all verdicts pass, 1 a
// verdict failed.
int run_experiment(const ExperimentConfig& cfg, const std::string& replay_increments = "");

}  // namespace spdelab
