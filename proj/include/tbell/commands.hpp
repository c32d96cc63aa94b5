#pragma once

#include <string>
#include <utility>
#include <vector>

#include "tbell/config.hpp"

namespace tbell {

struct CommandOutput {
    /// Report in the configured format.
    std::string text;
    /// verify: every item passed. optimize: optimizer and grid agree within
    /// 1e-3. Always true for predict and simulate; inequality violations are
    /// results, not failures.
    bool ok = true;
    /// verify only: (item name, passed).
    std::vector<std::pair<std::string, bool>> items;
};

/// Closed-form pair probabilities, expectations and inequality values.
CommandOutput cmd_predict(const ExperimentConfig& config);

/// Runs the ensemble and evaluates every applicable inequality. When
/// config.out_dir is set it also writes count_table.csv, run_log.csv (with
/// log_runs), one report_<ID>.json per inequality, and the summary report.
CommandOutput cmd_simulate(const ExperimentConfig& config);

/// maximize() next to grid_oracle() and the reference configuration.
CommandOutput cmd_optimize(const ExperimentConfig& config);

struct VerifyOptions {
    /// Evaluate hidden marginals with the faulty repeated-term N(b+c-) rule.
    bool repeated_term_fault = false;
};

/// Built-in invariant suite, seeded from config.protocol.seed.
CommandOutput cmd_verify(const ExperimentConfig& config, const VerifyOptions& options = {});

}  // namespace tbell
