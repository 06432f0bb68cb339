#pragma once

#include <filesystem>
#include <vector>

#include "bmfim/harness/criteria.hpp"

namespace bmfim::harness {

struct ReproduceOptions {
    std::filesystem::path out_dir;
    int jobs = 1;
    int seeds = 5;
    /// Samples per iteration for the Metropolis cross-check; 0 skips it.
    std::size_t sampled_count = 10000;
    /// Seeds used by the cross-check (a prefix of the main seeds).
    int sampled_seeds = 1;
    /// Rebuild the report from run directories already under out_dir/runs.
    bool report_only = false;
};

struct ReproduceResult {
    std::vector<CriterionResult> criteria;
    std::vector<RunResult> exact;
    std::vector<RunResult> sampled;
};

/// Runs the matrix (or reloads it), writes figure tables and plots, and
/// summary.txt with one line per criterion.
ReproduceResult reproduce(const ReproduceOptions& options);

/// Writes the figure tables and plots for a finished run matrix.
void write_figures(const std::filesystem::path& dir, const std::vector<RunResult>& exact, int seeds);

}  // namespace bmfim::harness
