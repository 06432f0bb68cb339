#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "bmfim/data.hpp"
#include "bmfim/optim.hpp"

namespace bmfim::harness {

/// One training run: the dataset recipe and the trainer settings.
struct RunSpec {
    std::string id;
    DatasetSpec dataset;
    TrainConfig config;
};

struct RunResult {
    RunSpec spec;
    std::string dataset_digest;
    TrainingTrace trace;
};

/// Short dataset label used in run ids and report tables, e.g. "bas2" or "ising-jc1.0".
std::string dataset_label(const DatasetSpec& spec);

/// "<dataset>-<encoding>-<optimizer>-<exact|sa>-s<seed>".
std::string run_id(const DatasetSpec& dataset, const TrainConfig& config);

/// Cartesian product of datasets, encodings, optimizers and seeds. The seed
/// is written to both the dataset spec and the train config.
struct ExperimentPlan {
    std::vector<DatasetSpec> datasets;
    std::vector<Encoding> encodings{Encoding::Ising, Encoding::Qubo};
    std::vector<Optimizer> optimizers{Optimizer::Sgd, Optimizer::Ngd};
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4};
    TrainConfig base;

    /// Throws InvalidArgument on duplicate run ids.
    std::vector<RunSpec> expand() const;
};

struct RunOptions {
    int jobs = 1;
    /// When set, each run is persisted under out_dir/<id>/ as soon as it finishes.
    std::filesystem::path out_dir;
    bool write_fims = false;
};

/// Generates every distinct dataset once, then trains the runs on a pool of
/// `jobs` workers. Results come back in input order regardless of scheduling.
std::vector<RunResult> run_all(const std::vector<RunSpec>& runs, const RunOptions& options);

RunResult run_one(const RunSpec& run, const Dataset& dataset);

/// trace.csv, eigs.csv, theta.csv, moments.csv, meta.json and, if asked,
/// fim_<iter>.csv for each FIM snapshot. Every file is written atomically.
void write_run(const std::filesystem::path& dir, const RunResult& result, bool write_fims = false);

/// Reads back a directory written by write_run. Throws IoError when the
/// schema version in meta.json differs from kTraceSchemaVersion.
RunResult load_run(const std::filesystem::path& dir);

/// Output root: $BMFIM_OUT when set and non-empty, else `fallback`.
std::filesystem::path output_root(const std::filesystem::path& fallback);

}  // namespace bmfim::harness
