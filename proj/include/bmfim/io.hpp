#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "bmfim/data.hpp"
#include "bmfim/encoding.hpp"
#include "bmfim/optim.hpp"

namespace bmfim {

/// Shortest-safe round-trip text for a double (17 significant digits).
std::string format_double(double value);

/// Writes `contents` to a temporary sibling and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

// Model parameter files (grammar in docs/formats.md):
//   encoding ising|qubo
//   d <n>
//   h <i> <value>        (Ising)     Q <i> <i> <value>  (QUBO diagonal)
//   J <i> <j> <value>    (Ising)     Q <i> <j> <value>  (QUBO, i < j)
// Indices are 0-based; '#' starts a comment; omitted coefficients are zero.
void write_params(std::ostream& out, const ModelParams& params);
std::string params_to_string(const ModelParams& params);
ModelParams read_params(std::istream& in);
ModelParams params_from_string(std::string_view text);

// Dataset files: header `kind d count seed`, then one 0/1 string per sample.
std::string dataset_to_string(const Dataset& dataset);
Dataset dataset_from_string(std::string_view text);
/// JSON sidecar with generating parameters (and the true h, J when present).
std::string dataset_metadata_json(const Dataset& dataset);

inline constexpr int kTraceSchemaVersion = 1;
inline constexpr std::string_view kTraceHeader =
    "iter,kl,grad_norm,eta,lambda_max,lambda_min,spectral_entropy,offblock_ratio,schur_lhs,schur_rhs";

/// Main trace: kTraceHeader then one row per recorded iteration.
std::string trace_csv(const TrainingTrace& trace);
/// Wide eigenvalue table: iter,ev0,ev1,... (descending).
std::string eigen_csv(const TrainingTrace& trace);
/// Wide parameter table: iter,theta0,theta1,...
std::string theta_csv(const TrainingTrace& trace);
/// Long table iter,order,rank,value of the moment snapshots.
std::string moments_csv(const TrainingTrace& trace);
/// Run metadata including the full config and schema version.
std::string trace_metadata_json(const TrainingTrace& trace, std::string_view dataset_digest);

/// Rows parsed back from a trace CSV (θ and eigenvalues left empty).
std::vector<TraceRow> parse_trace_csv(std::string_view text);

}  // namespace bmfim
