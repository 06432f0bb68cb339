#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "bmfim/encoding.hpp"
#include "bmfim/fisher.hpp"
#include "bmfim/gibbs.hpp"
#include "bmfim/moments.hpp"
#include "bmfim/sampler.hpp"
#include "bmfim/spectral.hpp"

namespace bmfim {

enum class Optimizer { Sgd, Ngd };
/// Where model expectations come from: exhaustive enumeration or the Metropolis sampler.
enum class ExpectationSource { Exact, Sampled };

std::string_view to_string(Optimizer o) noexcept;
std::string_view to_string(ExpectationSource s) noexcept;
Optimizer parse_optimizer(std::string_view text);
ExpectationSource parse_expectation_source(std::string_view text);

struct TrainConfig {
    Encoding encoding = Encoding::Ising;
    Optimizer optimizer = Optimizer::Sgd;
    double beta = 1.0;
    int iterations = 500;
    double eta_ngd = 0.01;
    double eta_sgd_numerator = 0.01;
    double damping = 0.001;
    ExpectationSource moment_source = ExpectationSource::Exact;
    ExpectationSource fim_source = ExpectationSource::Exact;
    std::size_t sample_count = 10000;
    SamplerOptions sampler;
    std::uint64_t seed = 0;
    int trace_every = 1;
    /// Iterations at which model moments (orders 1-4) are kept in the trace.
    std::vector<int> moment_snapshots;
    /// Iterations at which the full FIM is kept in the trace.
    std::vector<int> fim_snapshots;
    /// Starting point; zero parameters when empty.
    std::optional<ModelParams> initial;

    /// Throws InvalidArgument when a field is out of range.
    void validate() const;
};

struct TraceRow {
    int iteration = 0;
    double kl = 0.0;
    double grad_norm = 0.0;
    double eta = 0.0;
    double lambda_max = 0.0;
    double lambda_min = 0.0;
    double spectral_entropy = 0.0;
    double offblock_ratio = 0.0;
    double schur_lhs = 0.0;
    double schur_rhs = 0.0;
    bool schur_fallback = false;
    Eigen::VectorXd theta;
    std::vector<double> eigenvalues;
};

struct TrainingTrace {
    TrainConfig config;
    int d = 0;
    std::vector<TraceRow> rows;
    std::map<int, MomentTable> moments;
    std::map<int, FimMatrix> fims;
    /// Set when the divergence guard stopped the run early.
    std::optional<std::string> abort_reason;
    int schur_fallbacks = 0;
    double wall_seconds = 0.0;

    const TraceRow& final_row() const { return rows.back(); }
    /// First recorded iteration with kl <= target, if any.
    std::optional<int> first_reaching(double target_kl) const;
};

/// theta - eta * grad.
Eigen::VectorXd sgd_step(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double eta);

/// numerator / lambda_max(F); throws InvalidArgument if lambda_max <= 0.
double eta_sgd_policy(const Spectrum& spectrum, double numerator);
double eta_sgd_policy(const FimMatrix& fim, double numerator);

/// theta - eta * delta with (F + damping I) delta = grad, via Cholesky.
/// Throws NumericalError (with a condition estimate) when the system is not
/// positive definite.
Eigen::VectorXd ngd_step(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad,
                         const FimMatrix& fim, double eta, double damping);

/// Gradient-based maximum-likelihood training from the data distribution.
///
/// Iteration t evaluates the model at theta_t, records a trace row (every
/// trace_every iterations, and always the last), then steps. Row
/// `iterations` holds the final parameters; no step is taken after it.
TrainingTrace train(const EmpiricalDistribution& data, const TrainConfig& config);

/// Divergence guard thresholds.
inline constexpr double kThetaAbortNorm = 1e3;
inline constexpr double kKlAbortFactor = 10.0;

}  // namespace bmfim
