#include "bmfim/optim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Cholesky>

#include "bmfim/error.hpp"
#include "bmfim/io.hpp"
#include "bmfim/rng.hpp"

namespace bmfim {

std::string_view to_string(Optimizer o) noexcept { return o == Optimizer::Sgd ? "sgd" : "ngd"; }

std::string_view to_string(ExpectationSource s) noexcept {
    return s == ExpectationSource::Exact ? "exact" : "sa";
}

Optimizer parse_optimizer(std::string_view text) {
    if (text == "sgd" || text == "SGD") return Optimizer::Sgd;
    if (text == "ngd" || text == "NGD") return Optimizer::Ngd;
    throw InvalidArgument("unknown optimizer '" + std::string(text) + "' (expected sgd or ngd)");
}

ExpectationSource parse_expectation_source(std::string_view text) {
    if (text == "exact") return ExpectationSource::Exact;
    if (text == "sa" || text == "sampled") return ExpectationSource::Sampled;
    throw InvalidArgument("unknown expectation source '" + std::string(text) + "' (expected exact or sa)");
}

void TrainConfig::validate() const {
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive");
    if (iterations < 1) throw InvalidArgument("iterations must be at least 1");
    if (!(eta_ngd > 0.0) || !(eta_sgd_numerator > 0.0)) throw InvalidArgument("learning rates must be positive");
    if (!(damping >= 0.0)) throw InvalidArgument("damping must be nonnegative");
    if (trace_every < 1) throw InvalidArgument("trace_every must be at least 1");
    if (sample_count < 1) throw InvalidArgument("sample count must be positive");
    sampler.schedule.validate();
}

std::optional<int> TrainingTrace::first_reaching(double target_kl) const {
    for (const auto& row : rows)
        if (row.kl <= target_kl) return row.iteration;
    return std::nullopt;
}

Eigen::VectorXd sgd_step(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad, double eta) {
    if (theta.size() != grad.size()) throw DimensionError("parameter and gradient lengths differ");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("learning rate must be positive and finite");
    if (!theta.allFinite() || !grad.allFinite()) throw NumericalError("non-finite parameters or gradient");
    return theta - eta * grad;
}

double eta_sgd_policy(const Spectrum& spectrum, double numerator) {
    if (spectrum.eigenvalues.empty() || !(spectrum.max() > 0.0))
        throw InvalidArgument("learning-rate policy needs lambda_max > 0");
    return numerator / spectrum.max();
}

double eta_sgd_policy(const FimMatrix& fim, double numerator) {
    return eta_sgd_policy(fim_spectrum(fim), numerator);
}

Eigen::VectorXd ngd_step(const Eigen::VectorXd& theta, const Eigen::VectorXd& grad, const FimMatrix& fim,
                         double eta, double damping) {
    if (theta.size() != grad.size() || fim.matrix.rows() != theta.size())
        throw DimensionError("parameter, gradient and FIM sizes differ");
    if (!(eta > 0.0) || !std::isfinite(eta)) throw InvalidArgument("learning rate must be positive and finite");
    if (!(damping >= 0.0)) throw InvalidArgument("damping must be nonnegative");
    if (!theta.allFinite() || !grad.allFinite() || !fim.matrix.allFinite())
        throw NumericalError("non-finite parameters, gradient or FIM");

    const auto n = theta.size();
    const Eigen::MatrixXd metric = 0.5 * (fim.matrix + fim.matrix.transpose()) +
                                   damping * Eigen::MatrixXd::Identity(n, n);
    Eigen::LLT<Eigen::MatrixXd> llt(metric);
    if (llt.info() != Eigen::Success) {
        const auto ev = symmetric_eigenvalues(metric);
        throw NumericalError("damped FIM is not positive definite (lambda_max = " + format_double(ev.front()) +
                             ", lambda_min = " + format_double(ev.back()) + ")");
    }
    const Eigen::VectorXd delta = llt.solve(grad);
    return theta - eta * delta;
}

namespace {

TraceRow diagnostic_row(int iteration, const Eigen::VectorXd& theta) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    TraceRow row;
    row.iteration = iteration;
    row.kl = row.grad_norm = row.eta = row.lambda_max = row.lambda_min = nan;
    row.spectral_entropy = row.offblock_ratio = row.schur_lhs = row.schur_rhs = nan;
    row.theta = theta;
    return row;
}

bool contains(const std::vector<int>& v, int x) { return std::find(v.begin(), v.end(), x) != v.end(); }

}  // namespace

TrainingTrace train(const EmpiricalDistribution& data, const TrainConfig& config) {
    config.validate();
    if (data.total() == 0) throw InvalidArgument("training data is empty");
    const auto start = std::chrono::steady_clock::now();
    const int d = data.size();
    const Encoding enc = config.encoding;

    TrainingTrace trace;
    trace.config = config;
    trace.d = d;

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count(d)));
    if (config.initial) {
        if (config.initial->size() != d)
            throw DimensionError("initial parameters have d=" + std::to_string(config.initial->size()) +
                                 " but the data has d=" + std::to_string(d));
        theta = convert_params(*config.initial, enc).theta();
    }

    const MomentTable data_moments = empirical_moments(data, enc, 2);
    const bool any_exact = config.moment_source == ExpectationSource::Exact ||
                           config.fim_source == ExpectationSource::Exact;
    const bool any_sampled = config.moment_source == ExpectationSource::Sampled ||
                             config.fim_source == ExpectationSource::Sampled;
    double initial_kl = 0.0;

    for (int t = 0; t <= config.iterations; ++t) {
        const ModelParams params(enc, d, theta);
        const ExactDistribution dist = enumerate_distribution(params, config.beta);
        const double kl = kl_divergence(data, dist);
        if (t == 0) initial_kl = kl;

        std::optional<MomentTable> exact;
        std::optional<MomentTable> sampled;
        if (any_exact) exact = exact_moments(dist, enc, 4);
        if (any_sampled) {
            const auto samples = metropolis_sample(params, config.beta, config.sampler, config.sample_count,
                                                   derive_seed(config.seed, static_cast<std::uint64_t>(t)));
            sampled = empirical_moments(samples, enc, 4);
        }
        const MomentTable& model = config.moment_source == ExpectationSource::Exact ? *exact : *sampled;
        const MomentTable& fim_moments = config.fim_source == ExpectationSource::Exact ? *exact : *sampled;

        const FimMatrix fim = fim_from_moments(fim_moments, config.beta);
        const Eigen::VectorXd grad = likelihood_gradient(data_moments, model, config.beta);
        const Spectrum spectrum = fim_spectrum(fim);
        const SchurBound schur = schur_bound(fim, 0.0, /*allow_fallback=*/true);
        const double eta = config.optimizer == Optimizer::Sgd
                               ? eta_sgd_policy(spectrum, config.eta_sgd_numerator)
                               : config.eta_ngd;

        const bool kl_blowup = t > 0 && kl - initial_kl > kKlAbortFactor * initial_kl;
        const bool last = t == config.iterations || kl_blowup;
        if (t % config.trace_every == 0 || last) {
            TraceRow row;
            row.iteration = t;
            row.kl = kl;
            row.grad_norm = grad.norm();
            row.eta = eta;
            row.lambda_max = spectrum.max();
            row.lambda_min = spectrum.raw_min;
            row.spectral_entropy = spectral_entropy(spectrum);
            row.offblock_ratio = offblock_ratio(fim);
            row.schur_lhs = schur.lhs;
            row.schur_rhs = schur.rhs;
            row.schur_fallback = schur.fallback;
            row.theta = theta;
            row.eigenvalues = spectrum.eigenvalues;
            trace.rows.push_back(std::move(row));
        }
        if (schur.fallback) ++trace.schur_fallbacks;
        if (contains(config.moment_snapshots, t)) trace.moments.emplace(t, model);
        if (contains(config.fim_snapshots, t)) trace.fims.emplace(t, fim);

        if (kl_blowup) {
            trace.abort_reason = "KL rose from " + format_double(initial_kl) + " to " + format_double(kl) +
                                 " at iteration " + std::to_string(t);
            break;
        }
        if (t == config.iterations) break;

        theta = config.optimizer == Optimizer::Sgd ? sgd_step(theta, grad, eta)
                                                   : ngd_step(theta, grad, fim, eta, config.damping);
        if (!theta.allFinite() || theta.lpNorm<Eigen::Infinity>() > kThetaAbortNorm) {
            trace.rows.push_back(diagnostic_row(t + 1, theta));
            trace.abort_reason = "parameters left the finite range (|theta|_inf > " +
                                 format_double(kThetaAbortNorm) + ") at iteration " + std::to_string(t + 1);
            break;
        }
    }

    trace.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return trace;
}

}  // namespace bmfim
