#pragma once

// Brute-force reference computations used as independent oracles in tests
// and in the acceptance checks. Nothing here calls the production paths it is
// meant to check (energies, enumeration, moment tables, FIM assembly).

#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Core>

#include "bmfim/encoding.hpp"
#include "bmfim/rng.hpp"

namespace bmfim::reference {

/// Energy from the textbook double sum, with the coefficient layout rebuilt by
/// an explicit running counter.
double energy(const ModelParams& params, const std::vector<int>& values);

/// Variable values of configuration `key` in the alphabet of `encoding`.
std::vector<int> values_of(std::uint64_t key, int d, Encoding encoding);

/// exp(-beta E) / Z for every configuration, naive (non-log) normalization.
std::vector<double> probabilities(const ModelParams& params, double beta);

/// beta^2 (E[phi phi^T] - E[phi] E[phi]^T) by summing over all configurations.
Eigen::MatrixXd covariance_fim(const ModelParams& params, double beta);

/// Expectation of prod_{i in subset} v_i by enumeration.
double moment(const ModelParams& params, double beta, const std::vector<int>& subset);

/// -(1/N) sum_n log P_theta(x_n) with Z computed by a naive sum.
double nll(const ModelParams& params, const std::vector<std::uint64_t>& data, double beta);

using ScalarFn = std::function<double(const Eigen::VectorXd&)>;

/// Central-difference gradient.
Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double step);

/// Central-difference Hessian (four-point stencil off the diagonal).
Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& x, double step);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration_max(const Eigen::MatrixXd& m, double rel_tol = 1e-13, int max_iter = 200000);

/// Random symmetric PSD matrix A A^T / n with Gaussian A.
Eigen::MatrixXd random_psd(int n, Rng& rng);

/// Random parameters with entries ~ scale * Normal(0, 1).
ModelParams random_params(Encoding encoding, int d, double scale, Rng& rng);

}  // namespace bmfim::reference
