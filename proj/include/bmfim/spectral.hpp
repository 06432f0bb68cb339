#pragma once

#include <vector>

#include <Eigen/Core>

#include "bmfim/fisher.hpp"

namespace bmfim {

/// Eigenvalues of a FIM sorted descending, negatives clamped to zero.
struct Spectrum {
    std::vector<double> eigenvalues;
    int clamped_negatives = 0;
    /// Smallest eigenvalue before clamping.
    double raw_min = 0.0;

    double max() const { return eigenvalues.front(); }
    double min() const { return eigenvalues.back(); }
};

/// Tolerance below zero accepted for eigenvalues of exact FIMs.
inline constexpr double kPsdTolerance = 1e-9;

/// Full spectrum of (F + F^T)/2. Exact-source FIMs with an eigenvalue below
/// -kPsdTolerance are rejected; empirical ones are clamped.
Spectrum fim_spectrum(const FimMatrix& fim);

/// Eigenvalues of a symmetric matrix, descending.
std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& m);

/// Eigenpairs of (m + m^T)/2; column k of `vectors` belongs to values[k], descending.
struct SymmetricEigen {
    Eigen::VectorXd values;
    Eigen::MatrixXd vectors;
};
SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& m);

/// -sum p_i log p_i with p_i = lambda_i / sum lambda (natural log).
double spectral_entropy(const Spectrum& spectrum);

struct SchurBound {
    double lhs = 0.0;       // lambda_min(F)
    double rhs = 0.0;       // lambda_min(F22 - F21 (F11 + damping I)^-1 F12)
    bool holds = false;     // lhs <= rhs + 1e-9
    double damping = 0.0;   // damping actually used
    bool fallback = false;  // singular F11 forced the 1e-10 fallback damping
};

inline constexpr double kSchurFallbackDamping = 1e-10;

/// Minimum-eigenvalue bound through the Schur complement of the linear block.
///
/// If F11 + damping I is singular and `allow_fallback` is false, throws
/// NumericalError naming the allow_fallback flag; otherwise retries with
/// kSchurFallbackDamping.
SchurBound schur_bound(const FimMatrix& fim, double damping = 0.0, bool allow_fallback = false);

}  // namespace bmfim
