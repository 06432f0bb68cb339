#include "bmfim/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "bmfim/error.hpp"
#include "bmfim/io.hpp"

namespace bmfim {

std::vector<double> symmetric_eigenvalues(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return {};
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    std::vector<double> ev(solver.eigenvalues().data(), solver.eigenvalues().data() + solver.eigenvalues().size());
    std::sort(ev.begin(), ev.end(), std::greater<>());
    return ev;
}

SymmetricEigen symmetric_eigen(const Eigen::MatrixXd& m) {
    const Eigen::MatrixXd sym = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
    if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver did not converge");
    // Eigen sorts ascending; reverse to descending.
    return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

Spectrum fim_spectrum(const FimMatrix& fim) {
    if (fim.matrix.rows() == 0) throw InvalidArgument("empty FIM");
    if (!fim.matrix.allFinite()) throw NumericalError("FIM has non-finite entries");
    Spectrum spec;
    spec.eigenvalues = symmetric_eigenvalues(fim.matrix);
    spec.raw_min = spec.eigenvalues.back();
    if (fim.source == MomentSource::Exact && spec.raw_min < -kPsdTolerance)
        throw NumericalError("exact FIM is not positive semidefinite: lambda_min = " + format_double(spec.raw_min));
    for (double& ev : spec.eigenvalues) {
        if (ev < 0.0) {
            ev = 0.0;
            ++spec.clamped_negatives;
        }
    }
    return spec;
}

double spectral_entropy(const Spectrum& spectrum) {
    double total = 0.0;
    for (double ev : spectrum.eigenvalues) total += ev;
    if (!(total > 0.0)) throw InvalidArgument("spectral entropy of an all-zero spectrum is undefined");
    double s = 0.0;
    for (double ev : spectrum.eigenvalues) {
        if (ev <= 0.0) continue;
        const double p = ev / total;
        s -= p * std::log(p);
    }
    return s;
}

namespace {

constexpr double kSingularRcond = 1e-14;

bool factor(const Eigen::MatrixXd& m, Eigen::LLT<Eigen::MatrixXd>& llt) {
    llt.compute(m);
    return llt.info() == Eigen::Success && llt.rcond() > kSingularRcond;
}

}  // namespace

SchurBound schur_bound(const FimMatrix& fim, double damping, bool allow_fallback) {
    if (!(damping >= 0.0)) throw InvalidArgument("damping must be nonnegative");
    if (!fim.matrix.allFinite()) throw NumericalError("FIM has non-finite entries");
    const auto blocks = fim_blocks(fim);
    SchurBound out;
    out.lhs = symmetric_eigenvalues(fim.matrix).back();
    out.damping = damping;

    if (blocks.f22.rows() == 0) {
        // No pair block: the minimum over an empty spectrum is +infinity.
        out.rhs = std::numeric_limits<double>::infinity();
        out.holds = true;
        return out;
    }

    const auto d = blocks.f11.rows();
    Eigen::LLT<Eigen::MatrixXd> llt;
    if (!factor(blocks.f11 + damping * Eigen::MatrixXd::Identity(d, d), llt)) {
        if (!allow_fallback)
            throw NumericalError("F11 is singular at damping " + format_double(damping) +
                                 "; enable allow_fallback to retry with damping 1e-10");
        out.damping = damping + kSchurFallbackDamping;
        out.fallback = true;
        if (!factor(blocks.f11 + out.damping * Eigen::MatrixXd::Identity(d, d), llt))
            throw NumericalError("F11 is singular even with fallback damping");
    }
    const Eigen::MatrixXd schur = blocks.f22 - blocks.f21 * llt.solve(blocks.f12);
    out.rhs = symmetric_eigenvalues(schur).back();
    out.holds = out.lhs <= out.rhs + 1e-9;
    return out;
}

}  // namespace bmfim
