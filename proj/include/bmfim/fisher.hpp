#pragma once

#include <iosfwd>

#include <Eigen/Core>

#include "bmfim/encoding.hpp"
#include "bmfim/moments.hpp"

namespace bmfim {

/// Energy derivatives dE/dtheta in the flat layout: (v_1..v_d, v_i v_j for i < j).
Eigen::VectorXd sufficient_stats(const BinaryConfig& config);

/// g = beta (E_data[phi] - E_model[phi]), the gradient of the average negative
/// log-likelihood. Optimizers apply theta <- theta - eta * (preconditioned) g.
Eigen::VectorXd likelihood_gradient(const MomentTable& data, const MomentTable& model, double beta);

/// Fisher information over the flat parameter index.
///
/// The first d rows/columns are the linear parameters (h or Q_ii), the rest
/// the pair parameters.
struct FimMatrix {
    int d = 0;
    Encoding encoding = Encoding::Ising;
    MomentSource source = MomentSource::Exact;
    Eigen::MatrixXd matrix;
};

/// Reduces a product of variables to the set whose moment equals its
/// expectation: spins cancel in pairs (s^2 = 1), bits are idempotent (x^2 = x).
/// Input may be any multiset of indices; output is sorted, without repeats.
std::vector<int> reduce_product(std::span<const int> indices, Convention convention);

/// F[a,b] = beta^2 (E[phi_a phi_b] - E[phi_a] E[phi_b]) from a complete
/// order-4 moment table.
FimMatrix fim_from_moments(const MomentTable& moments, double beta = 1.0);

struct FimBlocks {
    Eigen::MatrixXd f11;  // linear x linear
    Eigen::MatrixXd f12;  // linear x pair
    Eigen::MatrixXd f21;  // pair x linear
    Eigen::MatrixXd f22;  // pair x pair
};

FimBlocks fim_blocks(const FimMatrix& fim);

/// ||F12||_F / ||F||_F.
double offblock_ratio(const FimMatrix& fim);

/// Dense CSV: first line `encoding,d,iteration` values, then one matrix row per line.
void write_fim_csv(std::ostream& out, const FimMatrix& fim, long iteration);

}  // namespace bmfim
