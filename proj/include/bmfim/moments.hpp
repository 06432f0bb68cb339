#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bmfim/encoding.hpp"

namespace bmfim {

enum class MomentSource { Exact, Empirical };

/// Number of k-subsets of {0..n-1}; exact for the small arguments used here.
std::uint64_t binomial(int n, int k) noexcept;

/// Lexicographic rank of a strictly increasing index tuple among all
/// tuples of the same length over d variables.
std::size_t subset_rank(int d, std::span<const int> sorted);

/// Inverse of subset_rank for tuples of length k.
std::vector<int> subset_unrank(int d, int k, std::size_t rank);

/// Expectations of products of 1 to 4 distinct variables.
///
/// Order k holds E[v_{i1} ... v_{ik}] for every i1 < ... < ik, in
/// lexicographic tuple order. The values v are spins (+-1) or bits (0/1)
/// according to the encoding.
class MomentTable {
public:
    MomentTable(int d, Encoding encoding, int max_order, MomentSource source);

    int size() const noexcept { return d_; }
    Encoding encoding() const noexcept { return encoding_; }
    int max_order() const noexcept { return max_order_; }
    MomentSource source() const noexcept { return source_; }

    /// All moments of order k (1..max_order) in lexicographic order.
    std::span<const double> order(int k) const;
    std::span<double> order(int k);

    /// Moment of an increasing index tuple; the empty tuple yields 1.
    /// Throws InvalidArgument if the tuple exceeds max_order.
    double at(std::span<const int> sorted) const;
    double at(std::initializer_list<int> sorted) const {
        return at(std::span<const int>(sorted.begin(), sorted.size()));
    }

    /// First and second moments in the flat parameter layout
    /// (E[v_1..v_d], E[v_i v_j] for i < j).
    Eigen::VectorXd flat_first_second() const;

private:
    int d_;
    Encoding encoding_;
    int max_order_;
    MomentSource source_;
    std::array<std::vector<double>, 4> orders_;
};

/// A configuration integer with a probability weight.
struct WeightedConfig {
    std::uint64_t key;
    double weight;
};

/// Moments of the distribution sum_k weight_k * delta(key_k), evaluated in
/// the alphabet of `encoding`. Weights must sum to one.
MomentTable moments_from_weights(int d, Encoding encoding, int max_order,
                                 std::span<const WeightedConfig> weighted,
                                 MomentSource source);

}  // namespace bmfim
