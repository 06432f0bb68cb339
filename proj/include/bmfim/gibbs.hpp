#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "bmfim/encoding.hpp"
#include "bmfim/moments.hpp"

namespace bmfim {

/// Exhaustive enumeration is refused above this many variables.
inline constexpr int kMaxEnumerationVariables = 24;

/// Gibbs-Boltzmann distribution P(x) = exp(-beta E(x)) / Z over all 2^d
/// configurations, indexed by canonical configuration integer.
struct ExactDistribution {
    int d = 0;
    double beta = 1.0;
    double log_partition = 0.0;
    std::vector<double> log_prob;

    double prob(std::uint64_t key) const;
};

/// Normalized counts of observed configurations (the data distribution).
class EmpiricalDistribution {
public:
    explicit EmpiricalDistribution(int d);

    void add(std::uint64_t key, std::uint64_t count = 1);

    int size() const noexcept { return d_; }
    std::uint64_t total() const noexcept { return total_; }
    const std::map<std::uint64_t, std::uint64_t>& counts() const noexcept { return counts_; }

    std::vector<WeightedConfig> weighted() const;
    double entropy() const;

private:
    int d_;
    std::uint64_t total_ = 0;
    std::map<std::uint64_t, std::uint64_t> counts_;
};

/// Throws EnumerationLimit for d > kMaxEnumerationVariables, InvalidArgument for beta <= 0.
ExactDistribution enumerate_distribution(const ModelParams& params, double beta);

/// D(p || q) in nats, with 0 log 0 = 0.
double kl_divergence(const ExactDistribution& p, const ExactDistribution& q);
double kl_divergence(const EmpiricalDistribution& p, const ExactDistribution& q);

/// Moments of an enumerated distribution in the alphabet of `encoding`.
MomentTable exact_moments(const ExactDistribution& dist, Encoding encoding, int max_order);

/// Moments of a data distribution in the alphabet of `encoding`.
MomentTable empirical_moments(const EmpiricalDistribution& data, Encoding encoding, int max_order);

class SampleSet;

/// n independent categorical draws; BIT-convention SampleSet, deterministic in seed.
SampleSet sample_exact(const ExactDistribution& dist, std::size_t n, std::uint64_t seed);

}  // namespace bmfim
