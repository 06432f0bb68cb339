#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bmfim/encoding.hpp"
#include "bmfim/gibbs.hpp"
#include "bmfim/moments.hpp"

namespace bmfim {

enum class SampleOrigin { Exact, Annealed };

/// n x d block of configurations, row-major.
class SampleSet {
public:
    SampleSet(int d, Convention convention, SampleOrigin origin, std::uint64_t seed);

    void push_back(std::span<const int> row);
    void push_key(std::uint64_t key);

    int size() const noexcept { return d_; }
    std::size_t count() const noexcept { return d_ == 0 ? 0 : values_.size() / static_cast<std::size_t>(d_); }
    Convention convention() const noexcept { return convention_; }
    SampleOrigin origin() const noexcept { return origin_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const int> row(std::size_t n) const;
    BinaryConfig config(std::size_t n) const;
    std::uint64_t key(std::size_t n) const;

    /// Histogram of configuration integers.
    EmpiricalDistribution to_empirical() const;

    /// One configuration per line as a 0/1 string, variable 0 first.
    void write_text(std::ostream& out) const;

    friend bool operator==(const SampleSet&, const SampleSet&) = default;

private:
    int d_;
    Convention convention_;
    SampleOrigin origin_;
    std::uint64_t seed_;
    std::vector<int> values_;
};

/// Annealing protocol of the Metropolis sampler. Inverse temperatures are
/// multipliers of the target beta: the ramp runs from beta*beta_start to
/// beta*beta_end geometrically, then burn-in and recording use beta*beta_end.
struct AnnealSchedule {
    double beta_start = 0.1;
    double beta_end = 1.0;
    int sweeps_anneal = 100;
    int sweeps_burnin = 100;
    int sweeps_thin = 1;

    /// Throws InvalidArgument on a malformed schedule.
    void validate() const;
};

struct SamplerOptions {
    AnnealSchedule schedule;
    int chains = 8;
    /// Visit sites 0..d-1 in order instead of uniformly at random.
    bool sequential = false;
    /// Run chains on separate threads; output is identical either way.
    bool parallel = false;
    /// Local fields are recomputed from scratch every this many sweeps.
    int refresh_interval = 1000;
};

/// Single-variable-flip Metropolis sampling of exp(-beta E) with annealing.
///
/// Each chain starts from a uniformly random configuration and owns an RNG
/// stream derived from (seed, chain). One sweep proposes d flips; a flip with
/// energy change dE is accepted with probability min(1, exp(-beta dE)).
/// Samples are pooled in chain order; the result is in the params' convention.
SampleSet metropolis_sample(const ModelParams& params, double beta, const SamplerOptions& options,
                            std::size_t n, std::uint64_t seed);

/// Sample averages of products over sorted index tuples, in the convention of
/// `encoding` (samples are converted if needed).
MomentTable empirical_moments(const SampleSet& samples, Encoding encoding, int max_order);

}  // namespace bmfim
