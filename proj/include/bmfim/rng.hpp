#pragma once

#include <cstdint>
#include <random>

namespace bmfim {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

/// Seed for sub-stream `stream` of a run seeded with `seed`.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

/// Random source with fully specified output.
///
/// The standard library's distributions are implementation-defined, so every
/// variate here is computed from raw mt19937_64 words with documented
/// transforms: 53-bit uniform doubles, Lemire's bounded integers, and
/// inverse-CDF normals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on the open interval (0, 1).
    double uniform_open() {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Uniform integer in [0, bound), bound > 0.
    std::uint64_t below(std::uint64_t bound);

    /// Standard normal via the inverse CDF of uniform_open().
    double normal();

private:
    std::mt19937_64 engine_;
};

/// Inverse of the standard normal CDF for p in (0, 1).
///
/// Acklam's rational approximation followed by one Halley refinement step
/// against std::erfc; relative error is near machine precision.
double normal_quantile(double p);

}  // namespace bmfim
