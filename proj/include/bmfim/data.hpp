#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bmfim/encoding.hpp"
#include "bmfim/gibbs.hpp"

namespace bmfim {

enum class DatasetKind { Bas, IsingSynthetic };

std::string_view to_string(DatasetKind k) noexcept;
DatasetKind parse_dataset_kind(std::string_view text);

struct DatasetSpec {
    DatasetKind kind = DatasetKind::Bas;
    int grid = 2;          // BAS side length n (d = n^2)
    int d = 10;            // synthetic variable count
    double coupling_scale = 1.0;  // J_c
    std::size_t count = 450;
    std::uint64_t seed = 0;

    int variables() const noexcept { return kind == DatasetKind::Bas ? grid * grid : d; }
    void validate() const;
};

/// All n x n bars-and-stripes grids, row-major, as sorted configuration integers.
std::vector<std::uint64_t> bas_patterns(int n);

/// True if the n x n grid encoded by `key` has all rows uniform or all columns uniform.
bool is_bas_pattern(std::uint64_t key, int n);

/// A dataset as an ordered list of samples plus the generating model (if any).
struct Dataset {
    DatasetSpec spec;
    std::vector<std::uint64_t> samples;
    std::optional<ModelParams> truth;

    int variables() const noexcept { return spec.variables(); }
    EmpiricalDistribution distribution() const;
    /// FNV-1a 64 over the canonical text form, as 16 hex digits.
    std::string digest() const;
};

/// `total` uniform draws with replacement from the BAS pattern set.
/// Throws InvalidArgument if total is smaller than the pattern count.
Dataset gen_bas(int n, std::size_t total, std::uint64_t seed);

/// h = 0, J_ij ~ Normal(0, J_c^2 / d) i.i.d., then `count` exact draws from
/// the beta = 1 Gibbs distribution of that model.
Dataset gen_ising_synthetic(int d, double coupling_scale, std::size_t count, std::uint64_t seed);

Dataset generate(const DatasetSpec& spec);

}  // namespace bmfim
