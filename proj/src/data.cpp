#include "bmfim/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <string>

#include "bmfim/error.hpp"
#include "bmfim/io.hpp"
#include "bmfim/rng.hpp"
#include "bmfim/sampler.hpp"

namespace bmfim {

std::string_view to_string(DatasetKind k) noexcept { return k == DatasetKind::Bas ? "bas" : "ising"; }

DatasetKind parse_dataset_kind(std::string_view text) {
    if (text == "bas") return DatasetKind::Bas;
    if (text == "ising") return DatasetKind::IsingSynthetic;
    throw InvalidArgument("unknown dataset kind '" + std::string(text) + "' (expected bas or ising)");
}

void DatasetSpec::validate() const {
    if (count < 1) throw InvalidArgument("dataset count must be at least 1");
    if (kind == DatasetKind::Bas) {
        if (grid < 1 || grid * grid > kMaxEnumerationVariables)
            throw InvalidArgument("BAS grid side must satisfy 1 <= n and n^2 <= 24");
    } else {
        if (d < 1 || d > kMaxEnumerationVariables) throw InvalidArgument("synthetic d must be in 1..24");
        if (!(coupling_scale > 0.0) || !std::isfinite(coupling_scale))
            throw InvalidArgument("coupling scale J_c must be positive");
    }
}

std::vector<std::uint64_t> bas_patterns(int n) {
    if (n < 1 || n * n > kMaxEnumerationVariables) throw InvalidArgument("BAS grid side out of range");
    std::set<std::uint64_t> patterns;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << n); ++mask) {
        std::uint64_t rows = 0, cols = 0;
        for (int r = 0; r < n; ++r)
            for (int c = 0; c < n; ++c) {
                const auto cell = static_cast<unsigned>(r * n + c);
                if ((mask >> r) & 1U) rows |= std::uint64_t{1} << cell;
                if ((mask >> c) & 1U) cols |= std::uint64_t{1} << cell;
            }
        patterns.insert(rows);
        patterns.insert(cols);
    }
    return {patterns.begin(), patterns.end()};
}

bool is_bas_pattern(std::uint64_t key, int n) {
    auto cell = [&](int r, int c) { return (key >> (r * n + c)) & 1U; };
    bool rows_uniform = true, cols_uniform = true;
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) {
            rows_uniform = rows_uniform && cell(r, c) == cell(r, 0);
            cols_uniform = cols_uniform && cell(r, c) == cell(0, c);
        }
    const auto n2 = static_cast<unsigned>(n * n);
    return (n2 >= 64 || key >> n2 == 0) && (rows_uniform || cols_uniform);
}

EmpiricalDistribution Dataset::distribution() const {
    EmpiricalDistribution dist(variables());
    for (auto key : samples) dist.add(key);
    return dist;
}

std::string Dataset::digest() const {
    const std::string text = dataset_to_string(*this);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : text) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

Dataset gen_bas(int n, std::size_t total, std::uint64_t seed) {
    const auto patterns = bas_patterns(n);
    if (total < patterns.size())
        throw InvalidArgument("BAS total " + std::to_string(total) + " is below the pattern count " +
                              std::to_string(patterns.size()));
    Dataset out;
    out.spec = {DatasetKind::Bas, n, n * n, 0.0, total, seed};
    Rng rng(seed);
    out.samples.reserve(total);
    for (std::size_t s = 0; s < total; ++s) out.samples.push_back(patterns[rng.below(patterns.size())]);
    return out;
}

Dataset gen_ising_synthetic(int d, double coupling_scale, std::size_t count, std::uint64_t seed) {
    DatasetSpec spec{DatasetKind::IsingSynthetic, 0, d, coupling_scale, count, seed};
    spec.validate();
    ModelParams truth(Encoding::Ising, d);
    Rng rng(derive_seed(seed, 0));
    const double sigma = coupling_scale / std::sqrt(static_cast<double>(d));
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) truth.set_pair(i, j, sigma * rng.normal());

    const auto dist = enumerate_distribution(truth, 1.0);
    const auto samples = sample_exact(dist, count, derive_seed(seed, 1));
    Dataset out;
    out.spec = spec;
    out.samples.reserve(count);
    for (std::size_t s = 0; s < samples.count(); ++s) out.samples.push_back(samples.key(s));
    out.truth = std::move(truth);
    return out;
}

Dataset generate(const DatasetSpec& spec) {
    spec.validate();
    return spec.kind == DatasetKind::Bas ? gen_bas(spec.grid, spec.count, spec.seed)
                                         : gen_ising_synthetic(spec.d, spec.coupling_scale, spec.count, spec.seed);
}

}  // namespace bmfim
