#include "bmfim/moments.hpp"

#include <string>

#include "bmfim/error.hpp"

namespace bmfim {

std::uint64_t binomial(int n, int k) noexcept {
    if (k < 0 || n < 0 || k > n) return 0;
    if (k > n - k) k = n - k;
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return r;
}

std::size_t subset_rank(int d, std::span<const int> sorted) {
    // rank = C(d,k) - 1 - sum_p C(d-1-c_p, k-p): the lexicographic rank
    // counted backwards through the colexicographic rank of the complement.
    const int k = static_cast<int>(sorted.size());
    std::uint64_t tail = 0;
    for (int p = 0; p < k; ++p) {
        const int c = sorted[static_cast<std::size_t>(p)];
        if (c < 0 || c >= d || (p > 0 && c <= sorted[static_cast<std::size_t>(p - 1)]))
            throw InvalidArgument("index tuple must be strictly increasing within [0, d)");
        tail += binomial(d - 1 - c, k - p);
    }
    return static_cast<std::size_t>(binomial(d, k) - 1 - tail);
}

std::vector<int> subset_unrank(int d, int k, std::size_t rank) {
    if (rank >= binomial(d, k)) throw InvalidArgument("subset rank out of range");
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(k));
    int next = 0;
    for (int p = 0; p < k; ++p) {
        for (int c = next;; ++c) {
            const std::uint64_t block = binomial(d - 1 - c, k - 1 - p);
            if (rank < block) {
                out.push_back(c);
                next = c + 1;
                break;
            }
            rank -= block;
        }
    }
    return out;
}

MomentTable::MomentTable(int d, Encoding encoding, int max_order, MomentSource source)
    : d_(d), encoding_(encoding), max_order_(max_order), source_(source) {
    if (max_order < 1 || max_order > 4) throw InvalidArgument("moment order must be in 1..4");
    if (d < 1 || d > kMaxVariables) throw InvalidArgument("variable count out of range");
    for (int k = 1; k <= max_order; ++k)
        orders_[static_cast<std::size_t>(k - 1)].assign(binomial(d, k), 0.0);
}

std::span<const double> MomentTable::order(int k) const {
    if (k < 1 || k > max_order_)
        throw InvalidArgument("moment order " + std::to_string(k) + " not in table");
    return orders_[static_cast<std::size_t>(k - 1)];
}

std::span<double> MomentTable::order(int k) {
    if (k < 1 || k > max_order_)
        throw InvalidArgument("moment order " + std::to_string(k) + " not in table");
    return orders_[static_cast<std::size_t>(k - 1)];
}

double MomentTable::at(std::span<const int> sorted) const {
    if (sorted.empty()) return 1.0;
    const auto k = static_cast<int>(sorted.size());
    return order(k)[subset_rank(d_, sorted)];
}

Eigen::VectorXd MomentTable::flat_first_second() const {
    if (max_order_ < 2) throw InvalidArgument("moment table lacks second-order entries");
    const auto first = order(1);
    const auto second = order(2);
    Eigen::VectorXd out(static_cast<Eigen::Index>(first.size() + second.size()));
    Eigen::Index k = 0;
    for (double v : first) out[k++] = v;
    for (double v : second) out[k++] = v;
    return out;
}

MomentTable moments_from_weights(int d, Encoding encoding, int max_order,
                                 std::span<const WeightedConfig> weighted, MomentSource source) {
    MomentTable table(d, encoding, max_order, source);
    const bool spin = encoding == Encoding::Ising;
    std::array<double*, 4> out{};
    for (int k = 1; k <= max_order; ++k) out[static_cast<std::size_t>(k - 1)] = table.order(k).data();

    std::vector<double> v(static_cast<std::size_t>(d));
    for (const auto& [key, w] : weighted) {
        for (int i = 0; i < d; ++i) {
            const double bit = static_cast<double>((key >> i) & 1U);
            v[static_cast<std::size_t>(i)] = spin ? 2.0 * bit - 1.0 : bit;
        }
        // Nested loops enumerate tuples in lexicographic order, matching subset_rank.
        std::size_t r1 = 0, r2 = 0, r3 = 0, r4 = 0;
        for (int i = 0; i < d; ++i) {
            const double a = w * v[static_cast<std::size_t>(i)];
            out[0][r1++] += a;
            if (max_order < 2) continue;
            for (int j = i + 1; j < d; ++j) {
                const double b = a * v[static_cast<std::size_t>(j)];
                out[1][r2++] += b;
                if (max_order < 3) continue;
                for (int k = j + 1; k < d; ++k) {
                    const double c = b * v[static_cast<std::size_t>(k)];
                    out[2][r3++] += c;
                    if (max_order < 4) continue;
                    for (int l = k + 1; l < d; ++l) out[3][r4++] += c * v[static_cast<std::size_t>(l)];
                }
            }
        }
    }
    return table;
}

}  // namespace bmfim
