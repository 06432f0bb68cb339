#include <doctest.h>

#include <vector>

#include "bmfim/gibbs.hpp"
#include "bmfim/moments.hpp"
#include "reference.hpp"

using namespace bmfim;

TEST_CASE("subset rank is lexicographic and invertible") {
    for (int d = 1; d <= 12; ++d)
        for (int k = 1; k <= std::min(4, d); ++k) {
            // Enumerate tuples lexicographically by odometer.
            std::vector<int> t(static_cast<std::size_t>(k));
            for (int p = 0; p < k; ++p) t[static_cast<std::size_t>(p)] = p;
            std::size_t expected = 0;
            while (true) {
                REQUIRE(subset_rank(d, t) == expected);
                REQUIRE(subset_unrank(d, k, expected) == t);
                ++expected;
                int p = k - 1;
                while (p >= 0 && t[static_cast<std::size_t>(p)] == d - k + p) --p;
                if (p < 0) break;
                ++t[static_cast<std::size_t>(p)];
                for (int q = p + 1; q < k; ++q) t[static_cast<std::size_t>(q)] = t[static_cast<std::size_t>(q - 1)] + 1;
            }
            REQUIRE(expected == binomial(d, k));
        }
}

TEST_CASE("subset rank agrees with the pair index") {
    for (int d = 2; d <= 64; ++d)
        for (int i = 0; i < d; ++i)
            for (int j = i + 1; j < d; ++j) {
                const int t[] = {i, j};
                REQUIRE(subset_rank(d, t) == pair_index(d, i, j));
            }
}

TEST_CASE("table moments match enumeration for every tuple") {
    Rng rng(21);
    for (auto enc : {Encoding::Ising, Encoding::Qubo}) {
        const auto params = reference::random_params(enc, 5, 0.7, rng);
        const auto table = exact_moments(enumerate_distribution(params, 1.3), enc, 4);
        for (int k = 1; k <= 4; ++k)
            for (std::size_t r = 0; r < binomial(5, k); ++r) {
                const auto t = subset_unrank(5, k, r);
                CHECK(table.at(t) == doctest::Approx(reference::moment(params, 1.3, t)).epsilon(1e-12));
            }
        CHECK(table.at({}) == 1.0);
    }
}

TEST_CASE("moment table guards") {
    MomentTable t(4, Encoding::Ising, 2, MomentSource::Exact);
    CHECK_THROWS(t.at({0, 1, 2}));
    CHECK_THROWS(t.at({1, 0}));
    CHECK_THROWS(MomentTable(4, Encoding::Ising, 5, MomentSource::Exact));
    CHECK(t.flat_first_second().size() == 10);
}
