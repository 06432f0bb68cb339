#include <doctest.h>

#include <cmath>
#include <numbers>

#include "bmfim/data.hpp"
#include "bmfim/error.hpp"
#include "bmfim/gibbs.hpp"
#include "bmfim/sampler.hpp"
#include "reference.hpp"

using namespace bmfim;

TEST_CASE("zero parameters give the uniform distribution") {
    for (int d : {1, 3, 7})
        for (auto enc : {Encoding::Ising, Encoding::Qubo})
            for (double beta : {0.5, 1.0, 3.0}) {
                const auto dist = enumerate_distribution(ModelParams(enc, d), beta);
                for (double lp : dist.log_prob) CHECK(lp == doctest::Approx(-d * std::numbers::ln2).epsilon(1e-15));
            }
}

TEST_CASE("two-state logistic") {
    ModelParams p(Encoding::Ising, 1);
    p.set_linear(0, 1.0);
    const auto dist = enumerate_distribution(p, 1.0);
    // key 0 is s = -1; P(-1) = e / (e + 1/e) = sigmoid(2).
    CHECK(dist.prob(0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-15));
    CHECK(dist.prob(0) == doctest::Approx(0.880797).epsilon(1e-6));
}

TEST_CASE("distribution matches naive normalization and is normalized") {
    Rng rng(8);
    for (int d = 1; d <= 10; ++d)
        for (auto enc : {Encoding::Ising, Encoding::Qubo}) {
            const auto p = reference::random_params(enc, d, 1.0, rng);
            const auto dist = enumerate_distribution(p, 1.0);
            double total = 0.0;
            for (double lp : dist.log_prob) total += std::exp(lp);
            CHECK(std::abs(total - 1.0) <= 1e-12);
            if (d <= 6) {
                const auto naive = reference::probabilities(p, 1.0);
                for (std::size_t k = 0; k < naive.size(); ++k) CHECK(std::abs(dist.prob(k) - naive[k]) <= 1e-14);
            }
        }
}

TEST_CASE("log-domain enumeration survives large energies") {
    ModelParams p(Encoding::Ising, 4);
    for (int i = 0; i < 4; ++i) p.set_linear(i, 500.0);
    const auto dist = enumerate_distribution(p, 2.0);
    CHECK(std::isfinite(dist.log_partition));
    CHECK(dist.prob(0) == doctest::Approx(1.0));
}

TEST_CASE("Gibbs distribution is invariant under the QUBO -> Ising map") {
    Rng rng(13);
    for (int trial = 0; trial < 5; ++trial) {
        const auto q = reference::random_params(Encoding::Qubo, 8, 1.0, rng);
        const auto a = enumerate_distribution(q, 1.0);
        const auto b = enumerate_distribution(qubo_to_ising(q).first, 1.0);
        double worst = 0.0;
        for (std::size_t k = 0; k < a.log_prob.size(); ++k)
            worst = std::max(worst, std::abs(std::exp(a.log_prob[k]) - std::exp(b.log_prob[k])));
        CHECK(worst <= 1e-12);
    }
}

TEST_CASE("enumeration guards") {
    CHECK_THROWS_AS(enumerate_distribution(ModelParams(Encoding::Ising, 25), 1.0), EnumerationLimit);
    CHECK_THROWS_AS(enumerate_distribution(ModelParams(Encoding::Ising, 2), 0.0), InvalidArgument);
}

TEST_CASE("KL divergence") {
    const auto uniform = enumerate_distribution(ModelParams(Encoding::Ising, 1), 1.0);
    CHECK(kl_divergence(uniform, uniform) == 0.0);

    // q = (0.8, 0.2): h with P(-1)/P(+1) = 4, i.e. e^{2h} = 4.
    ModelParams p(Encoding::Ising, 1);
    p.set_linear(0, 0.5 * std::log(4.0));
    const auto q = enumerate_distribution(p, 1.0);
    CHECK(q.prob(0) == doctest::Approx(0.8).epsilon(1e-14));
    CHECK(kl_divergence(uniform, q) == doctest::Approx(0.5 * std::log(0.5 / 0.8) + 0.5 * std::log(0.5 / 0.2)).epsilon(1e-13));
    CHECK(kl_divergence(uniform, q) == doctest::Approx(0.223144).epsilon(1e-6));

    // Empirical BAS data against the uniform model: log 16 - H(data).
    const auto data = gen_bas(2, 450, 3).distribution();
    const auto model = enumerate_distribution(ModelParams(Encoding::Ising, 4), 1.0);
    double h = 0.0;
    for (const auto& [key, c] : data.counts()) {
        const double pk = static_cast<double>(c) / 450.0;
        h -= pk * std::log(pk);
    }
    CHECK(kl_divergence(data, model) == doctest::Approx(std::log(16.0) - h).epsilon(1e-13));

    Rng rng(4);
    for (int t = 0; t < 20; ++t) {
        const auto a = enumerate_distribution(reference::random_params(Encoding::Qubo, 4, 1.0, rng), 1.0);
        const auto b = enumerate_distribution(reference::random_params(Encoding::Qubo, 4, 1.0, rng), 1.0);
        CHECK(kl_divergence(a, b) >= 0.0);
        CHECK(kl_divergence(a, a) == doctest::Approx(0.0).epsilon(1e-15));
    }
    CHECK_THROWS_AS(kl_divergence(uniform, model), DimensionError);
}

TEST_CASE("exact moments at zero parameters") {
    const auto ising = exact_moments(enumerate_distribution(ModelParams(Encoding::Ising, 5), 1.0), Encoding::Ising, 4);
    const auto qubo = exact_moments(enumerate_distribution(ModelParams(Encoding::Qubo, 5), 1.0), Encoding::Qubo, 4);
    const double bit_values[] = {0.5, 0.25, 0.125, 0.0625};
    for (int k = 1; k <= 4; ++k) {
        for (double m : ising.order(k)) CHECK(std::abs(m) <= 1e-15);
        for (double m : qubo.order(k)) CHECK(m == doctest::Approx(bit_values[k - 1]).epsilon(1e-14));
    }
}

TEST_CASE("exact moments agree with categorical draws within 4 standard errors") {
    Rng rng(77);
    const auto params = reference::random_params(Encoding::Ising, 6, 0.6, rng);
    const auto dist = enumerate_distribution(params, 1.0);
    const std::size_t n = 1'000'000;
    const auto samples = sample_exact(dist, n, 2024);
    for (auto enc : {Encoding::Ising, Encoding::Qubo}) {
        const auto exact = exact_moments(dist, enc, 4);
        const auto sampled = empirical_moments(samples, enc, 4);
        for (int k = 1; k <= 4; ++k) {
            const auto e = exact.order(k);
            const auto s = sampled.order(k);
            for (std::size_t r = 0; r < e.size(); ++r) {
                // Var of a +-1 product is 1 - m^2; of a 0/1 product m(1 - m).
                const double var = enc == Encoding::Ising ? 1.0 - e[r] * e[r] : e[r] * (1.0 - e[r]);
                CHECK(std::abs(s[r] - e[r]) <= 4.0 * std::sqrt(var / static_cast<double>(n)) + 1e-12);
            }
        }
    }
}

TEST_CASE("sample_exact") {
    ModelParams p(Encoding::Qubo, 3);
    p.set_linear(0, 1000.0);
    p.set_linear(1, -1000.0);  // x = (0,1,0) has overwhelming weight
    p.set_linear(2, 1000.0);
    const auto s = sample_exact(enumerate_distribution(p, 1.0), 500, 1);
    for (std::size_t n = 0; n < s.count(); ++n) CHECK(s.key(n) == 2);

    const auto dist = enumerate_distribution(ModelParams(Encoding::Ising, 4), 1.0);
    CHECK(sample_exact(dist, 1000, 99) == sample_exact(dist, 1000, 99));
    CHECK_FALSE(sample_exact(dist, 1000, 99) == sample_exact(dist, 1000, 100));

    const std::size_t n = 100'000;
    const auto counts = sample_exact(dist, n, 5).to_empirical();
    const double p0 = 1.0 / 16.0;
    const double sigma = std::sqrt(n * p0 * (1 - p0));
    CHECK(counts.counts().size() == 16);
    for (const auto& [key, c] : counts.counts()) CHECK(std::abs(static_cast<double>(c) - n * p0) <= 5 * sigma);
    CHECK_THROWS_AS(sample_exact(dist, 0, 1), InvalidArgument);
}
