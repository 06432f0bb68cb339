#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "bmfim/data.hpp"
#include "bmfim/error.hpp"
#include "bmfim/gibbs.hpp"
#include "bmfim/optim.hpp"
#include "reference.hpp"

using namespace bmfim;

namespace {

FimMatrix exact_fim(const ModelParams& p) {
    return fim_from_moments(exact_moments(enumerate_distribution(p, 1.0), p.encoding(), 4), 1.0);
}

// Uniform-bit QUBO FIM written out from the independent-fair-bit moments.
Eigen::MatrixXd uniform_bit_fim(int d) {
    const auto n = static_cast<Eigen::Index>(param_count(d));
    Eigen::MatrixXd f = Eigen::MatrixXd::Zero(n, n);
    auto vars = [&](Eigen::Index a) {
        const auto s = slot_from_flat(d, static_cast<std::size_t>(a));
        return s.is_linear() ? std::vector<int>{s.first} : std::vector<int>{s.first, s.second};
    };
    for (Eigen::Index a = 0; a < n; ++a)
        for (Eigen::Index b = 0; b < n; ++b) {
            auto u = vars(a);
            const auto v = vars(b);
            const double ea = std::pow(0.5, static_cast<double>(u.size()));
            const double eb = std::pow(0.5, static_cast<double>(v.size()));
            u.insert(u.end(), v.begin(), v.end());
            std::sort(u.begin(), u.end());
            u.erase(std::unique(u.begin(), u.end()), u.end());
            f(a, b) = std::pow(0.5, static_cast<double>(u.size())) - ea * eb;
        }
    return f;
}

}  // namespace

TEST_CASE("sgd_step") {
    const Eigen::VectorXd theta = Eigen::VectorXd::LinSpaced(4, -1.0, 2.0);
    CHECK(sgd_step(theta, Eigen::VectorXd::Zero(4), 0.3) == theta);
    const auto out = sgd_step(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Ones(3), 0.5);
    CHECK(out == Eigen::VectorXd::Constant(3, -0.5));
    CHECK_THROWS_AS(sgd_step(theta, Eigen::VectorXd::Zero(3), 0.1), DimensionError);
    Eigen::VectorXd bad = theta;
    bad[1] = INFINITY;
    CHECK_THROWS_AS(sgd_step(bad, theta, 0.1), NumericalError);
}

TEST_CASE("learning-rate policy") {
    CHECK(eta_sgd_policy(exact_fim(ModelParams(Encoding::Ising, 5)), 0.01) == doctest::Approx(0.01).epsilon(1e-12));
    Spectrum s;
    s.eigenvalues = {4.0, 1.0};
    CHECK(eta_sgd_policy(s, 0.01) == 0.0025);
    s.eigenvalues = {0.0};
    CHECK_THROWS_AS(eta_sgd_policy(s, 0.01), InvalidArgument);

    const auto hand = uniform_bit_fim(10);
    const auto fim = exact_fim(ModelParams(Encoding::Qubo, 10));
    CHECK((fim.matrix - hand).lpNorm<Eigen::Infinity>() <= 1e-12);
    const double lmax = reference::power_iteration_max(hand);
    const double eta = eta_sgd_policy(fim, 0.01);
    CHECK(eta == doctest::Approx(0.01 / lmax).epsilon(1e-10));
    CHECK(eta < 2.0 / lmax);
}

TEST_CASE("ngd_step") {
    Rng rng(5);
    const auto p = reference::random_params(Encoding::Qubo, 4, 0.5, rng);
    Eigen::VectorXd grad(10);
    for (int k = 0; k < 10; ++k) grad[k] = rng.normal();

    FimMatrix identity{4, Encoding::Qubo, MomentSource::Exact, Eigen::MatrixXd::Identity(10, 10)};
    CHECK((ngd_step(p.theta(), grad, identity, 0.1, 0.0) - sgd_step(p.theta(), grad, 0.1)).norm() <= 1e-15);

    const auto f = exact_fim(p);
    CHECK(ngd_step(p.theta(), Eigen::VectorXd::Zero(10), f, 0.01, 1e-3) == p.theta());

    const double eta = 0.01, damping = 1e-3;
    const Eigen::VectorXd delta = (p.theta() - ngd_step(p.theta(), grad, f, eta, damping)) / eta;
    const Eigen::VectorXd residual = (f.matrix + damping * Eigen::MatrixXd::Identity(10, 10)) * delta - grad;
    CHECK(residual.norm() <= 1e-10);

    FimMatrix indefinite{4, Encoding::Qubo, MomentSource::Empirical, -Eigen::MatrixXd::Identity(10, 10)};
    CHECK_THROWS_WITH_AS(ngd_step(p.theta(), grad, indefinite, 0.01, 1e-3), doctest::Contains("lambda_min"),
                         NumericalError);
}

TEST_CASE("one policy-rate SGD step from zero decreases the BAS KL") {
    const auto data = gen_bas(2, 450, 0).distribution();
    for (auto enc : {Encoding::Ising, Encoding::Qubo}) {
        const ModelParams zero(enc, 4);
        const auto dist = enumerate_distribution(zero, 1.0);
        const auto model = exact_moments(dist, enc, 4);
        const auto g = likelihood_gradient(empirical_moments(data, enc, 2), model, 1.0);
        const auto next = sgd_step(zero.theta(), g, eta_sgd_policy(fim_from_moments(model), 0.01));
        CHECK(kl_divergence(data, enumerate_distribution(ModelParams(enc, 4, next), 1.0)) <
              kl_divergence(data, dist));
    }
}

TEST_CASE("training on data from the zero model barely moves") {
    const auto truth = enumerate_distribution(ModelParams(Encoding::Ising, 6), 1.0);
    const auto data = sample_exact(truth, 4000, 1).to_empirical();
    for (auto opt : {Optimizer::Sgd, Optimizer::Ngd}) {
        TrainConfig cfg;
        cfg.optimizer = opt;
        cfg.iterations = 100;
        const auto trace = train(data, cfg);
        CHECK(trace.rows.front().grad_norm < 0.2);
        CHECK(trace.final_row().kl <= trace.rows.front().kl);
        CHECK(trace.final_row().kl >= 0.5 * trace.rows.front().kl);
    }
}

TEST_CASE("exact NGD on BAS 2x2 for 300 iterations") {
    const auto data = gen_bas(2, 450, 0).distribution();
    TrainConfig cfg;
    cfg.optimizer = Optimizer::Ngd;
    cfg.iterations = 300;
    cfg.encoding = Encoding::Ising;
    const auto ising = train(data, cfg);
    cfg.encoding = Encoding::Qubo;
    const auto qubo = train(data, cfg);
    // Ratios frozen from the exact-mode run (0.0535 Ising, 0.0779 QUBO).
    CHECK(ising.final_row().kl <= 0.055 * ising.rows.front().kl);
    CHECK(qubo.final_row().kl <= 0.08 * qubo.rows.front().kl);
}

TEST_CASE("exact-mode KL is non-increasing over 20-iteration windows") {
    const auto data = gen_bas(2, 450, 1).distribution();
    for (auto enc : {Encoding::Ising, Encoding::Qubo})
        for (auto opt : {Optimizer::Sgd, Optimizer::Ngd}) {
            TrainConfig cfg;
            cfg.encoding = enc;
            cfg.optimizer = opt;
            cfg.iterations = 200;
            const auto trace = train(data, cfg);
            for (std::size_t t = 0; t + 20 < trace.rows.size(); ++t)
                CHECK(trace.rows[t + 20].kl <= trace.rows[t].kl + 1e-6);
            for (const auto& row : trace.rows) {
                if (opt == Optimizer::Sgd) CHECK(row.eta < 2.0 / row.lambda_max);
                CHECK(row.schur_lhs <= row.schur_rhs + 1e-9);
            }
        }
}

TEST_CASE("SGD: Ising reaches the QUBO final KL first on synthetic data") {
    const auto data = gen_ising_synthetic(10, 1.0, 2000, 0).distribution();
    TrainConfig cfg;
    cfg.iterations = 500;
    cfg.trace_every = 1;
    cfg.encoding = Encoding::Ising;
    const auto ising = train(data, cfg);
    cfg.encoding = Encoding::Qubo;
    const auto qubo = train(data, cfg);
    const auto reach = ising.first_reaching(qubo.final_row().kl);
    REQUIRE(reach.has_value());
    CHECK(*reach < 500);
}

TEST_CASE("trace layout and completeness") {
    const auto data = gen_bas(2, 450, 2).distribution();
    TrainConfig cfg;
    cfg.iterations = 30;
    cfg.trace_every = 7;
    cfg.moment_snapshots = {14};
    cfg.fim_snapshots = {0, 30};
    const auto trace = train(data, cfg);
    std::vector<int> iters;
    for (const auto& r : trace.rows) {
        iters.push_back(r.iteration);
        for (double v : {r.kl, r.grad_norm, r.eta, r.lambda_max, r.lambda_min, r.spectral_entropy, r.offblock_ratio,
                         r.schur_lhs, r.schur_rhs})
            CHECK(std::isfinite(v));
        CHECK(r.theta.size() == 10);
        CHECK(r.eigenvalues.size() == 10);
    }
    CHECK(iters == std::vector<int>{0, 7, 14, 21, 28, 30});
    CHECK(trace.moments.count(14) == 1);
    CHECK(trace.moments.at(14).max_order() == 4);
    CHECK(trace.fims.size() == 2);
    CHECK_FALSE(trace.abort_reason.has_value());
    // The first row doubles as the zero-parameter self-test.
    CHECK(trace.rows.front().lambda_max == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(trace.rows.front().spectral_entropy == doctest::Approx(std::log(10.0)).epsilon(1e-12));
}

TEST_CASE("divergence guard stops with a diagnostic row") {
    const auto data = gen_bas(2, 450, 2).distribution();
    TrainConfig cfg;
    cfg.optimizer = Optimizer::Ngd;
    cfg.eta_ngd = 1e5;
    cfg.iterations = 50;
    const auto trace = train(data, cfg);
    REQUIRE(trace.abort_reason.has_value());
    CHECK(trace.rows.size() < 52);
}

TEST_CASE("sampled-moment training is deterministic and learns") {
    const auto data = gen_bas(2, 450, 3).distribution();
    TrainConfig cfg;
    cfg.optimizer = Optimizer::Ngd;
    cfg.iterations = 60;
    cfg.moment_source = ExpectationSource::Sampled;
    cfg.fim_source = ExpectationSource::Sampled;
    cfg.sample_count = 2000;
    cfg.seed = 4;
    const auto a = train(data, cfg);
    const auto b = train(data, cfg);
    REQUIRE(a.rows.size() == b.rows.size());
    for (std::size_t k = 0; k < a.rows.size(); ++k) {
        CHECK(a.rows[k].kl == b.rows[k].kl);
        CHECK(a.rows[k].theta == b.rows[k].theta);
    }
    CHECK(a.final_row().kl < 0.9 * a.rows.front().kl);
}

TEST_CASE("config validation") {
    const auto data = gen_bas(2, 450, 0).distribution();
    TrainConfig cfg;
    cfg.iterations = 0;
    CHECK_THROWS_AS(train(data, cfg), InvalidArgument);
    cfg.iterations = 5;
    cfg.damping = -1.0;
    CHECK_THROWS_AS(train(data, cfg), InvalidArgument);
    cfg.damping = 0.001;
    cfg.initial = ModelParams(Encoding::Ising, 3);
    CHECK_THROWS_AS(train(data, cfg), DimensionError);
    cfg.initial = ModelParams(Encoding::Qubo, 4);  // converted to the training encoding
    CHECK(train(data, cfg).rows.size() == 6);
}
