#include "bmfim/harness/criteria.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "bmfim/error.hpp"
#include "bmfim/fisher.hpp"
#include "bmfim/gibbs.hpp"
#include "bmfim/io.hpp"
#include "bmfim/sampler.hpp"
#include "bmfim/spectral.hpp"
#include "reference.hpp"

namespace bmfim::harness {

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string sci(double v) { return fmt("%.3g", v); }

std::string ising_label(double jc) {
    DatasetSpec s;
    s.kind = DatasetKind::IsingSynthetic;
    s.d = 10;
    s.coupling_scale = jc;
    return dataset_label(s);
}

double population_sd(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return std::sqrt(var / static_cast<double>(v.size()));
}

double mean_of(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

}  // namespace

std::string format_line(const CriterionResult& r) {
    char head[64];
    std::snprintf(head, sizeof head, "%s %2d %s", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str());
    return std::string(head) + ": " + r.detail;
}

double median(std::vector<double> values) {
    if (values.empty()) throw InvalidArgument("median of an empty sample");
    std::sort(values.begin(), values.end());
    const auto n = values.size();
    return n % 2 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

int count_below(const TrainingTrace& trace, int iteration, double threshold) {
    for (const auto& row : trace.rows)
        if (row.iteration >= iteration)
            return static_cast<int>(std::count_if(row.eigenvalues.begin(), row.eigenvalues.end(),
                                                  [&](double v) { return v < threshold; }));
    throw InvalidArgument("trace ends before iteration " + std::to_string(iteration));
}

std::vector<DatasetSpec> reproduction_datasets() {
    std::vector<DatasetSpec> out;
    out.push_back({DatasetKind::Bas, 2, 4, 0.0, 450, 0});
    out.push_back({DatasetKind::Bas, 3, 9, 0.0, 1120, 0});
    for (double jc : kCouplingScales) out.push_back({DatasetKind::IsingSynthetic, 0, 10, jc, 2000, 0});
    return out;
}

std::vector<RunSpec> exact_runs(int seeds) {
    ExperimentPlan plan;
    plan.datasets = reproduction_datasets();
    plan.seeds.clear();
    for (int s = 0; s < seeds; ++s) plan.seeds.push_back(static_cast<std::uint64_t>(s));
    plan.base.iterations = kIterations;
    plan.base.moment_snapshots = {kMomentSnapshot};
    plan.base.fim_snapshots = {0, kMomentSnapshot, kIterations};
    return plan.expand();
}

std::vector<RunSpec> sampled_runs(int seeds, std::size_t sample_count) {
    ExperimentPlan plan;
    plan.datasets = {{DatasetKind::IsingSynthetic, 0, 10, 1.0, 2000, 0}};
    plan.seeds.clear();
    for (int s = 0; s < seeds; ++s) plan.seeds.push_back(static_cast<std::uint64_t>(s));
    plan.base.iterations = kIterations;
    plan.base.moment_source = ExpectationSource::Sampled;
    plan.base.fim_source = ExpectationSource::Sampled;
    plan.base.sample_count = sample_count;
    plan.base.moment_snapshots = {kMomentSnapshot};
    return plan.expand();
}

const RunResult& find_run(const std::vector<RunResult>& runs, const std::string& dataset, Encoding encoding,
                          Optimizer optimizer, std::uint64_t seed) {
    for (const auto& r : runs)
        if (dataset_label(r.spec.dataset) == dataset && r.spec.config.encoding == encoding &&
            r.spec.config.optimizer == optimizer && r.spec.config.seed == seed)
            return r;
    throw InvalidArgument("no run for " + dataset + "/" + std::string(to_string(encoding)) + "/" +
                          std::string(to_string(optimizer)) + "/seed " + std::to_string(seed));
}

CriterionResult check_encoding_equivalence() {
    CriterionResult r{1, "encoding-equivalence", true, ""};
    Rng rng(101);
    double prob_err = 0.0, energy_err = 0.0;
    for (int instance = 0; instance < 50; ++instance) {
        const auto q = reference::random_params(Encoding::Qubo, 6, 1.0, rng);
        const auto [ising, c] = qubo_to_ising(q);
        const auto pq = enumerate_distribution(q, 1.0);
        const auto pi = enumerate_distribution(ising, 1.0);
        for (std::uint64_t key = 0; key < 64; ++key) {
            prob_err = std::max(prob_err, std::abs(pq.prob(key) - pi.prob(key)));
            const auto x = BinaryConfig::from_index(key, 6, Convention::Bit);
            energy_err = std::max(energy_err,
                                  std::abs(qubo_energy(x, q) - ising_energy(convert_config(x), ising) - c.value));
        }
    }
    r.pass = prob_err <= 1e-12 && energy_err <= 1e-12;
    r.detail = "50 QUBO instances d=6: max |dP| " + sci(prob_err) + ", max energy residual " + sci(energy_err) +
               " (tol 1e-12)";
    return r;
}

CriterionResult check_fim_identities() {
    CriterionResult r{2, "fim-identities", true, ""};
    Rng rng(202);
    double cov_err = 0.0, hess_err = 0.0;
    for (int d = 2; d <= 4; ++d)
        for (auto enc : {Encoding::Ising, Encoding::Qubo})
            for (int k = 0; k < 10; ++k) {
                const auto p = reference::random_params(enc, d, 0.7, rng);
                const auto fim = fim_from_moments(exact_moments(enumerate_distribution(p, 1.0), enc, 4), 1.0);
                cov_err = std::max(cov_err, (fim.matrix - reference::covariance_fim(p, 1.0)).cwiseAbs().maxCoeff());
                const std::vector<std::uint64_t> data{0, 1, 3};
                const auto nll = [&](const Eigen::VectorXd& th) {
                    return reference::nll(ModelParams(enc, d, th), data, 1.0);
                };
                const auto hess = reference::fd_hessian(nll, p.theta(), 1e-4);
                hess_err = std::max(hess_err, (fim.matrix - hess).cwiseAbs().maxCoeff());
            }
    r.pass = cov_err <= 1e-12 && hess_err <= 1e-5;
    r.detail = "d=2..4, 10 draws per encoding: vs covariance " + sci(cov_err) + " (tol 1e-12), vs NLL Hessian " +
               sci(hess_err) + " (tol 1e-5)";
    return r;
}

CriterionResult check_zero_closed_forms() {
    CriterionResult r{3, "zero-parameter-closed-forms", true, ""};
    std::ostringstream detail;
    for (int d : {2, 4, 6}) {
        const auto exact = [&](Encoding enc) {
            return fim_from_moments(exact_moments(enumerate_distribution(ModelParams(enc, d), 1.0), enc, 4), 1.0);
        };
        const auto fi = exact(Encoding::Ising);
        const auto n = static_cast<Eigen::Index>(param_count(d));
        const double id_err = (fi.matrix - Eigen::MatrixXd::Identity(n, n)).cwiseAbs().maxCoeff();
        const double ent_err = std::abs(spectral_entropy(fim_spectrum(fi)) - std::log(static_cast<double>(n)));
        const bool f12_zero = fim_blocks(fi).f12.cwiseAbs().maxCoeff() == 0.0;

        const auto fq = exact(Encoding::Qubo);
        double q_err = 0.0;
        for (Eigen::Index a = 0; a < n; ++a)
            for (Eigen::Index b = 0; b < n; ++b) {
                const auto sa = slot_from_flat(d, static_cast<std::size_t>(a));
                const auto sb = slot_from_flat(d, static_cast<std::size_t>(b));
                double want = 0.0;
                if (a == b) {
                    want = sa.is_linear() ? 0.25 : 0.1875;
                } else if (sa.is_linear() != sb.is_linear()) {
                    const auto& lin = sa.is_linear() ? sa : sb;
                    const auto& pr = sa.is_linear() ? sb : sa;
                    want = (lin.first == pr.first || lin.first == pr.second) ? 0.125 : 0.0;
                } else if (!sa.is_linear()) {
                    const bool share = sa.first == sb.first || sa.first == sb.second || sa.second == sb.first ||
                                       sa.second == sb.second;
                    want = share ? 0.0625 : 0.0;
                }
                q_err = std::max(q_err, std::abs(fq.matrix(a, b) - want));
            }
        const double f12_norm = fim_blocks(fq).f12.norm();
        const bool ok = id_err <= 1e-12 && ent_err <= 1e-12 && f12_zero && q_err <= 1e-12 && f12_norm > 0.0;
        r.pass = r.pass && ok;
        detail << "d=" << d << (ok ? " ok" : " off") << " (Ising " << sci(std::max(id_err, ent_err)) << ", QUBO "
               << sci(q_err) << ", |F12|_QUBO " << sci(f12_norm) << "); ";
    }
    r.detail = detail.str();
    return r;
}

CriterionResult check_sampler_fidelity() {
    CriterionResult r{4, "sampler-fidelity", true, ""};
    Rng rng(404);
    const auto model = reference::random_params(Encoding::Ising, 8, 0.35, rng);
    const auto exact = exact_moments(enumerate_distribution(model, 1.0), Encoding::Ising, 2);
    constexpr std::size_t n = 10000;
    const std::size_t m1 = 8, m2 = 28;
    std::vector<int> passes(m1 + m2, 0);
    double worst_z = 0.0;
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const auto samples = metropolis_sample(model, 1.0, SamplerOptions{}, n, seed);
        const auto emp = empirical_moments(samples, Encoding::Ising, 2);
        for (int k = 1; k <= 2; ++k) {
            const auto e = exact.order(k);
            const auto s = emp.order(k);
            for (std::size_t i = 0; i < e.size(); ++i) {
                const double se = std::sqrt(std::max(1.0 - e[i] * e[i], 1e-12) / static_cast<double>(n));
                const double z = std::abs(s[i] - e[i]) / se;
                worst_z = std::max(worst_z, z);
                if (z <= 5.0) ++passes[(k == 1 ? 0 : m1) + i];
            }
        }
    }
    const auto failing = std::count_if(passes.begin(), passes.end(), [](int p) { return p < 2; });
    r.pass = failing == 0;
    r.detail = "d=8, 10000 samples x 3 seeds: " + std::to_string(passes.size() - static_cast<std::size_t>(failing)) +
               "/" + std::to_string(passes.size()) + " moments within 5 SE in >=2 seeds, worst |z| " +
               fmt("%.2f", worst_z);
    return r;
}

CriterionResult check_gradient() {
    CriterionResult r{5, "gradient", true, ""};
    Rng rng(505);
    const int d = 4;
    std::vector<std::uint64_t> data;
    for (int k = 0; k < 40; ++k) data.push_back(rng.below(16));
    EmpiricalDistribution emp(d);
    for (auto key : data) emp.add(key);

    double err = 0.0;
    for (auto enc : {Encoding::Ising, Encoding::Qubo})
        for (int k = 0; k < 5; ++k) {
            const auto p = reference::random_params(enc, d, 0.8, rng);
            const auto g = likelihood_gradient(empirical_moments(emp, enc, 2),
                                               exact_moments(enumerate_distribution(p, 1.0), enc, 2), 1.0);
            const auto fd = reference::fd_gradient(
                [&](const Eigen::VectorXd& th) { return reference::nll(ModelParams(enc, d, th), data, 1.0); },
                p.theta(), 1e-5);
            err = std::max(err, (g - fd).cwiseAbs().maxCoeff());
        }

    const auto bas = gen_bas(2, 450, 0).distribution();
    bool decreases = true;
    std::string kl_text;
    for (auto enc : {Encoding::Ising, Encoding::Qubo}) {
        const ModelParams zero(enc, d);
        const auto dist = enumerate_distribution(zero, 1.0);
        const auto model = exact_moments(dist, enc, 4);
        const auto g = likelihood_gradient(empirical_moments(bas, enc, 2), model, 1.0);
        const auto next = sgd_step(zero.theta(), g, eta_sgd_policy(fim_from_moments(model), 0.01));
        const double before = kl_divergence(bas, dist);
        const double after = kl_divergence(bas, enumerate_distribution(ModelParams(enc, d, next), 1.0));
        decreases = decreases && after < before;
        kl_text += std::string(to_string(enc)) + " " + fmt("%.6f", before) + "->" + fmt("%.6f", after) + " ";
    }
    r.pass = err <= 1e-6 && decreases;
    r.detail = "max |g - fd| " + sci(err) + " (tol 1e-6); one SGD step on BAS 2x2 KL " + kl_text;
    return r;
}

CriterionResult check_sgd_ordering(const std::vector<RunResult>& runs, int seeds) {
    CriterionResult r{6, "sgd-ordering", true, ""};
    std::ostringstream detail;
    for (const std::string& ds : {std::string("bas2"), ising_label(1.0)}) {
        int reached = 0;
        bool negative_claim = true;
        std::vector<double> reach_iters;
        for (int s = 0; s < seeds; ++s) {
            const auto& ising = find_run(runs, ds, Encoding::Ising, Optimizer::Sgd, s).trace;
            const auto& qubo = find_run(runs, ds, Encoding::Qubo, Optimizer::Sgd, s).trace;
            const auto reach = ising.first_reaching(qubo.final_row().kl);
            if (reach && *reach < kIterations) ++reached;
            reach_iters.push_back(reach ? *reach : kIterations + 1);
            const auto q_reach = qubo.first_reaching(ising.final_row().kl);
            const auto i_reach = ising.first_reaching(ising.final_row().kl);
            if (q_reach && *q_reach < *i_reach) negative_claim = false;
        }
        const bool ok = reached * 5 >= seeds * 4 && negative_claim;
        r.pass = r.pass && ok;
        detail << ds << ": Ising reaches QUBO final KL before " << kIterations << " in " << reached << "/" << seeds
               << " seeds (median iter " << median(reach_iters) << "), QUBO never earlier: "
               << (negative_claim ? "yes" : "no") << "; ";
    }
    r.detail = detail.str();
    return r;
}

CriterionResult check_ngd_invariance(const std::vector<RunResult>& runs, int seeds) {
    CriterionResult r{7, "ngd-invariance", true, ""};
    std::ostringstream detail;
    for (const std::string& ds : {std::string("bas2"), ising_label(1.0)}) {
        int close = 0;
        std::vector<double> rel;
        for (int s = 0; s < seeds; ++s) {
            const double ki = find_run(runs, ds, Encoding::Ising, Optimizer::Ngd, s).trace.final_row().kl;
            const double kq = find_run(runs, ds, Encoding::Qubo, Optimizer::Ngd, s).trace.final_row().kl;
            const double d = std::abs(ki - kq) / std::min(ki, kq);
            rel.push_back(d);
            if (d <= 0.2) ++close;
        }
        const bool ok = close * 5 >= seeds * 4;
        r.pass = r.pass && ok;
        const auto& s0i = find_run(runs, ds, Encoding::Ising, Optimizer::Ngd, 0).trace.final_row().kl;
        const auto& s0q = find_run(runs, ds, Encoding::Qubo, Optimizer::Ngd, 0).trace.final_row().kl;
        detail << ds << ": final KL within 20% in " << close << "/" << seeds << " seeds (median rel. gap "
               << fmt("%.3f", median(rel)) << "; seed 0 Ising " << sci(s0i) << " QUBO " << sci(s0q) << "); ";
    }
    r.detail = detail.str();
    return r;
}

CriterionResult check_entropy_ordering(const std::vector<RunResult>& runs, int seeds) {
    CriterionResult r{8, "entropy-ordering", true, ""};
    std::ostringstream detail;
    for (double jc : kCouplingScales) {
        std::array<std::vector<double>, 2> med;
        int seed_wins = 0;
        for (int s = 0; s < seeds; ++s) {
            for (int e = 0; e < 2; ++e) {
                const auto enc = e == 0 ? Encoding::Ising : Encoding::Qubo;
                std::vector<double> ent;
                for (const auto& row : find_run(runs, ising_label(jc), enc, Optimizer::Ngd, s).trace.rows)
                    ent.push_back(row.spectral_entropy);
                med[static_cast<std::size_t>(e)].push_back(median(ent));
            }
            if (med[0].back() > med[1].back()) ++seed_wins;
        }
        const double mi = median(med[0]), mq = median(med[1]);
        r.pass = r.pass && mi > mq;
        detail << "J_c=" << jc << ": Ising " << fmt("%.3f", mi) << " vs QUBO " << fmt("%.3f", mq) << " ("
               << seed_wins << "/" << seeds << " seeds); ";
    }
    r.detail = detail.str();
    return r;
}

CriterionResult check_small_eigen_persistence(const std::vector<RunResult>& runs, int seeds) {
    CriterionResult r{9, "small-eigenvalue-persistence", true, ""};
    std::ostringstream detail;
    int monotone = 0;
    std::array<std::vector<double>, 3> counts;
    for (int s = 0; s < seeds; ++s) {
        std::array<int, 3> c{};
        for (std::size_t j = 0; j < kCouplingScales.size(); ++j) {
            for (const auto& row :
                 find_run(runs, ising_label(kCouplingScales[j]), Encoding::Qubo, Optimizer::Ngd, s).trace.rows)
                if (row.lambda_min < kSmallEigenThreshold) ++c[j];
            counts[j].push_back(c[j]);
        }
        if (c[0] >= c[1] && c[1] >= c[2]) ++monotone;
    }
    r.pass = 2 * monotone > seeds;
    detail << "threshold " << sci(kSmallEigenThreshold) << "; median iterations below it for J_c 0.5/1.0/1.5: "
           << median(counts[0]) << "/" << median(counts[1]) << "/" << median(counts[2])
           << "; non-increasing in " << monotone << "/" << seeds << " seeds";
    r.detail = detail.str();
    return r;
}

CriterionResult check_schur(const std::vector<RunResult>& runs) {
    CriterionResult r{10, "schur-bound", true, ""};
    std::size_t checked = 0, violations = 0;
    int fallbacks = 0;
    double worst = -INFINITY;
    for (const auto& run : runs) {
        const auto label = dataset_label(run.spec.dataset);
        if (label != "bas2" && label.rfind("ising", 0) != 0) continue;
        fallbacks += run.trace.schur_fallbacks;
        for (const auto& row : run.trace.rows) {
            ++checked;
            worst = std::max(worst, row.schur_lhs - row.schur_rhs);
            if (!(row.schur_lhs <= row.schur_rhs + 1e-9)) ++violations;
        }
    }
    Rng rng(1010);
    std::size_t random_violations = 0;
    for (int k = 0; k < 200; ++k) {
        const int d = 2 + static_cast<int>(rng.below(5));
        FimMatrix f{d, Encoding::Ising, MomentSource::Empirical,
                    reference::random_psd(static_cast<int>(param_count(d)), rng)};
        const auto b = schur_bound(f, 0.0, true);
        worst = std::max(worst, b.lhs - b.rhs);
        if (!(b.lhs <= b.rhs + 1e-9)) ++random_violations;
    }
    r.pass = violations == 0 && random_violations == 0 && checked > 0;
    r.detail = std::to_string(checked) + " trace FIMs (" + std::to_string(fallbacks) + " with fallback damping), " +
               std::to_string(violations) + " violations; 200 random PSD, " + std::to_string(random_violations) +
               " violations; max lhs-rhs " + sci(worst);
    return r;
}

CriterionResult check_moment_geometry(const std::vector<RunResult>& runs, int seeds) {
    CriterionResult r{11, "moment-geometry", true, ""};
    auto stat = [&](double jc, Encoding enc, int order, bool spread) {
        std::vector<double> v;
        for (int s = 0; s < seeds; ++s) {
            const auto& m = find_run(runs, ising_label(jc), enc, Optimizer::Ngd, s).trace.moments.at(kMomentSnapshot);
            v.push_back(spread ? population_sd(m.order(order)) : mean_of(m.order(order)));
        }
        return median(v);
    };
    const double q1 = stat(1.0, Encoding::Qubo, 1, false), q2 = stat(1.0, Encoding::Qubo, 2, false);
    const double i1 = stat(1.0, Encoding::Ising, 1, false), i3 = stat(1.0, Encoding::Ising, 3, false);
    const bool means_ok =
        std::abs(q1 - 0.5) <= 0.1 && std::abs(q2 - 0.25) <= 0.1 && std::abs(i1) <= 0.1 && std::abs(i3) <= 0.1;
    bool spread_ok = true;
    std::ostringstream spreads;
    for (auto enc : {Encoding::Ising, Encoding::Qubo})
        for (int order : {2, 4}) {
            std::array<double, 3> sd{};
            for (std::size_t j = 0; j < 3; ++j) sd[j] = stat(kCouplingScales[j], enc, order, true);
            const bool ok = sd[0] <= sd[1] && sd[1] <= sd[2];
            spread_ok = spread_ok && ok;
            spreads << to_string(enc) << " order " << order << " " << fmt("%.3f", sd[0]) << "/" << fmt("%.3f", sd[1])
                    << "/" << fmt("%.3f", sd[2]) << (ok ? "" : " (decreasing)") << "; ";
        }
    r.pass = means_ok && spread_ok;
    r.detail = "J_c=1.0 QUBO mean E[x] " + fmt("%.3f", q1) + ", E[xx] " + fmt("%.3f", q2) + "; Ising mean E[s] " +
               fmt("%.3f", i1) + ", E[sss] " + fmt("%.3f", i3) + "; spread over J_c 0.5/1.0/1.5: " + spreads.str();
    return r;
}

CriterionResult check_determinism(const std::vector<RunResult>& runs, const std::vector<RunSpec>& subset, int jobs) {
    CriterionResult r{12, "determinism", true, ""};
    RunOptions opt;
    opt.jobs = jobs;
    const auto again = run_all(subset, opt);
    std::size_t mismatches = 0;
    for (const auto& b : again) {
        const RunResult* a = nullptr;
        for (const auto& x : runs)
            if (x.spec.id == b.spec.id) a = &x;
        if (!a) throw InvalidArgument("determinism subset run " + b.spec.id + " not in the original set");
        const bool same = a->dataset_digest == b.dataset_digest && trace_csv(a->trace) == trace_csv(b.trace) &&
                          eigen_csv(a->trace) == eigen_csv(b.trace) && theta_csv(a->trace) == theta_csv(b.trace) &&
                          moments_csv(a->trace) == moments_csv(b.trace);
        if (!same) ++mismatches;
    }
    r.pass = mismatches == 0 && !again.empty();
    r.detail = std::to_string(again.size()) + " runs repeated with " + std::to_string(jobs) + " worker(s), " +
               std::to_string(mismatches) + " differ in trace/eigs/theta/moments bytes";
    return r;
}

}  // namespace bmfim::harness
