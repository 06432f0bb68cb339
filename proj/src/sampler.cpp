#include "bmfim/sampler.hpp"

#include <cmath>
#include <ostream>
#include <string>
#include <thread>

#include "bmfim/error.hpp"
#include "bmfim/rng.hpp"

namespace bmfim {

SampleSet::SampleSet(int d, Convention convention, SampleOrigin origin, std::uint64_t seed)
    : d_(d), convention_(convention), origin_(origin), seed_(seed) {
    if (d < 1 || d > kMaxVariables) throw InvalidArgument("variable count out of range");
}

void SampleSet::push_back(std::span<const int> row) {
    if (static_cast<int>(row.size()) != d_) throw DimensionError("sample row has wrong length");
    for (int v : row) {
        const bool ok = convention_ == Convention::Spin ? (v == -1 || v == 1) : (v == 0 || v == 1);
        if (!ok) throw InvalidArgument("sample value outside the alphabet");
    }
    values_.insert(values_.end(), row.begin(), row.end());
}

void SampleSet::push_key(std::uint64_t key) {
    for (int i = 0; i < d_; ++i) {
        const int bit = static_cast<int>((key >> i) & 1U);
        values_.push_back(convention_ == Convention::Spin ? 2 * bit - 1 : bit);
    }
}

std::span<const int> SampleSet::row(std::size_t n) const {
    const auto d = static_cast<std::size_t>(d_);
    return std::span<const int>(values_).subspan(n * d, d);
}

BinaryConfig SampleSet::config(std::size_t n) const {
    const auto r = row(n);
    return BinaryConfig(std::vector<int>(r.begin(), r.end()), convention_);
}

std::uint64_t SampleSet::key(std::size_t n) const {
    std::uint64_t k = 0;
    const auto r = row(n);
    for (std::size_t i = 0; i < r.size(); ++i)
        if (r[i] == 1) k |= std::uint64_t{1} << i;
    return k;
}

EmpiricalDistribution SampleSet::to_empirical() const {
    EmpiricalDistribution dist(d_);
    for (std::size_t n = 0; n < count(); ++n) dist.add(key(n));
    return dist;
}

void SampleSet::write_text(std::ostream& out) const {
    for (std::size_t n = 0; n < count(); ++n) {
        for (int v : row(n)) out << (v == 1 ? '1' : '0');
        out << '\n';
    }
}

void AnnealSchedule::validate() const {
    if (!(beta_start > 0.0) || !std::isfinite(beta_start) || !(beta_end > 0.0) || !std::isfinite(beta_end))
        throw InvalidArgument("anneal schedule inverse temperatures must be finite and positive");
    if (sweeps_anneal < 0 || sweeps_burnin < 0) throw InvalidArgument("sweep counts must be nonnegative");
    if (sweeps_thin < 1) throw InvalidArgument("thinning interval must be at least 1");
}

namespace {

/// One Metropolis chain with cached local fields.
class Chain {
public:
    Chain(const Eigen::VectorXd& linear, const Eigen::MatrixXd& coupling, bool spin, std::uint64_t seed,
          const SamplerOptions& options)
        : linear_(linear), coupling_(coupling), spin_(spin), options_(options), rng_(seed),
          d_(static_cast<int>(linear.size())), state_(static_cast<std::size_t>(d_)), field_(d_) {
        for (auto& v : state_) {
            const int bit = static_cast<int>(rng_.below(2));
            v = spin_ ? 2 * bit - 1 : bit;
        }
        refresh();
    }

    void sweep(double beta) {
        for (int t = 0; t < d_; ++t) {
            const int i = options_.sequential ? t : static_cast<int>(rng_.below(static_cast<std::uint64_t>(d_)));
            const int v = state_[static_cast<std::size_t>(i)];
            const double delta_e = spin_ ? -2.0 * v * field_[i] : (1.0 - 2.0 * v) * field_[i];
            if (delta_e > 0.0 && !(rng_.uniform() < std::exp(-beta * delta_e))) continue;
            const int flipped = spin_ ? -v : 1 - v;
            state_[static_cast<std::size_t>(i)] = flipped;
            field_.noalias() += static_cast<double>(flipped - v) * coupling_.col(i);
        }
        if (++sweeps_since_refresh_ >= options_.refresh_interval) refresh();
    }

    const std::vector<int>& state() const { return state_; }

private:
    void refresh() {
        field_ = linear_;
        for (int j = 0; j < d_; ++j)
            if (state_[static_cast<std::size_t>(j)] != 0)
                field_.noalias() += static_cast<double>(state_[static_cast<std::size_t>(j)]) * coupling_.col(j);
        sweeps_since_refresh_ = 0;
    }

    const Eigen::VectorXd& linear_;
    const Eigen::MatrixXd& coupling_;
    bool spin_;
    const SamplerOptions& options_;
    Rng rng_;
    int d_;
    std::vector<int> state_;
    Eigen::VectorXd field_;
    int sweeps_since_refresh_ = 0;
};

std::vector<int> run_chain(const Eigen::VectorXd& linear, const Eigen::MatrixXd& coupling, bool spin,
                           double beta, const SamplerOptions& options, std::size_t count,
                           std::uint64_t seed) {
    const auto& sched = options.schedule;
    Chain chain(linear, coupling, spin, seed, options);
    for (int t = 0; t < sched.sweeps_anneal; ++t) {
        const double frac = sched.sweeps_anneal > 1 ? static_cast<double>(t) / (sched.sweeps_anneal - 1) : 1.0;
        chain.sweep(beta * sched.beta_start * std::pow(sched.beta_end / sched.beta_start, frac));
    }
    const double target = beta * sched.beta_end;
    for (int t = 0; t < sched.sweeps_burnin; ++t) chain.sweep(target);

    std::vector<int> rows;
    rows.reserve(count * linear.size());
    for (std::size_t s = 0; s < count; ++s) {
        for (int t = 0; t < sched.sweeps_thin; ++t) chain.sweep(target);
        rows.insert(rows.end(), chain.state().begin(), chain.state().end());
    }
    return rows;
}

}  // namespace

SampleSet metropolis_sample(const ModelParams& params, double beta, const SamplerOptions& options,
                            std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("sample count must be positive");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");
    if (options.chains < 1) throw InvalidArgument("chain count must be at least 1");
    if (options.refresh_interval < 1) throw InvalidArgument("refresh interval must be at least 1");
    options.schedule.validate();

    const int d = params.size();
    const Eigen::VectorXd linear = params.theta().head(d);
    const Eigen::MatrixXd coupling = params.coupling_matrix();
    const bool spin = params.encoding() == Encoding::Ising;

    const auto chains = static_cast<std::size_t>(options.chains);
    std::vector<std::vector<int>> pooled(chains);
    auto work = [&](std::size_t c) {
        const std::size_t count = n / chains + (c < n % chains ? 1 : 0);
        if (count > 0) pooled[c] = run_chain(linear, coupling, spin, beta, options, count, derive_seed(seed, c));
    };
    if (options.parallel && chains > 1) {
        std::vector<std::jthread> threads;
        threads.reserve(chains);
        for (std::size_t c = 0; c < chains; ++c) threads.emplace_back(work, c);
    } else {
        for (std::size_t c = 0; c < chains; ++c) work(c);
    }

    SampleSet out(d, convention_of(params.encoding()), SampleOrigin::Annealed, seed);
    for (const auto& rows : pooled)
        for (std::size_t r = 0; r + static_cast<std::size_t>(d) <= rows.size(); r += static_cast<std::size_t>(d))
            out.push_back(std::span<const int>(rows).subspan(r, static_cast<std::size_t>(d)));
    return out;
}

MomentTable empirical_moments(const SampleSet& samples, Encoding encoding, int max_order) {
    if (samples.count() == 0) throw InvalidArgument("empty sample set");
    // Histogram first: moments depend only on configuration frequencies.
    const auto dist = samples.to_empirical();
    return empirical_moments(dist, encoding, max_order);
}

}  // namespace bmfim
