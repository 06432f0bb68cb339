#include "bmfim/gibbs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bmfim/error.hpp"
#include "bmfim/rng.hpp"
#include "bmfim/sampler.hpp"

namespace bmfim {

double ExactDistribution::prob(std::uint64_t key) const { return std::exp(log_prob.at(key)); }

EmpiricalDistribution::EmpiricalDistribution(int d) : d_(d) {
    if (d < 1 || d > kMaxVariables) throw InvalidArgument("variable count out of range");
}

void EmpiricalDistribution::add(std::uint64_t key, std::uint64_t count) {
    if (d_ < 64 && key >> d_ != 0) throw InvalidArgument("configuration key exceeds 2^d");
    if (count == 0) return;
    counts_[key] += count;
    total_ += count;
}

std::vector<WeightedConfig> EmpiricalDistribution::weighted() const {
    std::vector<WeightedConfig> out;
    out.reserve(counts_.size());
    const double n = static_cast<double>(total_);
    for (const auto& [key, c] : counts_) out.push_back({key, static_cast<double>(c) / n});
    return out;
}

double EmpiricalDistribution::entropy() const {
    double h = 0.0;
    const double n = static_cast<double>(total_);
    for (const auto& [key, c] : counts_) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log(p);
    }
    return h;
}

ExactDistribution enumerate_distribution(const ModelParams& params, double beta) {
    const int d = params.size();
    if (d > kMaxEnumerationVariables)
        throw EnumerationLimit("exact enumeration supports d <= " +
                               std::to_string(kMaxEnumerationVariables) + ", got " + std::to_string(d));
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("beta must be positive and finite");

    ExactDistribution dist;
    dist.d = d;
    dist.beta = beta;
    const std::uint64_t states = std::uint64_t{1} << d;
    dist.log_prob.resize(states);
    double top = -std::numeric_limits<double>::infinity();
    for (std::uint64_t key = 0; key < states; ++key) {
        const double a = -beta * energy_of_index(key, params);
        dist.log_prob[key] = a;
        top = std::max(top, a);
    }
    double sum = 0.0;
    for (double a : dist.log_prob) sum += std::exp(a - top);
    dist.log_partition = top + std::log(sum);
    for (double& a : dist.log_prob) a -= dist.log_partition;
    return dist;
}

double kl_divergence(const ExactDistribution& p, const ExactDistribution& q) {
    if (p.d != q.d) throw DimensionError("KL operands have different variable counts");
    double kl = 0.0;
    for (std::size_t k = 0; k < p.log_prob.size(); ++k) {
        const double pk = std::exp(p.log_prob[k]);
        if (pk > 0.0) kl += pk * (p.log_prob[k] - q.log_prob[k]);
    }
    return std::max(kl, 0.0);
}

double kl_divergence(const EmpiricalDistribution& p, const ExactDistribution& q) {
    if (p.size() != q.d) throw DimensionError("KL operands have different variable counts");
    double kl = 0.0;
    const double n = static_cast<double>(p.total());
    for (const auto& [key, c] : p.counts()) {
        const double pk = static_cast<double>(c) / n;
        kl += pk * (std::log(pk) - q.log_prob[key]);
    }
    return std::max(kl, 0.0);
}

MomentTable exact_moments(const ExactDistribution& dist, Encoding encoding, int max_order) {
    if (dist.d > kMaxEnumerationVariables) throw EnumerationLimit("distribution too large to enumerate");
    std::vector<WeightedConfig> weighted;
    weighted.reserve(dist.log_prob.size());
    // Renormalizing relative weights keeps equal-energy states exactly equal
    // (at theta = 0 every weight is exactly 2^-d).
    const double top = *std::max_element(dist.log_prob.begin(), dist.log_prob.end());
    double total = 0.0;
    for (std::size_t k = 0; k < dist.log_prob.size(); ++k) {
        weighted.push_back({k, std::exp(dist.log_prob[k] - top)});
        total += weighted.back().weight;
    }
    for (auto& w : weighted) w.weight /= total;
    return moments_from_weights(dist.d, encoding, max_order, weighted, MomentSource::Exact);
}

MomentTable empirical_moments(const EmpiricalDistribution& data, Encoding encoding, int max_order) {
    if (data.total() == 0) throw InvalidArgument("empty data distribution");
    const auto weighted = data.weighted();
    return moments_from_weights(data.size(), encoding, max_order, weighted, MomentSource::Empirical);
}

SampleSet sample_exact(const ExactDistribution& dist, std::size_t n, std::uint64_t seed) {
    if (n == 0) throw InvalidArgument("sample count must be positive");
    std::vector<double> cdf(dist.log_prob.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < cdf.size(); ++k) {
        acc += std::exp(dist.log_prob[k]);
        cdf[k] = acc;
    }
    Rng rng(seed);
    SampleSet out(dist.d, Convention::Bit, SampleOrigin::Exact, seed);
    for (std::size_t s = 0; s < n; ++s) {
        const double u = rng.uniform() * acc;
        auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        if (it == cdf.end()) --it;
        out.push_key(static_cast<std::uint64_t>(it - cdf.begin()));
    }
    return out;
}

}  // namespace bmfim
