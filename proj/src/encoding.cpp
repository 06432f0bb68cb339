#include "bmfim/encoding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "bmfim/error.hpp"

namespace bmfim {

std::string_view to_string(Encoding e) noexcept { return e == Encoding::Ising ? "ising" : "qubo"; }

std::string_view to_string(Convention c) noexcept { return c == Convention::Spin ? "spin" : "bit"; }

Encoding parse_encoding(std::string_view text) {
    std::string lower(text);
    std::ranges::transform(lower, lower.begin(), [](unsigned char ch) { return std::tolower(ch); });
    if (lower == "ising") return Encoding::Ising;
    if (lower == "qubo") return Encoding::Qubo;
    throw InvalidArgument("unknown encoding '" + std::string(text) + "' (expected ising or qubo)");
}

std::pair<int, int> pair_from_index(int d, std::size_t index) {
    if (index >= param_count(d) - static_cast<std::size_t>(d))
        throw InvalidArgument("pair index out of range");
    int i = 0;
    std::size_t row = static_cast<std::size_t>(d - 1);
    while (index >= row) {
        index -= row;
        --row;
        ++i;
    }
    return {i, i + 1 + static_cast<int>(index)};
}

std::size_t flat_index(int d, ParamSlot slot) {
    if (slot.first < 0 || slot.first >= d) throw InvalidArgument("variable index out of range");
    if (slot.is_linear()) return static_cast<std::size_t>(slot.first);
    if (slot.second <= slot.first || slot.second >= d)
        throw InvalidArgument("pair slot must satisfy first < second < d");
    return static_cast<std::size_t>(d) + pair_index(d, slot.first, slot.second);
}

ParamSlot slot_from_flat(int d, std::size_t index) {
    if (index < static_cast<std::size_t>(d)) return {static_cast<int>(index), -1};
    const auto [i, j] = pair_from_index(d, index - static_cast<std::size_t>(d));
    return {i, j};
}

// ---------------------------------------------------------------------------
// BinaryConfig

BinaryConfig::BinaryConfig(std::vector<int> values, Convention convention)
    : values_(std::move(values)), convention_(convention) {
    if (values_.empty()) throw InvalidArgument("configuration needs at least one variable");
    for (int v : values_) {
        const bool ok = convention_ == Convention::Spin ? (v == -1 || v == 1) : (v == 0 || v == 1);
        if (!ok)
            throw InvalidArgument("value " + std::to_string(v) + " is not in the " +
                                  std::string(to_string(convention_)) + " alphabet");
    }
}

BinaryConfig BinaryConfig::from_index(std::uint64_t key, int d, Convention convention) {
    if (d < 1 || d > kMaxVariables) throw InvalidArgument("variable count out of range");
    std::vector<int> values(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
        const int bit = static_cast<int>((key >> i) & 1U);
        values[static_cast<std::size_t>(i)] = convention == Convention::Spin ? 2 * bit - 1 : bit;
    }
    return BinaryConfig(std::move(values), convention);
}

std::uint64_t BinaryConfig::index() const noexcept {
    std::uint64_t key = 0;
    for (std::size_t i = 0; i < values_.size(); ++i)
        if (values_[i] == 1) key |= std::uint64_t{1} << i;
    return key;
}

BinaryConfig convert_config(const BinaryConfig& config) {
    std::vector<int> out(config.values().begin(), config.values().end());
    if (config.convention() == Convention::Spin) {
        for (int& v : out) v = (v + 1) / 2;
        return BinaryConfig(std::move(out), Convention::Bit);
    }
    for (int& v : out) v = 2 * v - 1;
    return BinaryConfig(std::move(out), Convention::Spin);
}

BinaryConfig to_convention(const BinaryConfig& config, Convention target) {
    return config.convention() == target ? config : convert_config(config);
}

// ---------------------------------------------------------------------------
// ModelParams

ModelParams::ModelParams(Encoding encoding, int d)
    : ModelParams(encoding, d, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(param_count(d)))) {}

ModelParams::ModelParams(Encoding encoding, int d, Eigen::VectorXd theta)
    : encoding_(encoding), d_(d), theta_(std::move(theta)) {
    if (d < 1 || d > kMaxVariables) throw InvalidArgument("variable count out of range");
    if (static_cast<std::size_t>(theta_.size()) != param_count(d))
        throw DimensionError("parameter vector has length " + std::to_string(theta_.size()) +
                             ", expected " + std::to_string(param_count(d)) + " for d=" +
                             std::to_string(d));
    if (!theta_.allFinite()) throw InvalidArgument("parameters must be finite");
}

double ModelParams::pair(int i, int j) const {
    if (i > j) std::swap(i, j);
    return theta_[static_cast<Eigen::Index>(flat_index(d_, {i, j}))];
}

void ModelParams::set_linear(int i, double value) {
    if (!std::isfinite(value)) throw InvalidArgument("parameters must be finite");
    theta_[static_cast<Eigen::Index>(flat_index(d_, {i, -1}))] = value;
}

void ModelParams::set_pair(int i, int j, double value) {
    if (!std::isfinite(value)) throw InvalidArgument("parameters must be finite");
    if (i > j) std::swap(i, j);
    theta_[static_cast<Eigen::Index>(flat_index(d_, {i, j}))] = value;
}

Eigen::MatrixXd ModelParams::coupling_matrix() const {
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(d_, d_);
    Eigen::Index k = d_;
    for (int i = 0; i < d_; ++i)
        for (int j = i + 1; j < d_; ++j, ++k) c(i, j) = c(j, i) = theta_[k];
    return c;
}

// ---------------------------------------------------------------------------
// Energies

namespace {

void require_match(const BinaryConfig& config, const ModelParams& params, Encoding expected) {
    if (params.encoding() != expected)
        throw DimensionError("expected " + std::string(to_string(expected)) + " parameters");
    if (config.convention() != convention_of(expected))
        throw DimensionError("expected a " + std::string(to_string(convention_of(expected))) +
                             " configuration");
    if (config.size() != params.size())
        throw DimensionError("configuration has " + std::to_string(config.size()) +
                             " variables, parameters have " + std::to_string(params.size()));
}

// Shared by both encodings: sum_i a_i v_i + sum_{i<j} b_ij v_i v_j. For bits,
// v_i^2 = v_i so Q_ii x_i x_i is the linear term.
template <typename Values>
double quadratic_form(const Eigen::VectorXd& theta, int d, const Values& v) {
    double e = 0.0;
    for (int i = 0; i < d; ++i) e += theta[i] * v[i];
    Eigen::Index k = d;
    for (int i = 0; i < d; ++i) {
        if (v[i] == 0) {
            k += d - i - 1;
            continue;
        }
        double row = 0.0;
        for (int j = i + 1; j < d; ++j, ++k) row += theta[k] * v[j];
        e += v[i] * row;
    }
    return e;
}

}  // namespace

double ising_energy(const BinaryConfig& config, const ModelParams& params) {
    require_match(config, params, Encoding::Ising);
    return quadratic_form(params.theta(), params.size(), config.values());
}

double qubo_energy(const BinaryConfig& config, const ModelParams& params) {
    require_match(config, params, Encoding::Qubo);
    return quadratic_form(params.theta(), params.size(), config.values());
}

double energy(const BinaryConfig& config, const ModelParams& params) {
    const auto c = to_convention(config, convention_of(params.encoding()));
    return params.encoding() == Encoding::Ising ? ising_energy(c, params) : qubo_energy(c, params);
}

double energy_of_index(std::uint64_t key, const ModelParams& params) {
    const int d = params.size();
    int v[kMaxVariables];
    const bool spin = params.encoding() == Encoding::Ising;
    for (int i = 0; i < d; ++i) {
        const int bit = static_cast<int>((key >> i) & 1U);
        v[i] = spin ? 2 * bit - 1 : bit;
    }
    return quadratic_form(params.theta(), d, v);
}

// ---------------------------------------------------------------------------
// Parameter maps

std::pair<ModelParams, AffineConstant> qubo_to_ising(const ModelParams& qubo) {
    if (qubo.encoding() != Encoding::Qubo) throw DimensionError("qubo_to_ising needs QUBO parameters");
    const int d = qubo.size();
    ModelParams ising(Encoding::Ising, d);
    double constant = 0.0;
    for (int i = 0; i < d; ++i) {
        double h = 0.5 * qubo.linear(i);
        for (int j = 0; j < d; ++j)
            if (j != i) h += 0.25 * qubo.pair(i, j);
        ising.set_linear(i, h);
        constant += 0.5 * qubo.linear(i);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            ising.set_pair(i, j, 0.25 * qubo.pair(i, j));
            constant += 0.25 * qubo.pair(i, j);
        }
    return {std::move(ising), AffineConstant{constant}};
}

std::pair<ModelParams, AffineConstant> ising_to_qubo(const ModelParams& ising) {
    if (ising.encoding() != Encoding::Ising) throw DimensionError("ising_to_qubo needs Ising parameters");
    const int d = ising.size();
    ModelParams qubo(Encoding::Qubo, d);
    double constant = 0.0;
    for (int i = 0; i < d; ++i) {
        double coupling_sum = 0.0;
        for (int j = 0; j < d; ++j)
            if (j != i) coupling_sum += ising.pair(i, j);
        qubo.set_linear(i, 2.0 * (ising.linear(i) - coupling_sum));
        constant -= ising.linear(i);
    }
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            qubo.set_pair(i, j, 4.0 * ising.pair(i, j));
            constant += ising.pair(i, j);
        }
    return {std::move(qubo), AffineConstant{constant}};
}

ModelParams convert_params(const ModelParams& params, Encoding target) {
    if (params.encoding() == target) return params;
    return target == Encoding::Ising ? qubo_to_ising(params).first : ising_to_qubo(params).first;
}

}  // namespace bmfim
