#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace bmfim {

enum class Encoding { Ising, Qubo };
enum class Convention { Spin, Bit };

/// Variable alphabet used by an encoding: Ising -> {-1,+1}, QUBO -> {0,1}.
constexpr Convention convention_of(Encoding e) noexcept {
    return e == Encoding::Ising ? Convention::Spin : Convention::Bit;
}

std::string_view to_string(Encoding e) noexcept;
std::string_view to_string(Convention c) noexcept;
/// Accepts "ising" / "qubo" (case-insensitive); throws InvalidArgument.
Encoding parse_encoding(std::string_view text);

/// Largest variable count for which the flat index is defined.
inline constexpr int kMaxVariables = 64;

/// Number of parameters of a fully connected model: d linear + d(d-1)/2 pair terms.
constexpr std::size_t param_count(int d) noexcept {
    const auto n = static_cast<std::size_t>(d);
    return n + n * (n - 1) / 2;
}

/// Lexicographic rank of the pair (i, j), i < j, among all pairs over d variables.
constexpr std::size_t pair_index(int d, int i, int j) noexcept {
    const auto n = static_cast<std::size_t>(d);
    const auto a = static_cast<std::size_t>(i);
    return a * n - a * (a + 1) / 2 + static_cast<std::size_t>(j - i - 1);
}

/// Inverse of pair_index.
std::pair<int, int> pair_from_index(int d, std::size_t index);

/// One entry of the canonical flat parameter index: a single variable
/// (second == -1) or a pair first < second.
struct ParamSlot {
    int first = 0;
    int second = -1;

    bool is_linear() const noexcept { return second < 0; }
    friend bool operator==(const ParamSlot&, const ParamSlot&) = default;
};

std::size_t flat_index(int d, ParamSlot slot);
ParamSlot slot_from_flat(int d, std::size_t index);

/// One joint assignment of d binary variables.
class BinaryConfig {
public:
    /// Throws InvalidArgument if any value is outside the alphabet or d < 1.
    BinaryConfig(std::vector<int> values, Convention convention);

    /// Configuration whose bit i (BIT convention) is variable i of `key`.
    static BinaryConfig from_index(std::uint64_t key, int d, Convention convention);

    int size() const noexcept { return static_cast<int>(values_.size()); }
    Convention convention() const noexcept { return convention_; }
    std::span<const int> values() const noexcept { return values_; }
    int operator[](int i) const { return values_[static_cast<std::size_t>(i)]; }

    /// Canonical configuration integer (bit i set iff variable i is 1 / +1).
    std::uint64_t index() const noexcept;

    friend bool operator==(const BinaryConfig&, const BinaryConfig&) = default;

private:
    std::vector<int> values_;
    Convention convention_;
};

/// SPIN -> BIT via x = (s+1)/2, BIT -> SPIN via s = 2x - 1.
BinaryConfig convert_config(const BinaryConfig& config);

/// Same configuration expressed in `target` convention (no-op if already there).
BinaryConfig to_convention(const BinaryConfig& config, Convention target);

/// Encoding-tagged parameter vector in the canonical flat index.
///
/// Ising: (h_1..h_d, J_12, J_13, ..., J_(d-1)d).
/// QUBO:  (Q_11..Q_dd, Q_12, ..., Q_(d-1)d); only the upper triangle is stored.
class ModelParams {
public:
    /// Zero parameters.
    ModelParams(Encoding encoding, int d);
    /// Throws DimensionError on length mismatch, InvalidArgument on non-finite entries.
    ModelParams(Encoding encoding, int d, Eigen::VectorXd theta);

    Encoding encoding() const noexcept { return encoding_; }
    int size() const noexcept { return d_; }
    const Eigen::VectorXd& theta() const noexcept { return theta_; }

    /// h_i (Ising) or Q_ii (QUBO).
    double linear(int i) const { return theta_[i]; }
    /// J_ij (Ising) or Q_ij (QUBO); order of i, j is irrelevant, i != j.
    double pair(int i, int j) const;

    void set_linear(int i, double value);
    void set_pair(int i, int j, double value);

    /// Dense symmetric coupling matrix with zero diagonal (C_ij = C_ji = pair(i, j)).
    Eigen::MatrixXd coupling_matrix() const;

    friend bool operator==(const ModelParams&, const ModelParams&) = default;

private:
    Encoding encoding_;
    int d_;
    Eigen::VectorXd theta_;
};

/// Constant dropped by a parameter map: E_source(x) = E_target(x) + value.
struct AffineConstant {
    double value = 0.0;
};

double ising_energy(const BinaryConfig& config, const ModelParams& params);
double qubo_energy(const BinaryConfig& config, const ModelParams& params);

/// Energy in the params' own encoding; config is converted if needed.
double energy(const BinaryConfig& config, const ModelParams& params);

/// Energy of the configuration with canonical integer `key`, in params' encoding.
double energy_of_index(std::uint64_t key, const ModelParams& params);

/// QUBO -> Ising under s = 2x - 1. E_QUBO(x) = E_Ising(s(x)) + constant.
std::pair<ModelParams, AffineConstant> qubo_to_ising(const ModelParams& qubo);

/// Ising -> QUBO under x = (s + 1)/2. E_Ising(s) = E_QUBO(x(s)) + constant.
std::pair<ModelParams, AffineConstant> ising_to_qubo(const ModelParams& ising);

/// Parameters of the equivalent model in `target` encoding (constant dropped).
ModelParams convert_params(const ModelParams& params, Encoding target);

}  // namespace bmfim
