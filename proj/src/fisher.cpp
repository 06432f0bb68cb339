#include "bmfim/fisher.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>

#include "bmfim/error.hpp"
#include "bmfim/io.hpp"

namespace bmfim {

Eigen::VectorXd sufficient_stats(const BinaryConfig& config) {
    const int d = config.size();
    Eigen::VectorXd phi(static_cast<Eigen::Index>(param_count(d)));
    Eigen::Index k = 0;
    for (int i = 0; i < d; ++i) phi[k++] = config[i];
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) phi[k++] = config[i] * config[j];
    return phi;
}

Eigen::VectorXd likelihood_gradient(const MomentTable& data, const MomentTable& model, double beta) {
    if (data.size() != model.size()) throw DimensionError("moment tables differ in variable count");
    if (data.encoding() != model.encoding()) throw DimensionError("moment tables differ in encoding");
    if (data.max_order() < 2 || model.max_order() < 2)
        throw InvalidArgument("likelihood gradient needs moments up to order 2");
    return beta * (data.flat_first_second() - model.flat_first_second());
}

namespace {

struct IndexSet {
    std::array<int, 4> idx{};
    int size = 0;
};

// Sorts in place, then applies s^2 = 1 (drop pairs) or x^2 = x (dedupe).
IndexSet reduce(IndexSet in, Convention convention) {
    std::sort(in.idx.begin(), in.idx.begin() + in.size);
    IndexSet out;
    for (int p = 0; p < in.size;) {
        int q = p;
        while (q < in.size && in.idx[static_cast<std::size_t>(q)] == in.idx[static_cast<std::size_t>(p)]) ++q;
        const int multiplicity = q - p;
        if (convention == Convention::Bit || multiplicity % 2 == 1)
            out.idx[static_cast<std::size_t>(out.size++)] = in.idx[static_cast<std::size_t>(p)];
        p = q;
    }
    return out;
}

IndexSet slot_set(const ParamSlot& s) {
    IndexSet out;
    out.idx[0] = s.first;
    out.size = 1;
    if (!s.is_linear()) {
        out.idx[1] = s.second;
        out.size = 2;
    }
    return out;
}

}  // namespace

std::vector<int> reduce_product(std::span<const int> indices, Convention convention) {
    if (indices.size() > 4) throw InvalidArgument("products of more than four variables are not tabulated");
    IndexSet in;
    for (int i : indices) in.idx[static_cast<std::size_t>(in.size++)] = i;
    const auto out = reduce(in, convention);
    return {out.idx.begin(), out.idx.begin() + out.size};
}

FimMatrix fim_from_moments(const MomentTable& moments, double beta) {
    if (moments.max_order() < 4) throw InvalidArgument("FIM assembly needs moments up to order 4");
    const int d = moments.size();
    const auto n = static_cast<Eigen::Index>(param_count(d));
    const Convention convention = convention_of(moments.encoding());

    std::vector<IndexSet> slots;
    slots.reserve(static_cast<std::size_t>(n));
    Eigen::VectorXd mean(n);
    for (Eigen::Index a = 0; a < n; ++a) {
        slots.push_back(slot_set(slot_from_flat(d, static_cast<std::size_t>(a))));
        const auto& s = slots.back();
        mean[a] = moments.at(std::span<const int>(s.idx.data(), static_cast<std::size_t>(s.size)));
    }

    FimMatrix fim{d, moments.encoding(),
                  moments.source(), Eigen::MatrixXd(n, n)};
    const double scale = beta * beta;
    for (Eigen::Index a = 0; a < n; ++a) {
        for (Eigen::Index b = a; b < n; ++b) {
            IndexSet joint = slots[static_cast<std::size_t>(a)];
            const auto& sb = slots[static_cast<std::size_t>(b)];
            for (int p = 0; p < sb.size; ++p) joint.idx[static_cast<std::size_t>(joint.size++)] = sb.idx[static_cast<std::size_t>(p)];
            const auto r = reduce(joint, convention);
            const double second = moments.at(std::span<const int>(r.idx.data(), static_cast<std::size_t>(r.size)));
            fim.matrix(a, b) = fim.matrix(b, a) = scale * (second - mean[a] * mean[b]);
        }
    }
    return fim;
}

FimBlocks fim_blocks(const FimMatrix& fim) {
    const Eigen::Index d = fim.d;
    const Eigen::Index p = fim.matrix.rows() - d;
    return {fim.matrix.topLeftCorner(d, d), fim.matrix.topRightCorner(d, p),
            fim.matrix.bottomLeftCorner(p, d), fim.matrix.bottomRightCorner(p, p)};
}

double offblock_ratio(const FimMatrix& fim) {
    const double total = fim.matrix.norm();
    if (total == 0.0) return 0.0;
    const Eigen::Index d = fim.d;
    return fim.matrix.topRightCorner(d, fim.matrix.cols() - d).norm() / total;
}

void write_fim_csv(std::ostream& out, const FimMatrix& fim, long iteration) {
    out << to_string(fim.encoding) << ',' << fim.d << ',' << iteration << '\n';
    for (Eigen::Index r = 0; r < fim.matrix.rows(); ++r) {
        for (Eigen::Index c = 0; c < fim.matrix.cols(); ++c) {
            if (c > 0) out << ',';
            out << format_double(fim.matrix(r, c));
        }
        out << '\n';
    }
}

}  // namespace bmfim
