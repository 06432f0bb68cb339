#include "reference.hpp"

#include <cmath>
#include <map>
#include <utility>

namespace bmfim::reference {

namespace {

struct Coefficients {
    std::vector<double> linear;
    std::map<std::pair<int, int>, double> pairs;
};

Coefficients unpack(const ModelParams& params) {
    const int d = params.size();
    Coefficients c;
    int k = 0;
    for (int i = 0; i < d; ++i) c.linear.push_back(params.theta()[k++]);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) c.pairs[{i, j}] = params.theta()[k++];
    return c;
}

std::vector<double> stats(const std::vector<int>& v) {
    std::vector<double> phi;
    for (int a : v) phi.push_back(a);
    for (std::size_t i = 0; i < v.size(); ++i)
        for (std::size_t j = i + 1; j < v.size(); ++j) phi.push_back(v[i] * v[j]);
    return phi;
}

}  // namespace

std::vector<int> values_of(std::uint64_t key, int d, Encoding encoding) {
    std::vector<int> v;
    for (int i = 0; i < d; ++i) {
        const int bit = static_cast<int>((key >> i) & 1U);
        v.push_back(encoding == Encoding::Ising ? 2 * bit - 1 : bit);
    }
    return v;
}

double energy(const ModelParams& params, const std::vector<int>& values) {
    const auto c = unpack(params);
    const int d = params.size();
    double e = 0.0;
    // QUBO: sum_{i<=j} Q_ij x_i x_j includes Q_ii x_i x_i on the diagonal.
    for (int i = 0; i < d; ++i)
        e += params.encoding() == Encoding::Qubo ? c.linear[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(i)]
                                                 : c.linear[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(i)];
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            if (i < j) e += c.pairs.at({i, j}) * values[static_cast<std::size_t>(i)] * values[static_cast<std::size_t>(j)];
    return e;
}

std::vector<double> probabilities(const ModelParams& params, double beta) {
    const int d = params.size();
    const std::uint64_t states = std::uint64_t{1} << d;
    std::vector<double> w(states);
    double z = 0.0;
    for (std::uint64_t k = 0; k < states; ++k) {
        w[k] = std::exp(-beta * energy(params, values_of(k, d, params.encoding())));
        z += w[k];
    }
    for (double& x : w) x /= z;
    return w;
}

Eigen::MatrixXd covariance_fim(const ModelParams& params, double beta) {
    const int d = params.size();
    const auto p = probabilities(params, beta);
    const auto n = static_cast<Eigen::Index>(d + d * (d - 1) / 2);
    Eigen::MatrixXd second = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd first = Eigen::VectorXd::Zero(n);
    for (std::uint64_t k = 0; k < p.size(); ++k) {
        const auto phi_v = stats(values_of(k, d, params.encoding()));
        const Eigen::VectorXd phi = Eigen::Map<const Eigen::VectorXd>(phi_v.data(), n);
        first += p[k] * phi;
        second += p[k] * phi * phi.transpose();
    }
    return beta * beta * (second - first * first.transpose());
}

double moment(const ModelParams& params, double beta, const std::vector<int>& subset) {
    const auto p = probabilities(params, beta);
    double m = 0.0;
    for (std::uint64_t k = 0; k < p.size(); ++k) {
        const auto v = values_of(k, params.size(), params.encoding());
        double prod = 1.0;
        for (int i : subset) prod *= v[static_cast<std::size_t>(i)];
        m += p[k] * prod;
    }
    return m;
}

double nll(const ModelParams& params, const std::vector<std::uint64_t>& data, double beta) {
    const int d = params.size();
    double z = 0.0;
    for (std::uint64_t k = 0; k < (std::uint64_t{1} << d); ++k)
        z += std::exp(-beta * energy(params, values_of(k, d, params.encoding())));
    double acc = 0.0;
    for (auto key : data) acc += beta * energy(params, values_of(key, d, params.encoding()));
    return acc / static_cast<double>(data.size()) + std::log(z);
}

Eigen::VectorXd fd_gradient(const ScalarFn& f, const Eigen::VectorXd& x, double step) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index a = 0; a < x.size(); ++a) {
        Eigen::VectorXd up = x, down = x;
        up[a] += step;
        down[a] -= step;
        g[a] = (f(up) - f(down)) / (2.0 * step);
    }
    return g;
}

Eigen::MatrixXd fd_hessian(const ScalarFn& f, const Eigen::VectorXd& x, double step) {
    const auto n = x.size();
    Eigen::MatrixXd h(n, n);
    const double f0 = f(x);
    for (Eigen::Index a = 0; a < n; ++a) {
        Eigen::VectorXd up = x, down = x;
        up[a] += step;
        down[a] -= step;
        h(a, a) = (f(up) - 2.0 * f0 + f(down)) / (step * step);
        for (Eigen::Index b = a + 1; b < n; ++b) {
            Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
            pp[a] += step; pp[b] += step;
            pm[a] += step; pm[b] -= step;
            mp[a] -= step; mp[b] += step;
            mm[a] -= step; mm[b] -= step;
            h(a, b) = h(b, a) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * step * step);
        }
    }
    return h;
}

double power_iteration_max(const Eigen::MatrixXd& m, double rel_tol, int max_iter) {
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()) / std::sqrt(static_cast<double>(m.rows()));
    // Break symmetry so v is unlikely to be orthogonal to the top eigenvector.
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] += 1e-3 * static_cast<double>(i % 7);
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w = m * v;
        const double next = v.dot(w);
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        v = w / norm;
        if (it > 10 && std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
        lambda = next;
    }
    return lambda;
}

Eigen::MatrixXd random_psd(int n, Rng& rng) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) a(i, j) = rng.normal();
    const Eigen::MatrixXd m = a * a.transpose() / static_cast<double>(n);
    return 0.5 * (m + m.transpose());
}

ModelParams random_params(Encoding encoding, int d, double scale, Rng& rng) {
    Eigen::VectorXd theta(static_cast<Eigen::Index>(param_count(d)));
    for (Eigen::Index k = 0; k < theta.size(); ++k) theta[k] = scale * rng.normal();
    return ModelParams(encoding, d, theta);
}

}  // namespace bmfim::reference
