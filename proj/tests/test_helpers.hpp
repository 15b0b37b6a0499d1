#pragma once

// Shared test utilities. The finite-difference oracle here is deliberately
// independent of the library's gradient path: it only calls forward maps and
// loss values.

#include "wavepmp/wavepmp.hpp"

#include <random>

namespace wavepmp::test {

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Matrix m(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) m(i, j) = g(rng);
    return m;
}

inline Vector random_vector(std::mt19937_64& rng, int n, double scale = 1.0) {
    return random_matrix(rng, n, 1, scale);
}

inline MetricFactor random_dense_metric(std::mt19937_64& rng, int n) {
    Matrix t = random_matrix(rng, n, n) + 2.5 * Matrix::Identity(n, n);
    return MetricFactor::dense(t);
}

inline Matrix random_spd(std::mt19937_64& rng, int n) {
    const Matrix a = random_matrix(rng, n, n);
    return a * a.transpose() + 0.5 * Matrix::Identity(n, n);
}

/// Total objective evaluated through forward passes only.
inline double objective(const NetworkSpec& net, const Matrix& x_in, const Matrix& y) {
    std::vector<Matrix> xs;
    xs.push_back(x_in);
    double penalties = 0.0;
    for (const auto& layer : net.layers) {
        penalties += layer->penalty(xs.back());
        xs.push_back(layer->forward(xs.back()));
    }
    return net.loss->value(xs.back(), y) + penalties;
}

/// Central finite differences of the objective w.r.t. one layer's parameters.
inline Vector fd_param_gradient(NetworkSpec& net, int layer, const Matrix& x_in,
                                const Matrix& y, double h = 1e-6) {
    const Vector theta0 = net.layers[layer]->params();
    Vector grad(theta0.size());
    for (Eigen::Index i = 0; i < theta0.size(); ++i) {
        Vector t = theta0;
        const double step = h * std::max(1.0, std::abs(theta0[i]));
        t[i] += step;
        net.layers[layer]->set_params(t);
        const double fp = objective(net, x_in, y);
        t[i] -= 2 * step;
        net.layers[layer]->set_params(t);
        const double fm = objective(net, x_in, y);
        grad[i] = (fp - fm) / (2 * step);
    }
    net.layers[layer]->set_params(theta0);
    return grad;
}

/// Central finite differences of the objective w.r.t. the input.
inline Matrix fd_input_gradient(const NetworkSpec& net, const Matrix& x_in,
                                const Matrix& y, double h = 1e-6) {
    Matrix grad(x_in.rows(), x_in.cols());
    Matrix x = x_in;
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const double step = h * std::max(1.0, std::abs(x_in(i, j)));
            x(i, j) = x_in(i, j) + step;
            const double fp = objective(net, x, y);
            x(i, j) = x_in(i, j) - step;
            const double fm = objective(net, x, y);
            x(i, j) = x_in(i, j);
            grad(i, j) = (fp - fm) / (2 * step);
        }
    return grad;
}

inline double rel_err(double got, double want) {
    return std::abs(got - want) / std::max(1.0, std::abs(want));
}

inline double max_rel_err(const Vector& got, const Vector& want) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < got.size(); ++i)
        worst = std::max(worst, std::abs(got[i] - want[i]) /
                                    std::max(1.0, std::abs(want[i])));
    return worst;
}

}  // namespace wavepmp::test
