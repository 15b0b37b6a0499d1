#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/gradcheck.hpp"
#include "wavepmp/network.hpp"

#include <memory>
#include <random>
#include <vector>

namespace wavepmp {

/// Seeded MLP: affine layers with uniform(-1/sqrt(fan_in), +1/sqrt(fan_in))
/// weight and bias init. The hidden layers use the requested activation; the
/// output layer is affine-linear. Every layer is adjoint/FD-verified at
/// construction.
inline NetworkSpec make_mlp(const std::vector<int>& widths, Activation hidden_act,
                            std::uint64_t seed, double l2 = 0.0,
                            bool verify_layers = true) {
    require(widths.size() >= 2, "make_mlp: need at least input and output widths");
    std::mt19937_64 rng(seed);
    NetworkSpec net;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        const int fan_in = widths[k];
        const int fan_out = widths[k + 1];
        require(fan_in > 0 && fan_out > 0, "make_mlp: widths must be positive");
        const double lim = 1.0 / std::sqrt(static_cast<double>(fan_in));
        std::uniform_real_distribution<double> u(-lim, lim);
        Matrix W(fan_out, fan_in);
        for (int j = 0; j < fan_in; ++j)
            for (int i = 0; i < fan_out; ++i) W(i, j) = u(rng);
        Vector b(fan_out);
        for (int i = 0; i < fan_out; ++i) b[i] = u(rng);
        const Activation act =
            (k + 2 == widths.size()) ? Activation::Linear : hidden_act;
        net.layers.push_back(std::make_shared<AffineLayer>(W, b, act, l2));
        if (verify_layers) {
            const auto rep = check_layer(*net.layers.back(), seed + k);
            require(rep.ok(), "make_mlp: layer failed adjoint/finite-difference check");
        }
    }
    net.loss = std::make_shared<QuadraticLoss>();
    net.ensure_metrics();
    net.validate();
    return net;
}

struct Dataset {
    Matrix X;  ///< inputs, one column per sample
    Matrix Y;  ///< targets, one column per sample
    int size() const { return static_cast<int>(X.cols()); }
};

/// The four XOR points in +-1 encoding; target is the negated product.
inline Dataset dataset_xor() {
    Dataset d;
    d.X.resize(2, 4);
    d.X << -1, -1, 1, 1,
           -1,  1, -1, 1;
    d.Y.resize(1, 4);
    d.Y << -1, 1, 1, -1;
    return d;
}

/// Synthetic linear regression y = w*.x + b* + noise, planted weights drawn
/// from the seeded generator. noise = 0 makes the planted model recoverable
/// exactly via the normal equations.
inline Dataset dataset_linreg(int n, int dim, double noise, std::uint64_t seed) {
    require(n >= 1 && dim >= 1, "dataset_linreg: bad sizes");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Vector w(dim);
    for (int i = 0; i < dim; ++i) w[i] = g(rng);
    const double b = g(rng);
    Dataset d;
    d.X.resize(dim, n);
    d.Y.resize(1, n);
    for (int j = 0; j < n; ++j) {
        for (int i = 0; i < dim; ++i) d.X(i, j) = g(rng);
        d.Y(0, j) = w.dot(d.X.col(j)) + b + noise * g(rng);
    }
    return d;
}

}  // namespace wavepmp
