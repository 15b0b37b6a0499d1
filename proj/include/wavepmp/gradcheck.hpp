#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/network.hpp"

#include <random>

namespace wavepmp {

/// Construction-time layer verification: the JVP/VJP pair must pass the
/// adjoint test, and the parameter VJP must match central finite differences
/// of lambda^T f(x; theta). Intended for the small layers built here; test
/// suites keep their own independent differencing oracle.
struct LayerCheckReport {
    double adjoint_error = 0.0;
    double param_fd_error = 0.0;
    bool ok(double adjoint_tol = 1e-12, double fd_tol = 1e-5) const {
        return adjoint_error <= adjoint_tol && param_fd_error <= fd_tol;
    }
};

inline LayerCheckReport check_layer(const Layer& layer, std::uint64_t seed = 0) {
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::normal_distribution<double> g(0.0, 1.0);
    auto randm = [&](int r, int c) {
        Matrix m(r, c);
        for (int j = 0; j < c; ++j)
            for (int i = 0; i < r; ++i) m(i, j) = g(rng);
        return m;
    };

    LayerCheckReport rep;
    const Matrix x = randm(layer.in_dim(), 1);
    const Matrix u = randm(layer.in_dim(), 1);
    const Matrix v = randm(layer.out_dim(), 1);

    // <J u, v> == <u, J^T v>
    const double lhs = layer.jvp(x, u).cwiseProduct(v).sum();
    const double rhs = u.cwiseProduct(layer.vjp(x, v)).sum();
    rep.adjoint_error = std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));

    // central differences of theta -> lambda^T f(x; theta)
    const Vector theta0 = layer.params();
    const Vector analytic = layer.param_vjp(x, v);
    auto& mutable_layer = const_cast<Layer&>(layer);
    double worst = 0.0;
    const double scale = std::max(1.0, theta0.cwiseAbs().maxCoeff());
    const double h = 1e-6 * scale;
    for (int i = 0; i < layer.param_dim(); ++i) {
        Vector t = theta0;
        t[i] += h;
        mutable_layer.set_params(t);
        const double fp = layer.forward(x).cwiseProduct(v).sum();
        t[i] -= 2 * h;
        mutable_layer.set_params(t);
        const double fm = layer.forward(x).cwiseProduct(v).sum();
        const double fd = (fp - fm) / (2 * h);
        worst = std::max(worst, std::abs(fd - analytic[i]) /
                                    std::max(1.0, std::abs(analytic[i])));
    }
    mutable_layer.set_params(theta0);
    rep.param_fd_error = worst;
    return rep;
}

}  // namespace wavepmp
