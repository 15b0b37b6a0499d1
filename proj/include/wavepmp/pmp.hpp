#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/network.hpp"
#include "wavepmp/waves.hpp"

#include <utility>
#include <vector>

namespace wavepmp {

/// Node-wise maximum-principle residuals. r_x and r_lambda are typed per node
/// (k = 0..N), r_theta per layer (k = 0..N-1). They vanish simultaneously iff
/// the forward constraints, the adjoint recursion and parameter stationarity
/// hold.
struct ResidualSet {
    std::vector<Matrix> r_x;
    std::vector<Matrix> r_lambda;
    std::vector<Vector> r_theta;

    static double max_norm(const std::vector<Matrix>& v) {
        double m = 0.0;
        for (const auto& r : v) m = std::max(m, r.norm());
        return m;
    }

    double max_x_norm() const { return max_norm(r_x); }
    double max_lambda_norm() const { return max_norm(r_lambda); }
    double max_theta_norm() const {
        double m = 0.0;
        for (const auto& r : r_theta) m = std::max(m, r.norm());
        return m;
    }
    /// max over nodes of the l2 residual norm, states and costates combined
    double max_node_norm() const { return std::max(max_x_norm(), max_lambda_norm()); }
};

/// H_k = lambda_{k+1}^T f_k(x_k; theta_k) + R_k(x_k, theta_k), batch mean.
inline double discrete_hamiltonian(const Layer& layer, const Matrix& x_k,
                                   const Matrix& lambda_k1) {
    require(lambda_k1.rows() == layer.out_dim(),
            "hamiltonian: costate dimension mismatch");
    require(x_k.cols() == lambda_k1.cols(), "hamiltonian: batch mismatch");
    const Matrix fx = layer.forward(x_k);
    const double pairing =
        fx.cwiseProduct(lambda_k1).sum() / static_cast<double>(x_k.cols());
    return pairing + layer.penalty(x_k);
}

/// States x_0..x_N with x_{k+1} = f_k(x_k). Throws on nonfinite values.
inline std::vector<Matrix> forward_rollout(const NetworkSpec& net, const Matrix& x_in) {
    require(x_in.rows() == net.node_width(0), "rollout: input width mismatch");
    std::vector<Matrix> xs;
    xs.reserve(net.nodes());
    xs.push_back(x_in);
    for (const auto& layer : net.layers) {
        xs.push_back(layer->forward(xs.back()));
        if (!xs.back().allFinite())
            throw std::runtime_error("rollout: nonfinite state encountered");
    }
    return xs;
}

/// Costates lambda_0..lambda_N: lambda_N = grad ell, lambda_k = J_k^T
/// lambda_{k+1} + grad_x R_k.
inline std::vector<Matrix> adjoint_recursion(const NetworkSpec& net,
                                             const std::vector<Matrix>& states,
                                             const Matrix& y) {
    require(static_cast<int>(states.size()) == net.nodes(),
            "adjoint: state count mismatch");
    std::vector<Matrix> lams(net.nodes());
    lams[net.depth()] = net.loss->grad(states.back(), y);
    for (int k = net.depth() - 1; k >= 0; --k) {
        lams[k] = net.layers[k]->vjp(states[k], lams[k + 1]) +
                  net.layers[k]->penalty_grad_x(states[k]);
        if (!lams[k].allFinite())
            throw std::runtime_error("adjoint: nonfinite costate encountered");
    }
    return lams;
}

/// r_theta_k = grad_theta R_k + (grad_theta f_k)^T lambda_{k+1}
inline Vector param_residual(const Layer& layer, const Matrix& x_k,
                             const Matrix& lambda_k1) {
    return layer.penalty_grad_params(x_k) + layer.param_vjp(x_k, lambda_k1);
}

/// Sequential forward/backward sweep used as the locked reference.
struct BackpropResult {
    std::vector<Matrix> states;
    std::vector<Matrix> costates;
    std::vector<Vector> grads;
    double loss = 0.0;
};

inline BackpropResult backprop_oracle(const NetworkSpec& net, const Matrix& x_in,
                                      const Matrix& y) {
    BackpropResult r;
    r.states = forward_rollout(net, x_in);
    r.costates = adjoint_recursion(net, r.states, y);
    r.grads.reserve(net.depth());
    for (int k = 0; k < net.depth(); ++k)
        r.grads.push_back(param_residual(*net.layers[k], r.states[k], r.costates[k + 1]));
    r.loss = net.loss->value(r.states.back(), y);
    for (int k = 0; k < net.depth(); ++k) r.loss += net.layers[k]->penalty(r.states[k]);
    return r;
}

/// Node residuals of arbitrary (x, lambda) fields against the discrete PMP
/// equations. Neighbor terms use the same snapshot across all nodes.
inline ResidualSet node_residuals(const NetworkSpec& net, const std::vector<Matrix>& x,
                                  const std::vector<Matrix>& lambda, const Matrix& x_in,
                                  const Matrix& y) {
    const int N = net.depth();
    require(static_cast<int>(x.size()) == N + 1 &&
                static_cast<int>(lambda.size()) == N + 1,
            "residuals: node count mismatch");
    ResidualSet res;
    res.r_x.resize(N + 1);
    res.r_lambda.resize(N + 1);
    res.r_x[0] = x[0] - x_in;
    for (int k = 1; k <= N; ++k)
        res.r_x[k] = x[k] - net.layers[k - 1]->forward(x[k - 1]);
    res.r_lambda[N] = lambda[N] - net.loss->grad(x[N], y);
    for (int k = 0; k < N; ++k)
        res.r_lambda[k] = lambda[k] - net.layers[k]->vjp(x[k], lambda[k + 1]) -
                          net.layers[k]->penalty_grad_x(x[k]);
    return res;
}

/// E_pm_k = (Theta_k r_x_k +- Theta_k^{-T} r_lambda_k)/sqrt(2)
inline std::pair<std::vector<Matrix>, std::vector<Matrix>> wave_residuals(
    const ResidualSet& res, const std::vector<MetricFactor>& thetas) {
    require(res.r_x.size() == thetas.size(), "wave_residuals: metric count mismatch");
    std::vector<Matrix> ep, em;
    ep.reserve(res.r_x.size());
    em.reserve(res.r_x.size());
    for (std::size_t k = 0; k < res.r_x.size(); ++k) {
        const Matrix a = thetas[k].apply(res.r_x[k]);
        const Matrix b = thetas[k].apply_inv_t(res.r_lambda[k]);
        ep.push_back(kInvSqrt2 * (a + b));
        em.push_back(kInvSqrt2 * (a - b));
    }
    return {std::move(ep), std::move(em)};
}

/// Forced forward-Euler source step: w_pm <- w_pm - alpha * E_pm.
inline void inject_sources(WaveField& field, const std::vector<Matrix>& e_plus,
                           const std::vector<Matrix>& e_minus, double alpha) {
    require(alpha > 0.0, "inject_sources: alpha must be positive");
    require(e_plus.size() == field.plus.size() && e_minus.size() == field.minus.size(),
            "inject_sources: node count mismatch");
    for (std::size_t k = 0; k < field.plus.size(); ++k) {
        field.plus[k] -= alpha * e_plus[k];
        field.minus[k] -= alpha * e_minus[k];
    }
}

}  // namespace wavepmp
