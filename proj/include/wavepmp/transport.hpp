#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/grid.hpp"
#include "wavepmp/network.hpp"
#include "wavepmp/waves.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace wavepmp {

/// Power-preserving transformer carrying waves across link k -> k+1:
/// T_k = Theta_{k+1} J_k Theta_k^{-1}, applied matrix-free through JVP/VJP
/// handles. Constant-width links default to the identity.
class JunctionOperator {
public:
    using Apply = std::function<Matrix(const Matrix&)>;

    static JunctionOperator identity(int link, int n) {
        JunctionOperator j;
        j.link_ = link;
        j.in_ = j.out_ = n;
        j.identity_ = true;
        return j;
    }

    static JunctionOperator transformer(int link, const MetricFactor& theta_k,
                                        const MetricFactor& theta_k1, Apply jvp,
                                        Apply vjp) {
        JunctionOperator j;
        j.link_ = link;
        j.in_ = theta_k.dim();
        j.out_ = theta_k1.dim();
        j.identity_ = false;
        j.fwd_ = [theta_k, theta_k1, jvp = std::move(jvp)](const Matrix& v) {
            return theta_k1.apply(jvp(theta_k.apply_inv(v)));
        };
        j.bwd_ = [theta_k, theta_k1, vjp = std::move(vjp)](const Matrix& v) {
            return theta_k.apply_inv_t(vjp(theta_k1.apply_t(v)));
        };
        return j;
    }

    int link() const { return link_; }
    int in_dim() const { return in_; }
    int out_dim() const { return out_; }
    bool is_identity() const { return identity_; }

    /// T_k v
    Matrix apply(const Matrix& v) const {
        require(static_cast<int>(v.rows()) == in_, "junction: forward dim mismatch");
        if (identity_) return v;
        Matrix out = fwd_(v);
        require(static_cast<int>(out.rows()) == out_, "junction: bad forward output dim");
        return out;
    }

    /// T_k^T v
    Matrix apply_transpose(const Matrix& v) const {
        require(static_cast<int>(v.rows()) == out_, "junction: backward dim mismatch");
        if (identity_) return v;
        Matrix out = bwd_(v);
        require(static_cast<int>(out.rows()) == in_, "junction: bad backward output dim");
        return out;
    }

    /// Materialize T_k as a dense matrix (test oracles and diagnostics).
    Matrix dense() const {
        Matrix t(out_, in_);
        for (int i = 0; i < in_; ++i) t.col(i) = apply(Matrix::Identity(in_, in_).col(i));
        return t;
    }

private:
    int link_ = 0;
    int in_ = 0;
    int out_ = 0;
    bool identity_ = true;
    Apply fwd_;
    Apply bwd_;
};

/// Junction for link k built from layer handles frozen at the given state.
inline JunctionOperator make_junction(int link, const MetricFactor& theta_k,
                                      const MetricFactor& theta_k1,
                                      JunctionOperator::Apply jvp,
                                      JunctionOperator::Apply vjp) {
    return JunctionOperator::transformer(link, theta_k, theta_k1, std::move(jvp),
                                         std::move(vjp));
}

/// One junction per link; identity on constant-width links, frozen layer
/// linearization (at the latest reconstruction) on width-changing ones.
inline std::vector<JunctionOperator> make_junctions(const NetworkSpec& net,
                                                    const NodeStates& frozen) {
    std::vector<JunctionOperator> out;
    out.reserve(net.depth());
    for (int k = 0; k < net.depth(); ++k) {
        const auto& layer = net.layers[k];
        if (layer->in_dim() == layer->out_dim()) {
            out.push_back(JunctionOperator::identity(k, layer->in_dim()));
            continue;
        }
        Matrix x_k = frozen.x[k];
        out.push_back(make_junction(
            k, net.metrics[k], net.metrics[k + 1],
            [layer, x_k](const Matrix& v) { return layer->jvp(x_k, v); },
            [layer, x_k](const Matrix& v) { return layer->vjp(x_k, v); }));
    }
    return out;
}

namespace detail {
inline void apply_damping(std::vector<Matrix>& w, const GridConfig& grid) {
    if (grid.gamma <= 0.0) return;
    const double factor = 1.0 - grid.gamma * grid.dtau;
    for (auto& m : w) m *= factor;
}
}  // namespace detail

/// Upwind transport of the forward waves:
///   wbar_{+,k} = (1-nu) w_{+,k} + nu T_{k-1} w_{+,k-1},  wbar_{+,0} = w_{+,0}.
/// At nu == 1 the update is a pure shift: copy / junction application only.
inline std::vector<Matrix> upwind_step_forward(const WaveField& field,
                                               const GridConfig& grid,
                                               const std::vector<JunctionOperator>& junctions) {
    grid.validate_transport();
    const int N = field.nodes() - 1;
    require(static_cast<int>(junctions.size()) == N, "transport: junction count mismatch");
    const double nu = grid.nu();
    std::vector<Matrix> out(N + 1);
    out[0] = field.plus[0];
    for (int k = 1; k <= N; ++k) {
        if (nu == 1.0)
            out[k] = junctions[k - 1].apply(field.plus[k - 1]);
        else
            out[k] = (1.0 - nu) * field.plus[k] +
                     nu * junctions[k - 1].apply(field.plus[k - 1]);
    }
    detail::apply_damping(out, grid);
    return out;
}

/// Mirror for the backward waves:
///   wbar_{-,k} = (1-nu) w_{-,k} + nu T_k^T w_{-,k+1},  wbar_{-,N} = w_{-,N}.
inline std::vector<Matrix> upwind_step_backward(const WaveField& field,
                                                const GridConfig& grid,
                                                const std::vector<JunctionOperator>& junctions) {
    grid.validate_transport();
    const int N = field.nodes() - 1;
    require(static_cast<int>(junctions.size()) == N, "transport: junction count mismatch");
    const double nu = grid.nu();
    std::vector<Matrix> out(N + 1);
    out[N] = field.minus[N];
    for (int k = 0; k < N; ++k) {
        if (nu == 1.0)
            out[k] = junctions[k].apply_transpose(field.minus[k + 1]);
        else
            out[k] = (1.0 - nu) * field.minus[k] +
                     nu * junctions[k].apply_transpose(field.minus[k + 1]);
    }
    detail::apply_damping(out, grid);
    return out;
}

/// Both directions in one call; preserves the step counter.
inline WaveField upwind_transport(const WaveField& field, const GridConfig& grid,
                                  const std::vector<JunctionOperator>& junctions) {
    WaveField out;
    out.plus = upwind_step_forward(field, grid, junctions);
    out.minus = upwind_step_backward(field, grid, junctions);
    out.step = field.step;
    return out;
}

inline std::vector<JunctionOperator> identity_junctions(const std::vector<int>& widths) {
    std::vector<JunctionOperator> out;
    for (std::size_t k = 0; k + 1 < widths.size(); ++k) {
        require(widths[k] == widths[k + 1],
                "identity_junctions: widths must be constant");
        out.push_back(JunctionOperator::identity(static_cast<int>(k), widths[k]));
    }
    return out;
}

}  // namespace wavepmp
