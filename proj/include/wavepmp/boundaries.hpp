#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/metric.hpp"
#include "wavepmp/waves.hpp"

namespace wavepmp {

/// Input port: enforce x_0 = x_in in scattering form,
///   w_{+,0} = sqrt(2) Theta_0 x_in - w_{-,0}.
/// Reconstruction of x_0 from the returned pair is exact.
inline Matrix input_scatter(const Matrix& w_minus_0, const MetricFactor& theta0,
                            const Matrix& x_in) {
    require(w_minus_0.rows() == x_in.rows() && w_minus_0.cols() == x_in.cols(),
            "input_scatter: dimension mismatch");
    return kSqrt2 * theta0.apply(x_in) - w_minus_0;
}

/// Terminal port: enforce lambda_N = grad ell in scattering form,
///   w_{-,N} = w_{+,N} - sqrt(2) Theta_N^{-T} grad ell.
inline Matrix terminal_scatter(const Matrix& w_plus_N, const MetricFactor& thetaN,
                               const Matrix& grad_loss) {
    require(w_plus_N.rows() == grad_loss.rows() && w_plus_N.cols() == grad_loss.cols(),
            "terminal_scatter: dimension mismatch");
    return w_plus_N - kSqrt2 * thetaN.apply_inv_t(grad_loss);
}

/// Matched (absorbing) terminations: nothing enters the domain at either
/// port. Used by the source-free decay and CFL witness runs, where the
/// energy-balance theorem's passivity premise must hold strictly.
inline void apply_absorbing_ports(WaveField& field) {
    field.plus.front().setZero();
    field.minus.back().setZero();
}

/// Port-wise passivity flags: a port is passive when the outgoing wave does
/// not exceed the incoming one. margin = ||incoming|| - ||outgoing||.
struct PortPassivity {
    double input_incoming = 0.0;    ///< ||w_{-,0}||
    double input_outgoing = 0.0;    ///< ||w_{+,0}||
    double terminal_incoming = 0.0; ///< ||w_{+,N}||
    double terminal_outgoing = 0.0; ///< ||w_{-,N}||
    double input_margin = 0.0;
    double terminal_margin = 0.0;
    bool input_passive = false;
    bool terminal_passive = false;
};

inline PortPassivity boundary_passivity_report(const WaveField& field,
                                               double tol = 1e-12) {
    PortPassivity p;
    p.input_incoming = field.minus.front().norm();
    p.input_outgoing = field.plus.front().norm();
    p.terminal_incoming = field.plus.back().norm();
    p.terminal_outgoing = field.minus.back().norm();
    p.input_margin = p.input_incoming - p.input_outgoing;
    p.terminal_margin = p.terminal_incoming - p.terminal_outgoing;
    p.input_passive = p.input_margin >= -tol;
    p.terminal_passive = p.terminal_margin >= -tol;
    return p;
}

}  // namespace wavepmp
