#pragma once

#include "wavepmp/common.hpp"

namespace wavepmp {

/// Discretized worldsheet parameters. Depth nodes k = 0..N live at physical
/// times t_k = k*dt; the solver advances in steps of dtau. The Courant number
/// nu = c*dtau/dt governs explicit transport stability; alpha is the source
/// injection gain (defaults to c*dtau).
struct GridConfig {
    int num_nodes = 2;   ///< N+1 depth nodes
    double dt = 1.0;     ///< layer spacing in physical time
    double dtau = 1.0;   ///< solver step
    double c = 1.0;      ///< propagation speed
    double alpha = 1.0;  ///< source injection step
    double gamma = 0.0;  ///< optional bulk damping, applied as (1 - gamma*dtau)

    double nu() const { return c * dtau / dt; }

    /// Build a grid from a target Courant number; dtau is derived so that
    /// nu = c*dtau/dt holds exactly. alpha < 0 means "use c*dtau".
    static GridConfig from_nu(int num_nodes, double nu, double dt = 1.0,
                              double c = 1.0, double alpha = -1.0,
                              double gamma = 0.0) {
        GridConfig g;
        g.num_nodes = num_nodes;
        g.dt = dt;
        g.c = c;
        g.dtau = nu * dt / c;
        g.alpha = alpha < 0.0 ? c * g.dtau : alpha;
        g.gamma = gamma;
        return g;
    }

    /// Transport-level checks only: positive steps and speeds. The CFL bound
    /// is deliberately not enforced here so instability witnesses can run.
    void validate_transport() const {
        require(num_nodes >= 2, "grid: need at least two depth nodes");
        require(dt > 0.0 && dtau > 0.0 && c > 0.0,
                "grid: dt, dtau and c must be positive");
        require(nu() > 0.0, "grid: Courant number must be positive");
    }

    /// Full validation for training runs: nu in (0,1], alpha > 0, gamma >= 0.
    void validate() const {
        validate_transport();
        require(nu() <= 1.0 + 1e-12, "grid: Courant number must lie in (0, 1]");
        require(alpha > 0.0, "grid: source step alpha must be positive");
        require(gamma >= 0.0, "grid: damping gamma must be nonnegative");
    }
};

}  // namespace wavepmp
