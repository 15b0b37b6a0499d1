#pragma once

#include "wavepmp/boundaries.hpp"
#include "wavepmp/common.hpp"
#include "wavepmp/energy.hpp"
#include "wavepmp/grid.hpp"
#include "wavepmp/impedance.hpp"
#include "wavepmp/models.hpp"
#include "wavepmp/network.hpp"
#include "wavepmp/pmp.hpp"
#include "wavepmp/waves.hpp"

#include <chrono>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace wavepmp {

enum class Scheduler { Lockstep, RoundRobin, RandomFair };

inline const char* scheduler_name(Scheduler s) {
    switch (s) {
        case Scheduler::Lockstep: return "lockstep";
        case Scheduler::RoundRobin: return "round-robin";
        case Scheduler::RandomFair: return "random-fair";
    }
    return "?";
}

struct OptimizerConfig {
    enum class Kind { Resistive, Inductive, Curvature };
    Kind kind = Kind::Resistive;
    double eta = 0.1;
    double R = 1.0;  ///< inductive resistance
    double L = 1.0;  ///< inductance

    void validate() const {
        require(eta >= 0.0, "optimizer: eta must be nonnegative");
        if (kind == Kind::Inductive)
            require(R > 0.0 && L > 0.0, "optimizer: R and L must be positive");
    }
};

inline const char* optimizer_name(OptimizerConfig::Kind k) {
    switch (k) {
        case OptimizerConfig::Kind::Resistive: return "resistive";
        case OptimizerConfig::Kind::Inductive: return "inductive";
        case OptimizerConfig::Kind::Curvature: return "curvature";
    }
    return "?";
}

struct TrainConfig {
    GridConfig grid;
    OptimizerConfig optimizer;
    long budget = 1000;          ///< max solver steps
    double tolerance = 1e-8;     ///< stop when max node residual drops below
    std::uint64_t seed = 0;
    Scheduler scheduler = Scheduler::Lockstep;
    int log_every = 10;
    int update_every = 1;        ///< parameter update cadence in solver steps
    int batch_size = 0;          ///< 0 = full dataset
    int rotate_every = 0;        ///< 0 = fixed batch; else swap batch every s steps
    double divergence_factor = 1e6;

    void validate() const {
        grid.validate();
        optimizer.validate();
        require(budget >= 1, "train: budget must be >= 1");
        require(tolerance > 0.0, "train: tolerance must be positive");
        require(log_every >= 1, "train: log_every must be >= 1");
        require(update_every >= 1, "train: update_every must be >= 1");
        require(batch_size >= 0 && rotate_every >= 0, "train: bad batch options");
    }
};

/// One logged step of a run. The serializable metric fields are fully
/// deterministic; wall_ms is informational and kept out of the metrics file.
struct MetricsRow {
    long step = 0;
    double loss = 0.0;
    double r_x_max = 0.0;
    double r_lambda_max = 0.0;
    double r_theta_max = 0.0;
    double energy = 0.0;
    double input_margin = 0.0;
    double terminal_margin = 0.0;
    double reflection_sq = 0.0;
    double wall_ms = 0.0;
};

/// Mutable relaxation state: the wave field plus per-layer port memory
/// (velocities for the inductive termination).
struct RelaxState {
    WaveField field;
    std::vector<Vector> velocity;
    long step = 0;

    static RelaxState make(const NetworkSpec& net, int batch) {
        RelaxState st;
        st.field = WaveField::zeros(net.widths(), batch);
        st.velocity.reserve(net.depth());
        for (const auto& l : net.layers)
            st.velocity.push_back(Vector::Zero(l->param_dim()));
        return st;
    }
};

struct StepInfo {
    double loss = 0.0;
    double r_x_max = 0.0;
    double r_lambda_max = 0.0;
    double r_theta_max = 0.0;
    double energy = 0.0;
    double input_margin = 0.0;
    double terminal_margin = 0.0;
    double reflection_sq = 0.0;
    bool params_updated = false;
};

namespace detail {

/// Parameter port update for one layer; returns the squared reflection of the
/// realized flow against the port impedance.
inline double apply_port_update(const OptimizerConfig& opt, const GridConfig& grid,
                                Layer& layer, const Vector& r_theta, Vector& velocity) {
    if (opt.eta == 0.0 && opt.kind != OptimizerConfig::Kind::Inductive) return 0.0;
    const Vector theta = layer.params();
    Vector theta_next;
    switch (opt.kind) {
        case OptimizerConfig::Kind::Resistive:
            theta_next = step_resistive(theta, r_theta, opt.eta);
            break;
        case OptimizerConfig::Kind::Inductive: {
            auto [t, v] = step_inductive(theta, velocity, r_theta, opt.R, opt.L,
                                         grid.dtau);
            theta_next = std::move(t);
            velocity = std::move(v);
            break;
        }
        case OptimizerConfig::Kind::Curvature:
            // Nets have no explicit Hessian handle; treat eta as a diagonal
            // curvature guess (per-parameter scaling), i.e. a resistive step.
            theta_next = step_resistive(theta, r_theta, opt.eta);
            break;
    }
    double refl = 0.0;
    if (theta_next != theta) {
        const Vector flow = (theta_next - theta) / grid.dtau;
        const Impedance z = opt.kind == OptimizerConfig::Kind::Inductive
                                ? Impedance::resistive(1.0 / opt.R)
                                : Impedance::resistive(std::max(opt.eta, 1e-300));
        refl = reflection_norm_sq(-r_theta, flow, z);
    }
    layer.set_params(theta_next);
    return refl;
}

}  // namespace detail

/// One solver step in scattering variables:
///   1. reconstruct the node snapshot (x, lambda) from the wave field;
///   2. node residuals -> wave residuals -> source injection
///      (w <- w - alpha E, all nodes, nearest-neighbor reads only);
///   3. parameter port update theta <- theta - eta r_theta (or the selected
///      termination) from the same snapshot;
///   4. boundary scattering: clamp x_0 = x_in and lambda_N = grad ell, with
///      the loss gradient evaluated at the snapshot's terminal state.
/// Residual norms reported by the returned StepInfo are those of the snapshot
/// (before injection).
inline StepInfo sync_step(RelaxState& st, NetworkSpec& net, const Matrix& X,
                          const Matrix& Y, const TrainConfig& cfg) {
    const int N = net.depth();
    require(st.field.nodes() == net.nodes(), "sync_step: field/net mismatch");
    require(X.cols() == Y.cols() && X.cols() == st.field.batch(),
            "sync_step: batch mismatch");

    StepInfo info;

    NodeStates s = reconstruct(st.field, net.metrics);

    ResidualSet res = node_residuals(net, s.x, s.lambda, X, Y);
    res.r_theta.reserve(N);
    for (int k = 0; k < N; ++k)
        res.r_theta.push_back(param_residual(*net.layers[k], s.x[k], s.lambda[k + 1]));

    auto [e_plus, e_minus] = wave_residuals(res, net.metrics);
    inject_sources(st.field, e_plus, e_minus, cfg.grid.alpha);

    const bool do_update = (st.step % cfg.update_every == 0);
    if (do_update) {
        double refl = 0.0;
        for (int k = 0; k < N; ++k)
            refl += detail::apply_port_update(cfg.optimizer, cfg.grid, *net.layers[k],
                                              res.r_theta[k], st.velocity[k]);
        info.reflection_sq = refl;
        info.params_updated = true;
    }

    const Matrix grad_loss = net.loss->grad(s.x[N], Y);
    st.field.plus[0] = input_scatter(st.field.minus[0], net.metrics[0], X);
    st.field.minus[N] = terminal_scatter(st.field.plus[N], net.metrics[N], grad_loss);

    st.step += 1;
    st.field.step = st.step;

    info.loss = net.loss->value(s.x[N], Y);
    info.r_x_max = res.max_x_norm();
    info.r_lambda_max = res.max_lambda_norm();
    info.r_theta_max = res.max_theta_norm();
    info.energy = wave_energy(st.field, cfg.grid.dt);
    const auto ports = boundary_passivity_report(st.field);
    info.input_margin = ports.input_margin;
    info.terminal_margin = ports.terminal_margin;
    return info;
}

struct RelaxResult {
    long steps = 0;
    double final_residual = 0.0;
    double final_loss = 0.0;
    bool converged = false;
    std::vector<MetricsRow> metrics;
    std::vector<double> residual_history;
};

namespace detail {

inline MetricsRow to_row(long step, const StepInfo& info, double wall_ms) {
    MetricsRow row;
    row.step = step;
    row.loss = info.loss;
    row.r_x_max = info.r_x_max;
    row.r_lambda_max = info.r_lambda_max;
    row.r_theta_max = info.r_theta_max;
    row.energy = info.energy;
    row.input_margin = info.input_margin;
    row.terminal_margin = info.terminal_margin;
    row.reflection_sq = info.reflection_sq;
    row.wall_ms = wall_ms;
    return row;
}

/// Loss/energy divergence guards shared by relax() and train().
struct RunGuard {
    double loss_ref = -1.0;
    double energy_ref = -1.0;
    double factor = 1e6;

    void check(long step, const StepInfo& info, const WaveField& field) {
        if (!std::isfinite(info.loss) || !std::isfinite(info.energy) || !field.finite())
            throw InstabilityError(step, "nonfinite value at step " + std::to_string(step));
        if (loss_ref < 0.0) loss_ref = std::max(1.0, std::abs(info.loss));
        if (energy_ref < 0.0 && info.energy > 0.0) energy_ref = std::max(1.0, info.energy);
        if (info.loss > factor * loss_ref)
            throw DivergenceError(step, "loss diverged at step " + std::to_string(step));
        if (energy_ref > 0.0 && info.energy > factor * energy_ref)
            throw InstabilityError(step,
                                   "wave energy blew up at step " + std::to_string(step));
    }
};

}  // namespace detail

/// Run sync_step until the max node residual drops below the tolerance or the
/// budget is exhausted. Config validation is the caller's job (the CLI always
/// validates); this keeps instability experiments runnable.
inline RelaxResult relax(RelaxState& st, NetworkSpec& net, const Matrix& X,
                         const Matrix& Y, const TrainConfig& cfg) {
    RelaxResult out;
    detail::RunGuard guard;
    guard.factor = cfg.divergence_factor;
    const auto t0 = std::chrono::steady_clock::now();
    for (long n = 0; n < cfg.budget; ++n) {
        const StepInfo info = sync_step(st, net, X, Y, cfg);
        const double res = std::max(info.r_x_max, info.r_lambda_max);
        out.residual_history.push_back(res);
        guard.check(st.step, info, st.field);
        if (st.step % cfg.log_every == 0 || n + 1 == cfg.budget) {
            const double ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            out.metrics.push_back(detail::to_row(st.step, info, ms));
        }
        out.steps = n + 1;
        out.final_residual = res;
        out.final_loss = info.loss;
        if (res <= cfg.tolerance) {
            out.converged = true;
            break;
        }
    }
    return out;
}

struct TrainResult {
    long steps = 0;
    double final_loss = 0.0;
    std::vector<MetricsRow> metrics;
};

/// Full training loop: batches may rotate every cfg.rotate_every steps without
/// resetting the waves. Throws DivergenceError / InstabilityError per guards.
inline TrainResult train(NetworkSpec& net, const Dataset& data, const TrainConfig& cfg,
                         RelaxState* external_state = nullptr) {
    require(data.size() >= 1, "train: empty dataset");
    const int bs = cfg.batch_size == 0 ? data.size() : cfg.batch_size;
    require(bs >= 1 && bs <= data.size(), "train: bad batch size");

    RelaxState local = RelaxState::make(net, bs);
    RelaxState& st = external_state ? *external_state : local;

    auto batch_at = [&](long rotation) {
        std::pair<Matrix, Matrix> b;
        b.first.resize(data.X.rows(), bs);
        b.second.resize(data.Y.rows(), bs);
        const long start = (rotation * bs) % data.size();
        for (int j = 0; j < bs; ++j) {
            const long idx = (start + j) % data.size();
            b.first.col(j) = data.X.col(idx);
            b.second.col(j) = data.Y.col(idx);
        }
        return b;
    };

    TrainResult out;
    detail::RunGuard guard;
    guard.factor = cfg.divergence_factor;
    const auto t0 = std::chrono::steady_clock::now();
    long rotation = 0;
    auto [X, Y] = batch_at(rotation);
    for (long n = 0; n < cfg.budget; ++n) {
        if (cfg.rotate_every > 0 && n > 0 && n % cfg.rotate_every == 0) {
            ++rotation;
            std::tie(X, Y) = batch_at(rotation);
        }
        const StepInfo info = sync_step(st, net, X, Y, cfg);
        guard.check(st.step, info, st.field);
        if (st.step % cfg.log_every == 0 || n + 1 == cfg.budget) {
            const double ms = std::chrono::duration<double, std::milli>(
                                  std::chrono::steady_clock::now() - t0)
                                  .count();
            out.metrics.push_back(detail::to_row(st.step, info, ms));
        }
        out.steps = n + 1;
        out.final_loss = info.loss;
    }
    return out;
}

/// Plain backprop gradient-descent baseline with the same eta/seeding
/// conventions; used for side-by-side comparisons.
inline TrainResult train_backprop_sgd(NetworkSpec& net, const Dataset& data,
                                      const TrainConfig& cfg) {
    TrainResult out;
    const int bs = cfg.batch_size == 0 ? data.size() : cfg.batch_size;
    Matrix X = data.X.leftCols(bs);
    Matrix Y = data.Y.leftCols(bs);
    std::vector<Vector> velocity;
    for (const auto& l : net.layers) velocity.push_back(Vector::Zero(l->param_dim()));
    for (long n = 0; n < cfg.budget; ++n) {
        const BackpropResult bp = backprop_oracle(net, X, Y);
        for (int k = 0; k < net.depth(); ++k)
            detail::apply_port_update(cfg.optimizer, cfg.grid, *net.layers[k],
                                      bp.grads[k], velocity[k]);
        out.final_loss = bp.loss;
        out.steps = n + 1;
        if ((n + 1) % cfg.log_every == 0 || n + 1 == cfg.budget) {
            MetricsRow row;
            row.step = n + 1;
            row.loss = bp.loss;
            out.metrics.push_back(row);
        }
        if (!std::isfinite(bp.loss))
            throw DivergenceError(n + 1, "baseline loss nonfinite");
    }
    return out;
}

}  // namespace wavepmp
