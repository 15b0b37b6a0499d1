#pragma once

#include "wavepmp/boundaries.hpp"
#include "wavepmp/common.hpp"
#include "wavepmp/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <optional>
#include <random>
#include <vector>

namespace wavepmp {

/// Options for the per-layer worker harness. Each depth node is a worker that
/// owns its wave pair (and its layer parameters, for k < N) and exchanges one
/// message per neighbor direction per tick:
///   rightward payload: f_k(x_k) evaluated at the sender's latest snapshot
///   leftward payload:  lambda_k from the sender's latest snapshot
/// One tick advances every worker by one solver step.
struct AsyncOptions {
    long ticks = 100;
    bool frozen_loss = false;    ///< pin the terminal loss gradient to zero
    bool random_waves = false;   ///< seeded random wave init instead of zeros
    std::uint64_t wave_seed = 0;
};

struct AsyncResult {
    WaveField field;
    long ticks = 0;
    int max_messages_per_tick_per_worker = 0;
    bool locality_ok = true;             ///< all messages between adjacent workers
    long first_layer0_change_tick = -1;  ///< 1-based; -1 if never
    std::vector<bool> layer0_changed_at_tick;  ///< fresh update applied this tick
    std::vector<double> residual_history;      ///< max node residual per tick
};

namespace detail {

struct Mailbox {
    std::optional<Matrix> f_from_left;       ///< f_{k-1}(x_{k-1})
    std::optional<Matrix> lambda_from_right; ///< lambda_{k+1}
};

class MessageBus {
public:
    explicit MessageBus(int workers) : counts_(workers, 0) {}

    void begin_tick() { std::fill(counts_.begin(), counts_.end(), 0); }

    void note_send(int from, int to) {
        if (std::abs(from - to) != 1) locality_ok_ = false;
        counts_[from] += 1;
        max_per_tick_ = std::max(max_per_tick_, counts_[from]);
    }

    bool locality_ok() const { return locality_ok_; }
    int max_per_tick() const { return max_per_tick_; }

private:
    std::vector<int> counts_;
    int max_per_tick_ = 0;
    bool locality_ok_ = true;
};

}  // namespace detail

/// Simulated asynchronous run of the relaxation. With the Lockstep scheduler
/// each tick performs a publish round (all workers snapshot and send) followed
/// by an update round, which reproduces the synchronous loop bit for bit.
/// RoundRobin and RandomFair activate workers one at a time; an activated
/// worker publishes from its current waves and then updates using whatever
/// payloads are in its mailbox (possibly stale).
inline AsyncResult async_run(NetworkSpec& net, const Matrix& X, const Matrix& Y,
                             const TrainConfig& cfg, const AsyncOptions& opt) {
    const int N = net.depth();
    const int workers = N + 1;
    require(X.cols() == Y.cols(), "async: batch mismatch");

    AsyncResult out;
    out.field = WaveField::zeros(net.widths(), static_cast<int>(X.cols()));
    if (opt.random_waves) out.field.randomize(opt.wave_seed);

    std::vector<detail::Mailbox> mail(workers);
    std::vector<Vector> velocity;
    for (const auto& l : net.layers) velocity.push_back(Vector::Zero(l->param_dim()));
    std::vector<Matrix> snap_x(workers), snap_lambda(workers);

    detail::MessageBus bus(workers);
    std::mt19937_64 sched_rng(cfg.seed);

    const Vector theta0_initial = net.layers[0]->params();

    auto snapshot = [&](int k) {
        auto [x, lam] =
            inverse_wave_transform(out.field.plus[k], out.field.minus[k], net.metrics[k]);
        snap_x[k] = std::move(x);
        snap_lambda[k] = std::move(lam);
    };

    auto publish = [&](int k) {
        if (k < N) {
            mail[k + 1].f_from_left = net.layers[k]->forward(snap_x[k]);
            bus.note_send(k, k + 1);
        }
        if (k > 0) {
            mail[k - 1].lambda_from_right = snap_lambda[k];
            bus.note_send(k, k - 1);
        }
    };

    double tick_residual = 0.0;
    bool update_params_this_tick = true;

    auto update = [&](int k) {
        const Matrix& x_k = snap_x[k];
        const Matrix& lam_k = snap_lambda[k];
        Matrix r_x, r_lambda;
        if (k == 0) {
            r_x = x_k - X;
        } else {
            if (!mail[k].f_from_left)
                throw std::runtime_error("async: missing left payload (deadlock)");
            r_x = x_k - *mail[k].f_from_left;
        }
        Matrix grad_loss;
        if (k == N) {
            grad_loss = opt.frozen_loss ? Matrix::Zero(x_k.rows(), x_k.cols())
                                        : net.loss->grad(x_k, Y);
            r_lambda = lam_k - grad_loss;
        } else {
            if (!mail[k].lambda_from_right)
                throw std::runtime_error("async: missing right payload (deadlock)");
            r_lambda = lam_k - net.layers[k]->vjp(x_k, *mail[k].lambda_from_right) -
                       net.layers[k]->penalty_grad_x(x_k);
        }
        tick_residual = std::max(tick_residual, std::max(r_x.norm(), r_lambda.norm()));

        const Matrix a = net.metrics[k].apply(r_x);
        const Matrix b = net.metrics[k].apply_inv_t(r_lambda);
        out.field.plus[k] -= cfg.grid.alpha * (kInvSqrt2 * (a + b));
        out.field.minus[k] -= cfg.grid.alpha * (kInvSqrt2 * (a - b));

        if (k < N && update_params_this_tick) {
            const Vector r_theta =
                param_residual(*net.layers[k], x_k, *mail[k].lambda_from_right);
            detail::apply_port_update(cfg.optimizer, cfg.grid, *net.layers[k], r_theta,
                                      velocity[k]);
        }
        if (k == 0)
            out.field.plus[0] = input_scatter(out.field.minus[0], net.metrics[0], X);
        if (k == N)
            out.field.minus[N] =
                terminal_scatter(out.field.plus[N], net.metrics[N], grad_loss);
    };

    for (long t = 0; t < opt.ticks; ++t) {
        bus.begin_tick();
        tick_residual = 0.0;
        update_params_this_tick = (t % cfg.update_every == 0);
        const Vector theta0_before = net.layers[0]->params();

        switch (cfg.scheduler) {
            case Scheduler::Lockstep: {
                for (int k = 0; k < workers; ++k) snapshot(k);
                for (int k = 0; k < workers; ++k) publish(k);
                for (int k = 0; k < workers; ++k) update(k);
                break;
            }
            case Scheduler::RoundRobin: {
                for (int k = 0; k < workers; ++k) {
                    snapshot(k);
                    publish(k);
                    update(k);
                }
                break;
            }
            case Scheduler::RandomFair: {
                std::vector<int> order(workers);
                std::iota(order.begin(), order.end(), 0);
                std::shuffle(order.begin(), order.end(), sched_rng);
                for (int k : order) {
                    snapshot(k);
                    publish(k);
                    update(k);
                }
                break;
            }
        }

        if (!out.field.finite())
            throw InstabilityError(t + 1, "async: nonfinite waves at tick " +
                                              std::to_string(t + 1));

        const bool changed = net.layers[0]->params() != theta0_before;
        out.layer0_changed_at_tick.push_back(changed);
        if (changed && out.first_layer0_change_tick < 0 &&
            net.layers[0]->params() != theta0_initial)
            out.first_layer0_change_tick = t + 1;
        out.residual_history.push_back(tick_residual);
        out.ticks = t + 1;
    }

    out.max_messages_per_tick_per_worker = bus.max_per_tick();
    out.locality_ok = bus.locality_ok();
    out.field.step = out.ticks;
    return out;
}

}  // namespace wavepmp
