#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/config.hpp"
#include "wavepmp/control.hpp"
#include "wavepmp/models.hpp"
#include "wavepmp/trainer.hpp"

#include <map>
#include <memory>
#include <set>
#include <string>

namespace wavepmp {

/// Everything a CLI run needs, constructed and validated from a config file.
struct RunSpec {
    enum class Kind { Mlp, Control };
    Kind kind = Kind::Mlp;
    NetworkSpec net;
    Dataset data;                                ///< Mlp runs
    std::shared_ptr<ControlProblem> problem;     ///< Control runs
    TrainConfig train;
    std::string metrics_path = "metrics.csv";
    std::string checkpoint_path;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& config_schema() {
    static const std::map<std::string, std::set<std::string>> schema = {
        {"model", {"kind", "widths", "activation", "seed", "l2"}},
        {"problem", {"name", "horizon", "steps", "x0"}},
        {"data", {"dataset", "n", "dim", "noise", "seed"}},
        {"grid", {"dt", "dtau", "c", "nu", "alpha", "gamma"}},
        {"optimizer", {"kind", "eta", "R", "L"}},
        {"run",
         {"scheduler", "budget", "tolerance", "seed", "log_every", "update_every",
          "batch_size", "rotate_every", "divergence_factor"}},
        {"output", {"metrics", "checkpoint"}},
    };
    return schema;
}

inline Activation parse_activation(const std::string& s) {
    if (s == "linear") return Activation::Linear;
    if (s == "tanh") return Activation::Tanh;
    if (s == "relu") return Activation::Relu;
    throw ConfigError("config: unknown activation: " + s);
}

inline Scheduler parse_scheduler(const std::string& s) {
    if (s == "lockstep") return Scheduler::Lockstep;
    if (s == "round-robin") return Scheduler::RoundRobin;
    if (s == "random-fair") return Scheduler::RandomFair;
    throw ConfigError("config: unknown scheduler: " + s);
}

inline OptimizerConfig::Kind parse_optimizer(const std::string& s) {
    if (s == "resistive") return OptimizerConfig::Kind::Resistive;
    if (s == "inductive") return OptimizerConfig::Kind::Inductive;
    if (s == "curvature") return OptimizerConfig::Kind::Curvature;
    throw ConfigError("config: unknown optimizer kind: " + s);
}

inline GridConfig parse_grid(const ConfigFile& cfg, int num_nodes) {
    const double dt = cfg.get_double_or("grid", "dt", 1.0);
    const double c = cfg.get_double_or("grid", "c", 1.0);
    double dtau;
    if (cfg.has("grid", "nu")) {
        const double nu = cfg.get_double("grid", "nu");
        dtau = nu * dt / c;
        if (cfg.has("grid", "dtau")) {
            const double given = cfg.get_double("grid", "dtau");
            if (std::abs(given - dtau) > 1e-12 * std::max(1.0, std::abs(dtau)))
                throw ConfigError("config: [grid] nu and dtau are inconsistent");
        }
    } else {
        dtau = cfg.get_double_or("grid", "dtau", dt / c);
    }
    GridConfig g;
    g.num_nodes = num_nodes;
    g.dt = dt;
    g.c = c;
    g.dtau = dtau;
    g.alpha = cfg.get_double_or("grid", "alpha", c * dtau);
    g.gamma = cfg.get_double_or("grid", "gamma", 0.0);
    return g;
}

inline TrainConfig parse_train(const ConfigFile& cfg, int num_nodes) {
    TrainConfig tc;
    tc.grid = parse_grid(cfg, num_nodes);
    tc.optimizer.kind = parse_optimizer(cfg.get_or("optimizer", "kind", "resistive"));
    tc.optimizer.eta = cfg.get_double_or("optimizer", "eta", 0.1);
    tc.optimizer.R = cfg.get_double_or("optimizer", "R", 1.0);
    tc.optimizer.L = cfg.get_double_or("optimizer", "L", 1.0);
    tc.budget = cfg.get_long_or("run", "budget", 1000);
    tc.tolerance = cfg.get_double_or("run", "tolerance", 1e-8);
    tc.seed = static_cast<std::uint64_t>(cfg.get_long_or("run", "seed", 0));
    tc.scheduler = parse_scheduler(cfg.get_or("run", "scheduler", "lockstep"));
    tc.log_every = static_cast<int>(cfg.get_long_or("run", "log_every", 10));
    tc.update_every = static_cast<int>(cfg.get_long_or("run", "update_every", 1));
    tc.batch_size = static_cast<int>(cfg.get_long_or("run", "batch_size", 0));
    tc.rotate_every = static_cast<int>(cfg.get_long_or("run", "rotate_every", 0));
    tc.divergence_factor = cfg.get_double_or("run", "divergence_factor", 1e6);
    return tc;
}

}  // namespace detail

/// Build and validate a run from configuration text. Unknown sections or keys
/// raise ConfigError before anything executes.
inline RunSpec build_run(const ConfigFile& cfg) {
    cfg.validate_schema(detail::config_schema());
    RunSpec run;

    const bool has_model = !cfg.keys("model").empty();
    const bool has_problem = !cfg.keys("problem").empty();
    if (has_model == has_problem)
        throw ConfigError("config: declare exactly one of [model] or [problem]");

    if (has_model) {
        run.kind = RunSpec::Kind::Mlp;
        const std::string kind = cfg.get_or("model", "kind", "mlp");
        if (kind != "mlp") throw ConfigError("config: unknown model kind: " + kind);
        const auto widths = cfg.get_int_list("model", "widths");
        const auto act = detail::parse_activation(cfg.get_or("model", "activation", "tanh"));
        const auto seed = static_cast<std::uint64_t>(cfg.get_long_or("model", "seed", 0));
        const double l2 = cfg.get_double_or("model", "l2", 0.0);
        run.net = make_mlp(widths, act, seed, l2);

        const std::string ds = cfg.get_or("data", "dataset", "xor");
        if (ds == "xor") {
            run.data = dataset_xor();
        } else if (ds == "linreg") {
            run.data = dataset_linreg(
                static_cast<int>(cfg.get_long_or("data", "n", 32)),
                static_cast<int>(cfg.get_long_or("data", "dim", widths.front())),
                cfg.get_double_or("data", "noise", 0.0),
                static_cast<std::uint64_t>(cfg.get_long_or("data", "seed", 0)));
        } else {
            throw ConfigError("config: unknown dataset: " + ds);
        }
        require(run.data.X.rows() == run.net.node_width(0),
                "config: dataset input width does not match the model");
        run.train = detail::parse_train(cfg, run.net.nodes());
    } else {
        run.kind = RunSpec::Kind::Control;
        const std::string name = cfg.get("problem", "name");
        const double T = cfg.get_double_or("problem", "horizon", 1.0);
        const int N = static_cast<int>(cfg.get_long_or("problem", "steps", 32));
        if (name == "scalar-lqr") {
            run.problem = scalar_lqr_problem(T, N, cfg.get_double_or("problem", "x0", 1.0));
        } else if (name == "lqr-2d") {
            run.problem = double_integrator_problem(T, N);
        } else if (name == "pendulum") {
            run.problem = pendulum_problem(T, N);
        } else {
            throw ConfigError(
                "config: unknown problem: " + name +
                " (available: scalar-lqr, lqr-2d, pendulum)");
        }
        run.net = euler_layerize(run.problem);
        run.data.X = run.problem->x0;
        run.data.Y = Matrix::Zero(run.problem->state_dim, 1);
        run.train = detail::parse_train(cfg, run.net.nodes());
    }

    run.metrics_path = cfg.get_or("output", "metrics", "metrics.csv");
    run.checkpoint_path = cfg.get_or("output", "checkpoint", "");
    run.train.validate();
    run.net.validate();
    return run;
}

}  // namespace wavepmp
