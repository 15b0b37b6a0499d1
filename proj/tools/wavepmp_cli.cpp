// Command-line front end: train networks, solve control problems, run the
// verification suites and compare against the backprop baseline.

#include <CLI11.hpp>

#include "wavepmp/wavepmp.hpp"

#include <cstdio>
#include <iostream>
#include <string>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitDivergence = 2;
constexpr int kExitVerification = 3;

using namespace wavepmp;

void print_row_summary(const MetricsRow& r) {
    std::printf("step %6ld  loss %.6e  r_x %.3e  r_lambda %.3e  r_theta %.3e  V %.4e\n",
                r.step, r.loss, r.r_x_max, r.r_lambda_max, r.r_theta_max, r.energy);
}

int cmd_train(const std::string& config_path) {
    RunSpec run = build_run(ConfigFile::load(config_path));
    if (run.kind != RunSpec::Kind::Mlp)
        throw ConfigError("train expects a [model] config; use `control` for problems");

    RelaxState st = RelaxState::make(
        run.net, run.train.batch_size == 0 ? run.data.size() : run.train.batch_size);
    const auto t0 = std::chrono::steady_clock::now();
    TrainResult result = train(run.net, run.data, run.train, &st);
    const double wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
            .count();

    write_metrics(run.metrics_path, result.metrics);
    if (!run.checkpoint_path.empty())
        save_checkpoint(run.checkpoint_path, run.net, st.field, st.step);

    std::printf("trained %ld steps, final loss %.6e (%.1f ms)\n", result.steps,
                result.final_loss, wall_ms);
    std::printf("metrics: %s\n", run.metrics_path.c_str());
    if (!run.checkpoint_path.empty())
        std::printf("checkpoint: %s\n", run.checkpoint_path.c_str());
    if (!result.metrics.empty()) print_row_summary(result.metrics.back());
    return kExitOk;
}

int cmd_control(const std::string& config_path) {
    RunSpec run = build_run(ConfigFile::load(config_path));
    if (run.kind != RunSpec::Kind::Control)
        throw ConfigError("control expects a [problem] config");

    RelaxState st = RelaxState::make(run.net, 1);
    RelaxResult rr = relax(st, run.net, run.data.X, run.data.Y, run.train);
    write_metrics(run.metrics_path, rr.metrics);

    const NodeStates s = reconstruct(st.field, run.net.metrics);
    std::printf("relaxed %ld steps, residual %.3e (%s)\n", rr.steps, rr.final_residual,
                rr.converged ? "converged" : "budget exhausted");

    std::printf("stage controls:\n");
    for (int k = 0; k < run.net.depth(); ++k) {
        const Vector u = run.net.layers[k]->params();
        std::printf("  u[%2d] =", k);
        for (Eigen::Index i = 0; i < u.size(); ++i) std::printf(" % .6f", u[i]);
        std::printf("\n");
    }

    const auto& prob = *run.problem;
    if (prob.name == "scalar-lqr" || prob.name == "lqr-2d") {
        // rebuild the LQR matrices for the oracle comparison
        Matrix A, B, Q, R, QT;
        if (prob.name == "scalar-lqr") {
            A = Matrix::Zero(1, 1);
            B = Matrix::Ones(1, 1);
            Q = Matrix::Ones(1, 1);
            R = Matrix::Ones(1, 1);
            QT = Matrix::Zero(1, 1);
        } else {
            A.resize(2, 2);
            A << 0, 1, 0, 0;
            B.resize(2, 1);
            B << 0, 1;
            Q = Matrix::Identity(2, 2);
            R = Matrix::Ones(1, 1);
            QT = Matrix::Identity(2, 2);
        }
        const auto sol = lqr_riccati_oracle(A, B, Q, R, QT, prob.horizon, prob.steps,
                                            prob.x0);
        double uerr = 0.0;
        for (int k = 0; k < prob.steps; ++k)
            uerr = std::max(uerr,
                            (run.net.layers[k]->params() - sol.u[k]).cwiseAbs().maxCoeff());
        std::printf("riccati comparison: max control error %.3e %s\n", uerr,
                    uerr <= 1e-3 ? "(within 1e-3)" : "(EXCEEDS 1e-3)");
        if (uerr > 1e-3) return kExitVerification;
    } else {
        std::printf("no closed-form oracle for '%s'; residual report only\n",
                    prob.name.c_str());
    }
    std::printf("metrics: %s\n", run.metrics_path.c_str());
    return rr.converged ? kExitOk : kExitVerification;
}

int cmd_verify(const std::string& suite) {
    std::vector<std::string> names;
    if (suite == "all")
        names = verify_suite_names();
    else
        names.push_back(suite);

    bool all_pass = true;
    for (const auto& name : names) {
        const auto results = run_verify_suite(name);  // throws on unknown suite
        std::printf("[%s]\n", name.c_str());
        for (const auto& r : results) {
            std::printf("  %-55s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                        r.detail.c_str());
            all_pass = all_pass && r.pass;
        }
    }
    return all_pass ? kExitOk : kExitVerification;
}

int cmd_compare(const std::string& config_path) {
    RunSpec run = build_run(ConfigFile::load(config_path));
    if (run.kind != RunSpec::Kind::Mlp)
        throw ConfigError("compare expects a [model] config");

    NetworkSpec wave_net = run.net.clone();
    NetworkSpec sgd_net = run.net.clone();
    const int bs = run.train.batch_size == 0 ? run.data.size() : run.train.batch_size;
    const Matrix X = run.data.X.leftCols(bs);
    const Matrix Y = run.data.Y.leftCols(bs);

    RelaxState st = RelaxState::make(wave_net, bs);
    std::vector<Vector> sgd_velocity;
    for (const auto& l : sgd_net.layers) sgd_velocity.push_back(Vector::Zero(l->param_dim()));

    std::printf("# step  wave_loss      sgd_loss       alignment\n");
    long sequential_depth_wave = 0, sequential_depth_sgd = 0;
    for (long n = 0; n < run.train.budget; ++n) {
        const StepInfo info = sync_step(st, wave_net, X, Y, run.train);
        sequential_depth_wave += 1;  // every layer works concurrently each step

        const BackpropResult bp = backprop_oracle(sgd_net, X, Y);
        for (int k = 0; k < sgd_net.depth(); ++k)
            detail::apply_port_update(run.train.optimizer, run.train.grid,
                                      *sgd_net.layers[k], bp.grads[k], sgd_velocity[k]);
        sequential_depth_sgd += 2L * sgd_net.depth();  // forward + backward sweep

        if ((n + 1) % run.train.log_every == 0 || n + 1 == run.train.budget) {
            // cosine alignment between the local stationarity residual and the
            // exact gradient of the wave net
            const NodeStates s = reconstruct(st.field, wave_net.metrics);
            const BackpropResult oracle = backprop_oracle(wave_net, X, Y);
            double dot = 0.0, nr = 0.0, ng = 0.0;
            for (int k = 0; k < wave_net.depth(); ++k) {
                const Vector r =
                    param_residual(*wave_net.layers[k], s.x[k], s.lambda[k + 1]);
                dot += r.dot(oracle.grads[k]);
                nr += r.squaredNorm();
                ng += oracle.grads[k].squaredNorm();
            }
            const double align =
                (nr > 0 && ng > 0) ? dot / std::sqrt(nr * ng) : 0.0;
            std::printf("%7ld  %.6e  %.6e  %+.6f\n", n + 1, info.loss, bp.loss, align);
        }
    }
    std::printf("sequential depth per step: wave-relaxation %ld, backprop %ld\n",
                sequential_depth_wave / std::max(1L, run.train.budget),
                sequential_depth_sgd / std::max(1L, run.train.budget));
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wave-scattering relaxation of the maximum principle"};
    app.require_subcommand(1);

    std::string train_config, control_config, compare_config, suite = "all";
    auto* train_cmd = app.add_subcommand("train", "train a model from a config file");
    train_cmd->add_option("config", train_config, "config file")->required();
    auto* control_cmd =
        app.add_subcommand("control", "solve a control problem from a config file");
    control_cmd->add_option("config", control_config, "config file")->required();
    auto* verify_cmd = app.add_subcommand("verify", "run a named verification suite");
    verify_cmd->add_option("suite", suite, "suite name or 'all'");
    auto* compare_cmd = app.add_subcommand(
        "compare", "side-by-side wave relaxation vs backprop gradient descent");
    compare_cmd->add_option("config", compare_config, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return cmd_train(train_config);
        if (control_cmd->parsed()) return cmd_control(control_config);
        if (verify_cmd->parsed()) return cmd_verify(suite);
        if (compare_cmd->parsed()) return cmd_compare(compare_config);
    } catch (const DivergenceError& e) {
        std::cerr << "divergence: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const InstabilityError& e) {
        std::cerr << "instability: " << e.what() << "\n";
        return kExitDivergence;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const CheckpointError& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
