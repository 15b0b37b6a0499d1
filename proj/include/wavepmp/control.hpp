#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/network.hpp"
#include "wavepmp/pmp.hpp"

#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace wavepmp {

/// Continuous-time optimal control problem
///   J = Phi(x(T)) + integral L(x, u) dt,  xdot = f(x, u),  x(0) = x0.
/// All maps come with their linearization handles so the Euler-discretized
/// layers inherit exact JVP/VJP/parameter-VJP.
struct ControlProblem {
    int state_dim = 0;
    int control_dim = 0;
    double horizon = 1.0;
    int steps = 2;  ///< N; dt = horizon / steps
    Vector x0;

    std::function<Vector(const Vector&, const Vector&)> f;
    std::function<Vector(const Vector&, const Vector&, const Vector&)> fx_jvp;
    std::function<Vector(const Vector&, const Vector&, const Vector&)> fx_vjp;
    std::function<Vector(const Vector&, const Vector&, const Vector&)> fu_vjp;
    std::function<double(const Vector&, const Vector&)> running_cost;
    std::function<Vector(const Vector&, const Vector&)> running_cost_grad_x;
    std::function<Vector(const Vector&, const Vector&)> running_cost_grad_u;
    std::function<double(const Vector&)> terminal_cost;
    std::function<Vector(const Vector&)> terminal_cost_grad;

    std::string name = "control";

    double dt() const { return horizon / steps; }

    void validate() const {
        require(steps >= 2, "control: need at least two steps");
        require(horizon > 0.0, "control: horizon must be positive");
        require(state_dim > 0 && control_dim > 0, "control: bad dimensions");
        require(x0.size() == state_dim, "control: x0 dimension mismatch");
        require(f && fx_jvp && fx_vjp && fu_vjp && running_cost &&
                    running_cost_grad_x && running_cost_grad_u && terminal_cost &&
                    terminal_cost_grad,
                "control: missing handles");
    }
};

/// Explicit-Euler flow map layer x_{k+1} = x_k + dt f(x_k, u_k) with the
/// running cost as penalty R_k = dt L(x_k, u_k). Parameters are the stage
/// control u_k. Control problems run unbatched (one trajectory column).
class EulerLayer final : public Layer {
public:
    EulerLayer(std::shared_ptr<const ControlProblem> prob, Vector u)
        : prob_(std::move(prob)), u_(std::move(u)) {}

    int in_dim() const override { return prob_->state_dim; }
    int out_dim() const override { return prob_->state_dim; }
    int param_dim() const override { return prob_->control_dim; }

    Vector params() const override { return u_; }
    void set_params(const Vector& p) override {
        require(p.size() == u_.size(), "euler layer: control size mismatch");
        u_ = p;
    }

    Matrix forward(const Matrix& x) const override {
        check(x);
        return x + prob_->dt() * columnwise(x, [&](const Vector& c) {
                   return prob_->f(c, u_);
               });
    }

    Matrix jvp(const Matrix& x, const Matrix& v) const override {
        check(x);
        Matrix out(v.rows(), v.cols());
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            out.col(j) = v.col(j) + prob_->dt() * prob_->fx_jvp(x.col(j), u_, v.col(j));
        return out;
    }

    Matrix vjp(const Matrix& x, const Matrix& v) const override {
        check(x);
        Matrix out(v.rows(), v.cols());
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            out.col(j) = v.col(j) + prob_->dt() * prob_->fx_vjp(x.col(j), u_, v.col(j));
        return out;
    }

    Vector param_vjp(const Matrix& x, const Matrix& v) const override {
        check(x);
        Vector out = Vector::Zero(param_dim());
        for (Eigen::Index j = 0; j < v.cols(); ++j)
            out += prob_->dt() * prob_->fu_vjp(x.col(j), u_, v.col(j));
        return out / static_cast<double>(x.cols());
    }

    double penalty(const Matrix& x) const override {
        check(x);
        double total = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            total += prob_->dt() * prob_->running_cost(x.col(j), u_);
        return total / static_cast<double>(x.cols());
    }

    Matrix penalty_grad_x(const Matrix& x) const override {
        check(x);
        Matrix out(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out.col(j) = prob_->dt() * prob_->running_cost_grad_x(x.col(j), u_);
        return out;
    }

    Vector penalty_grad_params(const Matrix& x) const override {
        check(x);
        Vector out = Vector::Zero(param_dim());
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            out += prob_->dt() * prob_->running_cost_grad_u(x.col(j), u_);
        return out / static_cast<double>(x.cols());
    }

    std::shared_ptr<Layer> clone() const override {
        return std::make_shared<EulerLayer>(prob_, u_);
    }

    std::string name() const override { return "euler-" + prob_->name; }

private:
    void check(const Matrix& x) const {
        require(x.rows() == prob_->state_dim, "euler layer: state dim mismatch");
    }

    template <typename F>
    Matrix columnwise(const Matrix& x, F&& fn) const {
        Matrix out(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) out.col(j) = fn(x.col(j));
        return out;
    }

    std::shared_ptr<const ControlProblem> prob_;
    Vector u_;
};

/// Terminal cost as a Loss (targets are ignored).
class TerminalCostLoss final : public Loss {
public:
    explicit TerminalCostLoss(std::shared_ptr<const ControlProblem> prob)
        : prob_(std::move(prob)) {}

    double value(const Matrix& x, const Matrix&) const override {
        double total = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            total += prob_->terminal_cost(x.col(j));
        return total / static_cast<double>(x.cols());
    }
    Matrix grad(const Matrix& x, const Matrix&) const override {
        Matrix g(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j)
            g.col(j) = prob_->terminal_cost_grad(x.col(j));
        return g;
    }
    std::string name() const override { return "terminal-cost"; }

private:
    std::shared_ptr<const ControlProblem> prob_;
};

/// Discretize a control problem into the layer-map formalism; stage controls
/// become the per-layer parameters (initialized to zero, open loop).
inline NetworkSpec euler_layerize(std::shared_ptr<const ControlProblem> prob) {
    prob->validate();
    NetworkSpec net;
    for (int k = 0; k < prob->steps; ++k)
        net.layers.push_back(
            std::make_shared<EulerLayer>(prob, Vector::Zero(prob->control_dim)));
    net.loss = std::make_shared<TerminalCostLoss>(prob);
    net.ensure_metrics();
    net.validate();
    return net;
}

/// dt-normalized discretization residuals:
///   E_x_k = (x_{k+1} - f_k(x_k, u_k)) / dt
///   E_lambda_k = (lambda_k - grad_x H_k) / dt,  H_k = lambda_{k+1}^T f_k + dt L.
inline std::pair<std::vector<Vector>, std::vector<Vector>> scaled_residuals(
    const std::vector<Vector>& x, const std::vector<Vector>& lambda,
    const std::vector<Vector>& u, const ControlProblem& prob) {
    const int N = prob.steps;
    require(static_cast<int>(x.size()) == N + 1 &&
                static_cast<int>(lambda.size()) == N + 1 &&
                static_cast<int>(u.size()) == N,
            "scaled_residuals: trajectory size mismatch");
    const double dt = prob.dt();
    std::vector<Vector> ex(N), el(N);
    for (int k = 0; k < N; ++k) {
        ex[k] = (x[k + 1] - (x[k] + dt * prob.f(x[k], u[k]))) / dt;
        // grad_x H_k = (I + dt A)^T lambda_{k+1} + dt grad_x L
        const Vector grad_h = lambda[k + 1] + dt * prob.fx_vjp(x[k], u[k], lambda[k + 1]) +
                              dt * prob.running_cost_grad_x(x[k], u[k]);
        el[k] = (lambda[k] - grad_h) / dt;
    }
    return {std::move(ex), std::move(el)};
}

/// Discrete LQR solution of the Euler-discretized problem
///   min sum_k dt/2 (x^T Q x + u^T R u) + 1/2 x_N^T QT x_N
///   s.t. x_{k+1} = (I + dt A) x_k + dt B u_k
/// via the backward Riccati recursion. Returns gains K_k, value matrices P_k
/// and the optimal trajectory from x0.
struct LqrSolution {
    std::vector<Matrix> P;  ///< N+1 value matrices
    std::vector<Matrix> K;  ///< N feedback gains, u_k = -K_k x_k
    std::vector<Vector> x;  ///< optimal states
    std::vector<Vector> u;  ///< optimal controls
};

inline LqrSolution lqr_riccati_oracle(const Matrix& A, const Matrix& B, const Matrix& Q,
                                      const Matrix& R_cost, const Matrix& Q_T, double T,
                                      int N, const Vector& x0) {
    const int n = static_cast<int>(A.rows());
    const int m = static_cast<int>(B.cols());
    require(A.cols() == n && B.rows() == n, "lqr: dynamics dimension mismatch");
    require(Q.rows() == n && Q.cols() == n && Q_T.rows() == n && Q_T.cols() == n,
            "lqr: cost dimension mismatch");
    require(R_cost.rows() == m && R_cost.cols() == m, "lqr: control cost mismatch");
    {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (R_cost + R_cost.transpose()));
        require(es.eigenvalues().minCoeff() > 0.0, "lqr: R must be positive definite");
    }
    require(N >= 2 && T > 0.0, "lqr: bad horizon");
    const double dt = T / N;
    const Matrix Ad = Matrix::Identity(n, n) + dt * A;
    const Matrix Bd = dt * B;
    const Matrix Qd = dt * Q;
    const Matrix Rd = dt * R_cost;

    LqrSolution sol;
    sol.P.resize(N + 1);
    sol.K.resize(N);
    sol.P[N] = Q_T;
    for (int k = N - 1; k >= 0; --k) {
        const Matrix BtP = Bd.transpose() * sol.P[k + 1];
        const Matrix G = Rd + BtP * Bd;
        sol.K[k] = G.ldlt().solve(BtP * Ad);
        sol.P[k] = Qd + Ad.transpose() * sol.P[k + 1] * Ad -
                   Ad.transpose() * sol.P[k + 1] * Bd * sol.K[k];
        sol.P[k] = 0.5 * (sol.P[k] + sol.P[k].transpose());
    }
    sol.x.resize(N + 1);
    sol.u.resize(N);
    sol.x[0] = x0;
    for (int k = 0; k < N; ++k) {
        sol.u[k] = -sol.K[k] * sol.x[k];
        sol.x[k + 1] = Ad * sol.x[k] + Bd * sol.u[k];
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Built-in problems
// ---------------------------------------------------------------------------

/// Generic LQR problem wrapped in the ControlProblem interface.
inline std::shared_ptr<ControlProblem> make_lqr_problem(const Matrix& A, const Matrix& B,
                                                        const Matrix& Q, const Matrix& R,
                                                        const Matrix& Q_T, double T, int N,
                                                        const Vector& x0,
                                                        const std::string& name) {
    auto p = std::make_shared<ControlProblem>();
    p->state_dim = static_cast<int>(A.rows());
    p->control_dim = static_cast<int>(B.cols());
    p->horizon = T;
    p->steps = N;
    p->x0 = x0;
    p->name = name;
    p->f = [A, B](const Vector& x, const Vector& u) { return A * x + B * u; };
    p->fx_jvp = [A](const Vector&, const Vector&, const Vector& v) { return A * v; };
    p->fx_vjp = [A](const Vector&, const Vector&, const Vector& v) {
        return A.transpose() * v;
    };
    p->fu_vjp = [B](const Vector&, const Vector&, const Vector& v) {
        return B.transpose() * v;
    };
    p->running_cost = [Q, R](const Vector& x, const Vector& u) {
        return 0.5 * (x.dot(Q * x) + u.dot(R * u));
    };
    p->running_cost_grad_x = [Q](const Vector& x, const Vector&) { return Q * x; };
    p->running_cost_grad_u = [R](const Vector&, const Vector& u) { return R * u; };
    p->terminal_cost = [Q_T](const Vector& x) { return 0.5 * x.dot(Q_T * x); };
    p->terminal_cost_grad = [Q_T](const Vector& x) { return Q_T * x; };
    return p;
}

/// Scalar xdot = u, L = (x^2 + u^2)/2, Phi = 0. The continuous Riccati value
/// is P(t) = tanh(T - t).
inline std::shared_ptr<ControlProblem> scalar_lqr_problem(double T = 1.0, int N = 32,
                                                          double x0 = 1.0) {
    Matrix A = Matrix::Zero(1, 1), B = Matrix::Ones(1, 1), Q = Matrix::Ones(1, 1),
           R = Matrix::Ones(1, 1), QT = Matrix::Zero(1, 1);
    Vector x0v(1);
    x0v << x0;
    return make_lqr_problem(A, B, Q, R, QT, T, N, x0v, "scalar-lqr");
}

/// Double integrator with state and terminal penalties.
inline std::shared_ptr<ControlProblem> double_integrator_problem(double T = 2.0,
                                                                 int N = 40) {
    Matrix A(2, 2), B(2, 1), Q = Matrix::Identity(2, 2), R = Matrix::Ones(1, 1),
           QT = Matrix::Identity(2, 2);
    A << 0, 1, 0, 0;
    B << 0, 1;
    Vector x0(2);
    x0 << 1.0, 0.0;
    return make_lqr_problem(A, B, Q, R, QT, T, N, x0, "lqr-2d");
}

/// Pendulum swing-up: xdot = (omega, u - sin(angle)); quadratic staging cost
/// toward the upright position. Nonlinear smoke test, no closed-form oracle.
inline std::shared_ptr<ControlProblem> pendulum_problem(double T = 3.0, int N = 60) {
    auto p = std::make_shared<ControlProblem>();
    p->state_dim = 2;
    p->control_dim = 1;
    p->horizon = T;
    p->steps = N;
    p->x0 = Vector::Zero(2);
    p->name = "pendulum";
    const double pi = 3.14159265358979323846;
    p->f = [](const Vector& x, const Vector& u) {
        Vector out(2);
        out << x[1], u[0] - std::sin(x[0]);
        return out;
    };
    p->fx_jvp = [](const Vector& x, const Vector&, const Vector& v) {
        Vector out(2);
        out << v[1], -std::cos(x[0]) * v[0];
        return out;
    };
    p->fx_vjp = [](const Vector& x, const Vector&, const Vector& v) {
        Vector out(2);
        out << -std::cos(x[0]) * v[1], v[0];
        return out;
    };
    p->fu_vjp = [](const Vector&, const Vector&, const Vector& v) {
        Vector out(1);
        out << v[1];
        return out;
    };
    p->running_cost = [pi](const Vector& x, const Vector& u) {
        const double da = x[0] - pi;
        return 0.5 * (0.1 * da * da + 0.1 * x[1] * x[1] + 0.05 * u[0] * u[0]);
    };
    p->running_cost_grad_x = [pi](const Vector& x, const Vector&) {
        Vector g(2);
        g << 0.1 * (x[0] - pi), 0.1 * x[1];
        return g;
    };
    p->running_cost_grad_u = [](const Vector&, const Vector& u) {
        Vector g(1);
        g << 0.05 * u[0];
        return g;
    };
    p->terminal_cost = [pi](const Vector& x) {
        const double da = x[0] - pi;
        return 0.5 * (4.0 * da * da + x[1] * x[1]);
    };
    p->terminal_cost_grad = [pi](const Vector& x) {
        Vector g(2);
        g << 4.0 * (x[0] - pi), x[1];
        return g;
    };
    return p;
}

}  // namespace wavepmp
