#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace wavepmp;
using wavepmp::test::fd_param_gradient;
using wavepmp::test::max_rel_err;

namespace {

Matrix scalar(double v) {
    Matrix m(1, 1);
    m << v;
    return m;
}

/// Continuous optimum of the scalar problem: P(t) = tanh(T - t),
/// x(t) = x0 cosh(T - t)/cosh(T), lambda = P x, u = -lambda.
struct ScalarLqrContinuum {
    double T, x0;
    double P(double t) const { return std::tanh(T - t); }
    double x(double t) const { return x0 * std::cosh(T - t) / std::cosh(T); }
    double lambda(double t) const { return P(t) * x(t); }
    double u(double t) const { return -lambda(t); }
};

}  // namespace

TEST_CASE("euler layerization of xdot = u") {
    auto prob = scalar_lqr_problem(1.0, 2, 1.0);
    NetworkSpec net = euler_layerize(prob);
    REQUIRE(net.depth() == 2);

    // x_{k+1} = x_k + 0.5 u_k; R_k = 0.25 (x^2 + u^2)
    net.layers[0]->set_params(scalar(0.6));
    CHECK(net.layers[0]->forward(scalar(1.0))(0, 0) == Catch::Approx(1.0 + 0.5 * 0.6));
    CHECK(net.layers[0]->penalty(scalar(1.0)) ==
          Catch::Approx(0.25 * (1.0 + 0.36)));
}

TEST_CASE("trivial dynamics layerize to identity layers with zero penalty") {
    auto p = std::make_shared<ControlProblem>();
    p->state_dim = 2;
    p->control_dim = 1;
    p->horizon = 1.0;
    p->steps = 3;
    p->x0 = Vector::Ones(2);
    p->name = "null";
    p->f = [](const Vector& x, const Vector&) { return Vector::Zero(x.size()); };
    p->fx_jvp = [](const Vector&, const Vector&, const Vector& v) {
        return Vector::Zero(v.size());
    };
    p->fx_vjp = p->fx_jvp;
    p->fu_vjp = [](const Vector&, const Vector&, const Vector&) {
        return Vector::Zero(1);
    };
    p->running_cost = [](const Vector&, const Vector&) { return 0.0; };
    p->running_cost_grad_x = [](const Vector& x, const Vector&) {
        return Vector::Zero(x.size());
    };
    p->running_cost_grad_u = [](const Vector&, const Vector&) { return Vector::Zero(1); };
    p->terminal_cost = [](const Vector&) { return 0.0; };
    p->terminal_cost_grad = [](const Vector& x) { return Vector::Zero(x.size()); };

    NetworkSpec net = euler_layerize(p);
    const Matrix x = Matrix::Ones(2, 1);
    for (const auto& layer : net.layers) {
        CHECK((layer->forward(x) - x).norm() == 0.0);
        CHECK(layer->penalty(x) == 0.0);
    }
}

TEST_CASE("layerized gradient matches finite differences") {
    auto prob = scalar_lqr_problem(1.0, 8, 1.0);
    NetworkSpec net = euler_layerize(prob);
    std::mt19937_64 rng(2);
    for (int k = 0; k < net.depth(); ++k)
        net.layers[k]->set_params(wavepmp::test::random_vector(rng, 1, 0.5));

    const Matrix x_in = prob->x0;
    const Matrix y = Matrix::Zero(1, 1);
    const auto bp = backprop_oracle(net, x_in, y);
    for (int k = 0; k < net.depth(); ++k) {
        const Vector fd = fd_param_gradient(net, k, x_in, y);
        CHECK(max_rel_err(bp.grads[k], fd) <= 1e-5);
    }
}

TEST_CASE("scaled residuals") {
    auto prob = scalar_lqr_problem(1.0, 16, 1.0);
    const auto sol = lqr_riccati_oracle(Matrix::Zero(1, 1), Matrix::Ones(1, 1),
                                        Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                        Matrix::Zero(1, 1), 1.0, 16, prob->x0);

    // costates of the discrete problem via the adjoint recursion
    NetworkSpec net = euler_layerize(prob);
    for (int k = 0; k < 16; ++k) net.layers[k]->set_params(sol.u[k]);
    std::vector<Matrix> xs;
    for (const auto& x : sol.x) xs.push_back(x);
    const auto lams = adjoint_recursion(net, xs, Matrix::Zero(1, 1));

    std::vector<Vector> xv(sol.x.begin(), sol.x.end());
    std::vector<Vector> lv;
    for (const auto& l : lams) lv.push_back(l.col(0));

    SECTION("vanish on the oracle trajectory") {
        auto [ex, el] = scaled_residuals(xv, lv, sol.u, *prob);
        for (const auto& e : ex) CHECK(e.norm() <= 1e-10);
        for (const auto& e : el) CHECK(e.norm() <= 1e-10);
    }

    SECTION("state perturbation is amplified by 1/dt") {
        auto xp = xv;
        const double delta = 1e-3;
        xp[5][0] += delta;
        auto [ex, el] = scaled_residuals(xp, lv, sol.u, *prob);
        CHECK(ex[4][0] == Catch::Approx(delta / prob->dt()));
    }

    SECTION("discretization residual of the continuum solution is O(dt)") {
        const ScalarLqrContinuum cont{1.0, 1.0};
        double prev_err = -1.0;
        for (int N : {16, 32, 64}) {
            auto p = scalar_lqr_problem(1.0, N, 1.0);
            const double dt = p->dt();
            std::vector<Vector> x(N + 1), lam(N + 1);
            std::vector<Vector> u(N);
            for (int k = 0; k <= N; ++k) {
                x[k] = Vector::Constant(1, cont.x(k * dt));
                lam[k] = Vector::Constant(1, cont.lambda(k * dt));
                if (k < N) u[k] = Vector::Constant(1, cont.u(k * dt));
            }
            auto [ex, el] = scaled_residuals(x, lam, u, *p);
            double err = 0.0;
            for (const auto& e : ex) err = std::max(err, e.cwiseAbs().maxCoeff());
            for (const auto& e : el) err = std::max(err, e.cwiseAbs().maxCoeff());
            if (prev_err > 0.0) {
                const double order = std::log2(prev_err / err);
                CHECK(order >= 0.8);
            }
            prev_err = err;
        }
    }
}

TEST_CASE("riccati values approach tanh(T - t)") {
    double prev_err = -1.0;
    for (int N : {32, 64, 128}) {
        const auto sol = lqr_riccati_oracle(Matrix::Zero(1, 1), Matrix::Ones(1, 1),
                                            Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                            Matrix::Zero(1, 1), 1.0, N,
                                            Vector::Ones(1));
        double err = 0.0;
        for (int k = 0; k <= N; ++k) {
            const double t = static_cast<double>(k) / N;
            err = std::max(err, std::abs(sol.P[k](0, 0) - std::tanh(1.0 - t)));
        }
        if (prev_err > 0.0) CHECK(prev_err / err == Catch::Approx(2.0).margin(0.3));
        prev_err = err;
    }
}

TEST_CASE("riccati trivial and brute-force checks") {
    SECTION("zero state costs give zero control and value") {
        const auto sol = lqr_riccati_oracle(Matrix::Zero(1, 1), Matrix::Ones(1, 1),
                                            Matrix::Zero(1, 1), Matrix::Ones(1, 1),
                                            Matrix::Zero(1, 1), 1.0, 4,
                                            Vector::Ones(1));
        for (const auto& u : sol.u) CHECK(u.norm() == 0.0);
        for (const auto& P : sol.P) CHECK(P.norm() == 0.0);
    }

    SECTION("N = 2 agrees with a dense grid search") {
        const double T = 1.0, dt = 0.5, x0 = 1.0;
        const auto sol = lqr_riccati_oracle(Matrix::Zero(1, 1), Matrix::Ones(1, 1),
                                            Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                            Matrix::Zero(1, 1), T, 2, Vector::Ones(1));
        auto cost = [&](double u0, double u1) {
            const double x1 = x0 + dt * u0;
            const double x2 = x1 + dt * u1;
            (void)x2;
            return 0.5 * dt * (x0 * x0 + u0 * u0) + 0.5 * dt * (x1 * x1 + u1 * u1);
        };
        double best = 1e300, bu0 = 0, bu1 = 0;
        for (int i = 0; i <= 400; ++i)
            for (int j = 0; j <= 400; ++j) {
                const double u0 = -2.0 + 4.0 * i / 400.0;
                const double u1 = -2.0 + 4.0 * j / 400.0;
                const double c = cost(u0, u1);
                if (c < best) {
                    best = c;
                    bu0 = u0;
                    bu1 = u1;
                }
            }
        CHECK(std::abs(sol.u[0][0] - bu0) <= 0.011);  // within one grid cell
        CHECK(std::abs(sol.u[1][0] - bu1) <= 0.011);
        CHECK(cost(sol.u[0][0], sol.u[1][0]) <= best + 1e-9);
    }

    SECTION("discrete stationarity at the oracle") {
        auto prob = scalar_lqr_problem(1.0, 16, 1.0);
        const auto sol = lqr_riccati_oracle(Matrix::Zero(1, 1), Matrix::Ones(1, 1),
                                            Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                            Matrix::Zero(1, 1), 1.0, 16, prob->x0);
        NetworkSpec net = euler_layerize(prob);
        for (int k = 0; k < 16; ++k) net.layers[k]->set_params(sol.u[k]);
        const auto bp = backprop_oracle(net, prob->x0, Matrix::Zero(1, 1));
        for (int k = 0; k < net.depth(); ++k) CHECK(bp.grads[k].norm() <= 1e-10);
    }

    SECTION("indefinite control cost is rejected") {
        CHECK_THROWS_AS(
            lqr_riccati_oracle(Matrix::Zero(1, 1), Matrix::Ones(1, 1),
                               Matrix::Ones(1, 1), -Matrix::Ones(1, 1),
                               Matrix::Zero(1, 1), 1.0, 4, Vector::Ones(1)),
            std::invalid_argument);
    }
}

TEST_CASE("wave relaxation solves the scalar LQR to the oracle control") {
    auto prob = scalar_lqr_problem(1.0, 32, 1.0);
    NetworkSpec net = euler_layerize(prob);
    TrainConfig tc;
    tc.grid = GridConfig::from_nu(net.nodes(), 1.0);
    tc.optimizer.eta = 1.0;
    tc.budget = 4000;
    tc.tolerance = 1e-10;
    RelaxState st = RelaxState::make(net, 1);
    const auto rr = relax(st, net, prob->x0, Matrix::Zero(1, 1), tc);
    CHECK(rr.converged);

    const auto sol = lqr_riccati_oracle(Matrix::Zero(1, 1), Matrix::Ones(1, 1),
                                        Matrix::Ones(1, 1), Matrix::Ones(1, 1),
                                        Matrix::Zero(1, 1), 1.0, 32, prob->x0);
    double uerr = 0.0;
    for (int k = 0; k < 32; ++k)
        uerr = std::max(uerr, (net.layers[k]->params() - sol.u[k]).cwiseAbs().maxCoeff());
    CHECK(uerr <= 1e-3);
}

TEST_CASE("pendulum swing-up relaxes to a stationary residual") {
    auto prob = pendulum_problem(3.0, 40);
    NetworkSpec net = euler_layerize(prob);
    TrainConfig tc;
    tc.grid = GridConfig::from_nu(net.nodes(), 1.0);
    tc.optimizer.eta = 0.5;
    tc.budget = 20000;
    tc.tolerance = 1e-7;
    RelaxState st = RelaxState::make(net, 1);
    const auto rr = relax(st, net, prob->x0, Matrix::Zero(2, 1), tc);
    CHECK(rr.converged);
    // the relaxed control is stationary for the discrete problem
    const auto bp = backprop_oracle(net, prob->x0, Matrix::Zero(2, 1));
    for (int k = 0; k < net.depth(); ++k) CHECK(bp.grads[k].norm() <= 1e-5);
}
