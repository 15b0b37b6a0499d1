#include <catch2/catch_amalgamated.hpp>

#include "test_helpers.hpp"

using namespace wavepmp;
using wavepmp::test::random_matrix;

namespace {

Matrix scalar(double v) {
    Matrix m(1, 1);
    m << v;
    return m;
}

NetworkSpec scalar_chain(const std::vector<double>& gains) {
    NetworkSpec net;
    for (double a : gains) {
        Matrix W(1, 1);
        W << a;
        net.layers.push_back(
            std::make_shared<AffineLayer>(W, Vector::Zero(1), Activation::Linear));
    }
    net.loss = std::make_shared<QuadraticLoss>();
    net.ensure_metrics();
    return net;
}

TrainConfig frozen_config(const NetworkSpec& net, double nu = 1.0) {
    TrainConfig tc;
    tc.grid = GridConfig::from_nu(net.nodes(), nu);
    tc.optimizer.eta = 0.0;
    tc.tolerance = 1e-8;
    tc.budget = 10 * net.depth();
    return tc;
}

std::vector<double> random_gains(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<double> g(n);
    for (auto& v : g) v = u(rng);
    return g;
}

}  // namespace

TEST_CASE("first step from zero waves clamps both ports") {
    NetworkSpec net = make_mlp({2, 3, 2}, Activation::Tanh, 4);
    Matrix x_in = random_matrix(*new std::mt19937_64(4), 2, 1);  // deliberate? no
    delete nullptr;
    std::mt19937_64 rng(4);
    x_in = random_matrix(rng, 2, 1);
    const Matrix y = random_matrix(rng, 2, 1);

    TrainConfig tc = frozen_config(net);
    RelaxState st = RelaxState::make(net, 1);

    // before the step the reconstruction is identically zero
    const NodeStates s0 = reconstruct(st.field, net.metrics);
    for (const auto& x : s0.x) CHECK(x.norm() == 0.0);
    for (const auto& l : s0.lambda) CHECK(l.norm() == 0.0);

    sync_step(st, net, x_in, y, tc);

    // after boundary scattering the ports hold the clamped values exactly
    const NodeStates s1 = reconstruct(st.field, net.metrics);
    CHECK((s1.x[0] - x_in).norm() <= 1e-12);
    const Matrix want_lambda = net.loss->grad(Matrix::Zero(2, 1), y);
    CHECK((s1.lambda[2] - want_lambda).norm() <= 1e-12);
}

TEST_CASE("oracle-preloaded waves are stationary and step the parameters by the gradient") {
    NetworkSpec net = scalar_chain({2.0});
    const Matrix x_in = scalar(1.0);
    const Matrix y = scalar(0.0);
    const auto bp = backprop_oracle(net, x_in, y);

    NodeStates s;
    s.x = bp.states;
    s.lambda = bp.costates;
    RelaxState st = RelaxState::make(net, 1);
    st.field = encode(s, net.metrics);

    TrainConfig tc = frozen_config(net);
    tc.optimizer.eta = 0.1;
    const WaveField before = st.field;
    const Vector theta_before = net.layers[0]->params();

    const StepInfo info = sync_step(st, net, x_in, y, tc);

    // sources vanish on the oracle, so the waves are untouched (ports rewrite
    // the same values)
    CHECK(info.r_x_max <= 1e-14);
    CHECK(info.r_lambda_max <= 1e-14);
    for (int k = 0; k < st.field.nodes(); ++k) {
        CHECK((st.field.plus[k] - before.plus[k]).norm() <= 1e-12);
        CHECK((st.field.minus[k] - before.minus[k]).norm() <= 1e-12);
    }
    // theta <- theta - eta * gradJ
    const Vector want = theta_before - 0.1 * bp.grads[0];
    CHECK((net.layers[0]->params() - want).norm() <= 1e-15);
}

TEST_CASE("relax drives node residuals to zero against the oracle") {
    std::mt19937_64 rng(6);
    for (const int depth : {3, 8}) {
        NetworkSpec net = scalar_chain(random_gains(rng, depth));
        const Matrix x_in = scalar(0.8);
        const Matrix y = scalar(-0.4);
        TrainConfig tc = frozen_config(net);
        RelaxState st = RelaxState::make(net, 1);
        const auto rr = relax(st, net, x_in, y, tc);
        CHECK(rr.converged);
        CHECK(rr.final_residual <= 1e-8);

        const auto bp = backprop_oracle(net, x_in, y);
        const NodeStates s = reconstruct(st.field, net.metrics);
        for (int k = 0; k <= depth; ++k) {
            CHECK((s.x[k] - bp.states[k]).norm() <= 1e-6);
            CHECK((s.lambda[k] - bp.costates[k]).norm() <= 1e-6);
        }
    }
}

TEST_CASE("relax returns immediately when the tolerance is already met") {
    NetworkSpec net = scalar_chain({0.5, -0.8});
    const Matrix x_in = scalar(0.3);
    const Matrix y = scalar(0.1);
    const auto bp = backprop_oracle(net, x_in, y);
    NodeStates s;
    s.x = bp.states;
    s.lambda = bp.costates;
    RelaxState st = RelaxState::make(net, 1);
    st.field = encode(s, net.metrics);
    TrainConfig tc = frozen_config(net);
    const auto rr = relax(st, net, x_in, y, tc);
    CHECK(rr.steps <= 1);
    CHECK(rr.converged);
}

TEST_CASE("residual decrease is monotone after the fill-in phase") {
    std::mt19937_64 rng(44);
    NetworkSpec net = scalar_chain(random_gains(rng, 12));
    TrainConfig tc = frozen_config(net);
    tc.budget = 10 * net.depth();
    tc.tolerance = 1e-300;  // run the full budget
    RelaxState st = RelaxState::make(net, 1);
    const auto rr = relax(st, net, scalar(0.9), scalar(-0.2), tc);

    const int N = net.depth();
    double last = rr.residual_history[N];
    bool monotone = true;
    for (std::size_t i = N + 1; i < rr.residual_history.size(); ++i) {
        monotone = monotone && rr.residual_history[i] <= last + 1e-14;
        last = rr.residual_history[i];
    }
    CHECK(monotone);
    // geometric decay: the tail shrinks by a sizable factor
    CHECK(rr.residual_history.back() <=
          0.5 * rr.residual_history[N] + 1e-14);
}

TEST_CASE("excessive source gain triggers the energy guard") {
    std::mt19937_64 rng(3);
    NetworkSpec net = scalar_chain(random_gains(rng, 16));
    TrainConfig tc = frozen_config(net);
    tc.grid.alpha = 2.2;  // outside the stable gain interval
    tc.budget = 4000;
    tc.divergence_factor = 1e6;
    RelaxState st = RelaxState::make(net, 1);
    CHECK_THROWS_AS(relax(st, net, scalar(0.8), scalar(-0.1), tc), InstabilityError);
}

TEST_CASE("training XOR reaches a small loss and tracks the baseline") {
    const Dataset xor_data = dataset_xor();
    NetworkSpec wave_net = make_mlp({2, 2, 1}, Activation::Tanh, 0);
    NetworkSpec sgd_net = wave_net.clone();

    TrainConfig tc;
    tc.grid = GridConfig::from_nu(wave_net.nodes(), 1.0);
    tc.optimizer.eta = 0.1;
    tc.budget = 2000;
    tc.log_every = 100;

    const auto wave = train(wave_net, xor_data, tc);
    const auto sgd = train_backprop_sgd(sgd_net, xor_data, tc);
    CHECK(wave.final_loss <= 0.05);
    CHECK(wave.final_loss <= 2.0 * sgd.final_loss);
}

TEST_CASE("eta = 0 leaves parameters bit-identical") {
    const Dataset xor_data = dataset_xor();
    NetworkSpec net = make_mlp({2, 2, 1}, Activation::Tanh, 2);
    std::vector<Vector> before;
    for (const auto& l : net.layers) before.push_back(l->params());
    TrainConfig tc;
    tc.grid = GridConfig::from_nu(net.nodes(), 1.0);
    tc.optimizer.eta = 0.0;
    tc.budget = 200;
    train(net, xor_data, tc);
    for (int k = 0; k < net.depth(); ++k) CHECK(net.layers[k]->params() == before[k]);
}

TEST_CASE("a single affine layer converges to the least-squares solution") {
    const Dataset d = dataset_linreg(32, 2, 0.05, 13);
    NetworkSpec net = make_mlp({2, 1}, Activation::Linear, 1);
    TrainConfig tc;
    tc.grid = GridConfig::from_nu(net.nodes(), 1.0);
    tc.optimizer.eta = 0.05;
    tc.budget = 20000;
    train(net, d, tc);

    // normal equations with bias
    Matrix A(3, d.size());
    A.topRows(2) = d.X;
    A.row(2).setOnes();
    const Vector sol = (A * A.transpose()).ldlt().solve(A * d.Y.transpose());
    const Vector got = net.layers[0]->params();  // [w0 w1 b]
    CHECK(std::abs(got[0] - sol[0]) <= 1e-4);
    CHECK(std::abs(got[1] - sol[1]) <= 1e-4);
    CHECK(std::abs(got[2] - sol[2]) <= 1e-4);
}

TEST_CASE("batch rotation cycles the dataset without resetting waves") {
    const Dataset d = dataset_linreg(8, 2, 0.0, 3);
    NetworkSpec net = make_mlp({2, 1}, Activation::Linear, 9);
    TrainConfig tc;
    tc.grid = GridConfig::from_nu(net.nodes(), 1.0);
    tc.optimizer.eta = 0.02;
    tc.budget = 4000;
    tc.batch_size = 4;
    tc.rotate_every = 50;
    const auto res = train(net, d, tc);
    CHECK(std::isfinite(res.final_loss));
    CHECK(res.final_loss < 0.05);
}

TEST_CASE("inductive termination trains the XOR net") {
    const Dataset xor_data = dataset_xor();
    NetworkSpec net = make_mlp({2, 2, 1}, Activation::Tanh, 0);
    TrainConfig tc;
    tc.grid = GridConfig::from_nu(net.nodes(), 1.0);
    tc.optimizer.kind = OptimizerConfig::Kind::Inductive;
    tc.optimizer.R = 10.0;
    tc.optimizer.L = 2.0;
    tc.budget = 4000;
    const auto res = train(net, xor_data, tc);
    CHECK(res.final_loss <= 0.05);
}

TEST_CASE("metrics rows are deterministic for a fixed config") {
    const Dataset xor_data = dataset_xor();
    auto run_once = [&]() {
        NetworkSpec net = make_mlp({2, 2, 1}, Activation::Tanh, 0);
        TrainConfig tc;
        tc.grid = GridConfig::from_nu(net.nodes(), 1.0);
        tc.optimizer.eta = 0.1;
        tc.budget = 300;
        tc.log_every = 10;
        const auto res = train(net, xor_data, tc);
        std::string dump;
        for (const auto& row : res.metrics) dump += format_metrics_row(row);
        return dump;
    };
    CHECK(run_once() == run_once());
}
