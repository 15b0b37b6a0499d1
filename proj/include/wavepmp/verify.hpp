#pragma once

#include "wavepmp/boundaries.hpp"
#include "wavepmp/common.hpp"
#include "wavepmp/energy.hpp"
#include "wavepmp/impedance.hpp"
#include "wavepmp/models.hpp"
#include "wavepmp/pmp.hpp"
#include "wavepmp/trainer.hpp"
#include "wavepmp/transport.hpp"
#include "wavepmp/waves.hpp"

#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace wavepmp {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Source-free transport run with matched (absorbing) terminations; the
/// monitor records the wave energy per step. This is the regime where the
/// balance theorem's passivity premise holds strictly, so for nu in (0,1]
/// the energy must be non-increasing, while nu > 1 amplifies.
inline PassivityMonitor run_source_free(int num_nodes, double nu, int steps,
                                        std::uint64_t seed, int width = 1) {
    GridConfig grid = GridConfig::from_nu(num_nodes, nu);
    WaveField field = WaveField::zeros(std::vector<int>(num_nodes, width), 1);
    field.randomize(seed);
    const auto junctions =
        identity_junctions(std::vector<int>(num_nodes, width));
    PassivityMonitor mon;
    mon.record({0, wave_energy(field, grid.dt), 0.0, 0.0, 0.0});
    for (int n = 0; n < steps; ++n) {
        field = upwind_transport(field, grid, junctions);
        apply_absorbing_ports(field);
        const auto ports = boundary_passivity_report(field);
        mon.record({n + 1, wave_energy(field, grid.dt), ports.input_margin,
                    ports.terminal_margin, 0.0});
    }
    return mon;
}

/// Manufactured smooth wave fields with sources defined by the continuum
/// equations; used to audit the discrete balance identity.
struct ManufacturedField {
    std::function<double(double, double)> wp, wm, ep, em;

    static ManufacturedField standard(double c) {
        ManufacturedField f;
        const double a1 = 2.0, a2 = 3.0, phase = 0.7;
        f.wp = [=](double t, double tau) { return std::sin(a1 * t - c * tau + phase); };
        f.wm = [=](double t, double tau) { return std::cos(a2 * t + c * tau); };
        // d_tau wp + c d_t wp = -c ep
        f.ep = [=](double t, double tau) {
            const double dtau = -c * std::cos(a1 * t - c * tau + phase);
            const double dt = a1 * std::cos(a1 * t - c * tau + phase);
            return -(dtau + c * dt) / c;
        };
        // d_tau wm - c d_t wm = -c em
        f.em = [=](double t, double tau) {
            const double dtau = -c * std::sin(a2 * t + c * tau);
            const double dt = -a2 * std::sin(a2 * t + c * tau);
            return -(dtau - c * dt) / c;
        };
        return f;
    }
};

/// Balance defect of the manufactured solution at one resolution.
inline double manufactured_balance_defect(int num_nodes, double dtau,
                                          double horizon = 1.0, double tau0 = 0.3) {
    GridConfig grid;
    grid.num_nodes = num_nodes;
    grid.dt = horizon / (num_nodes - 1);
    grid.c = 1.0;
    grid.dtau = dtau;
    const auto f = ManufacturedField::standard(grid.c);
    auto sample = [&](double tau) {
        WaveField field = WaveField::zeros(std::vector<int>(num_nodes, 1), 1);
        for (int k = 0; k < num_nodes; ++k) {
            const double t = k * grid.dt;
            field.plus[k](0, 0) = f.wp(t, tau);
            field.minus[k](0, 0) = f.wm(t, tau);
        }
        return field;
    };
    const WaveField f0 = sample(tau0);
    const WaveField f1 = sample(tau0 + dtau);
    std::vector<Matrix> ep(num_nodes), em(num_nodes);
    for (int k = 0; k < num_nodes; ++k) {
        const double t = k * grid.dt;
        ep[k] = Matrix::Constant(1, 1, f.ep(t, tau0));
        em[k] = Matrix::Constant(1, 1, f.em(t, tau0));
    }
    return energy_balance_report(f0, f1, ep, em, grid).defect;
}

namespace detail {

inline std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

inline Matrix random_matrix(std::mt19937_64& rng, int r, int c) {
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(r, c);
    for (int j = 0; j < c; ++j)
        for (int i = 0; i < r; ++i) m(i, j) = g(rng);
    return m;
}

inline MetricFactor random_metric(std::mt19937_64& rng, int n) {
    // shifted random matrix; retry until comfortably invertible
    for (int attempt = 0; attempt < 32; ++attempt) {
        Matrix t = random_matrix(rng, n, n) + 2.0 * Matrix::Identity(n, n);
        Eigen::JacobiSVD<Matrix> svd(t);
        if (svd.singularValues().minCoeff() > 1e-3) return MetricFactor::dense(t);
    }
    return MetricFactor::identity(n);
}

inline std::vector<CheckResult> suite_roundtrip() {
    std::vector<CheckResult> out;
    std::mt19937_64 rng(11);
    double worst_rt = 0.0, worst_power = 0.0, worst_indep = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 16);
        const MetricFactor theta = random_metric(rng, n);
        const Matrix x = random_matrix(rng, n, 1);
        const Matrix lam = random_matrix(rng, n, 1);
        auto [wp, wm] = wave_transform(x, lam, theta);
        auto [x2, lam2] = inverse_wave_transform(wp, wm, theta);
        const double scale = std::max(1.0, std::max(x.norm(), lam.norm()));
        worst_rt = std::max(worst_rt, std::max((x2 - x).norm(), (lam2 - lam).norm()) / scale);
        const double pairing = lam.cwiseProduct(x).sum();
        worst_power = std::max(worst_power,
                               std::abs(power_split(wp, wm) - pairing) /
                                   std::max(1.0, std::abs(pairing)));
        const MetricFactor theta2 = random_metric(rng, n);
        auto [wp2, wm2] = wave_transform(x, lam, theta2);
        worst_indep = std::max(worst_indep,
                               std::abs(power_split(wp2, wm2) - pairing) /
                                   std::max(1.0, std::abs(pairing)));
    }
    out.push_back({"wave transform round trip < 1e-12", worst_rt < 1e-12,
                   "max rel err " + fmt(worst_rt)});
    out.push_back({"power identity < 1e-12", worst_power < 1e-12,
                   "max rel err " + fmt(worst_power)});
    out.push_back({"pairing metric-independent < 1e-10", worst_indep < 1e-10,
                   "max rel err " + fmt(worst_indep)});
    return out;
}

inline std::vector<CheckResult> suite_transport() {
    std::vector<CheckResult> out;
    std::mt19937_64 rng(12);

    // pure shift at nu = 1 must be bit exact
    bool shift_exact = true;
    for (int trial = 0; trial < 20; ++trial) {
        const int nodes = 16;
        WaveField f = WaveField::zeros(std::vector<int>(nodes, 3), 2);
        f.randomize(rng());
        const auto grid = GridConfig::from_nu(nodes, 1.0);
        const auto junctions = identity_junctions(std::vector<int>(nodes, 3));
        const auto wp = upwind_step_forward(f, grid, junctions);
        const auto wm = upwind_step_backward(f, grid, junctions);
        shift_exact = shift_exact && wp[0] == f.plus[0] && wm[nodes - 1] == f.minus[nodes - 1];
        for (int k = 1; k < nodes; ++k)
            shift_exact = shift_exact && wp[k] == f.plus[k - 1];
        for (int k = 0; k + 1 < nodes; ++k)
            shift_exact = shift_exact && wm[k] == f.minus[k + 1];
    }
    out.push_back({"nu=1 transport is a bit-exact shift", shift_exact, ""});

    // junction adjoint identity
    double worst_adj = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const int n_in = 1 + static_cast<int>(rng() % 6);
        const int n_out = 1 + static_cast<int>(rng() % 6);
        const Matrix J = random_matrix(rng, n_out, n_in);
        const MetricFactor ti = random_metric(rng, n_in);
        const MetricFactor to = random_metric(rng, n_out);
        const auto junction = make_junction(
            0, ti, to, [J](const Matrix& v) { return J * v; },
            [J](const Matrix& v) { return J.transpose() * v; });
        const Matrix u = random_matrix(rng, n_in, 1);
        const Matrix v = random_matrix(rng, n_out, 1);
        const double lhs = junction.apply(u).cwiseProduct(v).sum();
        const double rhs = u.cwiseProduct(junction.apply_transpose(v)).sum();
        worst_adj = std::max(worst_adj, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    out.push_back({"junction adjoint identity < 1e-12", worst_adj < 1e-12,
                   "max rel err " + fmt(worst_adj)});

    // non-expansive source-free decay for nu in (0, 1]
    bool nonexpansive = true;
    for (double nu : {0.25, 0.5, 1.0}) {
        const auto mon = run_source_free(32, nu, 150, 77);
        nonexpansive = nonexpansive && mon.energy_nonincreasing();
    }
    out.push_back({"source-free energy non-increasing, nu in {0.25,0.5,1}",
                   nonexpansive, ""});
    return out;
}

inline std::vector<CheckResult> suite_cfl() {
    std::vector<CheckResult> out;
    const auto bad = run_source_free(64, 1.2, 200, 5);
    out.push_back({"nu=1.2 run grows past 10x (instability witness)",
                   bad.max_growth() > 10.0, "growth " + fmt(bad.max_growth())});
    const auto good = run_source_free(64, 1.0, 200, 5);
    out.push_back({"nu=1.0 run stays bounded", good.max_growth() <= 1.0 + 1e-12,
                   "growth " + fmt(good.max_growth())});
    return out;
}

inline std::vector<CheckResult> suite_energy() {
    std::vector<CheckResult> out;
    // defect order under simultaneous refinement
    std::vector<double> defects;
    int nodes = 17;
    double dtau = 0.02;
    for (int level = 0; level < 4; ++level) {
        defects.push_back(manufactured_balance_defect(nodes, dtau));
        nodes = 2 * (nodes - 1) + 1;
        dtau *= 0.5;
    }
    double min_order = 1e9;
    for (std::size_t i = 0; i + 1 < defects.size(); ++i)
        min_order = std::min(min_order, std::log2(defects[i] / defects[i + 1]));
    out.push_back({"balance defect order >= 0.8", min_order >= 0.8,
                   "min slope " + fmt(min_order)});

    // dissipative forcing E = kappa w keeps V non-increasing
    GridConfig grid = GridConfig::from_nu(24, 0.5);
    WaveField field = WaveField::zeros(std::vector<int>(24, 2), 1);
    field.randomize(3);
    const auto junctions = identity_junctions(std::vector<int>(24, 2));
    const double kappa = 0.3;
    bool monotone = true;
    double last = wave_energy(field, grid.dt);
    for (int n = 0; n < 120; ++n) {
        WaveField moved = upwind_transport(field, grid, junctions);
        std::vector<Matrix> ep, em;
        for (int k = 0; k < moved.nodes(); ++k) {
            ep.push_back(kappa * moved.plus[k]);
            em.push_back(kappa * moved.minus[k]);
        }
        inject_sources(moved, ep, em, grid.alpha);
        apply_absorbing_ports(moved);
        field = std::move(moved);
        const double v = wave_energy(field, grid.dt);
        monotone = monotone && v <= last + 1e-12;
        last = v;
    }
    out.push_back({"dissipative forcing keeps V non-increasing", monotone, ""});
    return out;
}

inline std::vector<CheckResult> suite_ports() {
    std::vector<CheckResult> out;
    std::mt19937_64 rng(21);
    double worst_b = 0.0, worst_power = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 8);
        const Matrix a = random_matrix(rng, n, n);
        const Impedance z = Impedance::full(
            a * a.transpose() + 0.5 * Matrix::Identity(n, n));
        const Vector e = random_matrix(rng, n, 1);
        const Vector phi_m = matched_flow(-e, z);  // effort e = -grad => grad = -e
        worst_b = std::max(worst_b, std::sqrt(reflection_norm_sq(e, phi_m, z)));
        const Vector phi = random_matrix(rng, n, 1);
        auto [ai, bi] = port_scatter(e, phi, z);
        const double p = e.dot(phi);
        worst_power = std::max(
            worst_power, std::abs(0.5 * (ai.squaredNorm() - bi.squaredNorm()) - p) /
                             std::max(1.0, std::abs(p)));
    }
    out.push_back({"matched flow reflects nothing (b = 0) < 1e-12", worst_b < 1e-12,
                   "max |b| " + fmt(worst_b)});
    out.push_back({"port power factorization < 1e-12", worst_power < 1e-12,
                   "max rel err " + fmt(worst_power)});

    // Newton one-step on an anisotropic quadratic
    Matrix H(2, 2);
    H << 1, 0, 0, 4;
    Vector theta(2);
    theta << 1, 1;
    const Vector grad = H * theta;
    const auto newton = step_curvature(theta, grad, H, 1.0);
    out.push_back({"Newton step with eta=1 reaches the quadratic minimizer",
                   !newton.fell_back && newton.theta_next.norm() < 1e-12,
                   "|theta| " + fmt(newton.theta_next.norm())});

    // heavy-ball Lyapunov decrease on the same quadratic
    Vector th(2), v(2);
    th << 1, 1;
    v.setZero();
    const double R = 1.0, L = 1.0, dtau = 0.05;
    auto lyap = [&](const Vector& t, const Vector& vel) {
        return 0.5 * t.dot(H * t) + 0.5 * L * vel.squaredNorm();
    };
    bool decreasing = true;
    double last = lyap(th, v);
    for (int n = 0; n < 400; ++n) {
        auto [t2, v2] = step_inductive(th, v, H * th, R, L, dtau);
        th = t2;
        v = v2;
        const double val = lyap(th, v);
        decreasing = decreasing && val <= last + 1e-12;
        last = val;
    }
    out.push_back({"heavy-ball Lyapunov value non-increasing", decreasing,
                   "final " + fmt(last)});
    return out;
}

inline std::vector<CheckResult> suite_oracle() {
    std::vector<CheckResult> out;
    NetworkSpec net = make_mlp({3, 4, 2}, Activation::Tanh, 17);
    std::mt19937_64 rng(18);
    const Matrix x_in = random_matrix(rng, 3, 2);
    const Matrix y = random_matrix(rng, 2, 2);
    const auto bp = backprop_oracle(net, x_in, y);
    const auto res = node_residuals(net, bp.states, bp.costates, x_in, y);
    out.push_back({"node residuals vanish on the oracle trajectory < 1e-12",
                   res.max_node_norm() < 1e-12, "max " + fmt(res.max_node_norm())});

    // finite-difference spot check of one parameter gradient
    const int layer = 0;
    const Vector theta0 = net.layers[layer]->params();
    const double h = 1e-6;
    double worst = 0.0;
    for (int i = 0; i < std::min<int>(5, net.layers[layer]->param_dim()); ++i) {
        Vector t = theta0;
        t[i] += h;
        net.layers[layer]->set_params(t);
        const double fp = backprop_oracle(net, x_in, y).loss;
        t[i] -= 2 * h;
        net.layers[layer]->set_params(t);
        const double fm = backprop_oracle(net, x_in, y).loss;
        net.layers[layer]->set_params(theta0);
        const double fd = (fp - fm) / (2 * h);
        worst = std::max(worst, std::abs(fd - bp.grads[layer][i]) /
                                    std::max(1.0, std::abs(fd)));
    }
    out.push_back({"backprop gradient matches finite differences < 1e-5",
                   worst < 1e-5, "max rel err " + fmt(worst)});

    // relaxation convergence on a small linear-quadratic instance
    NetworkSpec lin = make_mlp({1, 1, 1, 1, 1}, Activation::Linear, 3);
    Matrix xi(1, 1), yy(1, 1);
    xi << 0.8;
    yy << -0.4;
    TrainConfig tc;
    tc.grid = GridConfig::from_nu(lin.nodes(), 1.0);
    tc.optimizer.eta = 0.0;
    tc.budget = 10 * lin.depth();
    tc.tolerance = 1e-9;
    RelaxState st = RelaxState::make(lin, 1);
    const auto rr = relax(st, lin, xi, yy, tc);
    out.push_back({"frozen-parameter relaxation reaches 1e-9", rr.converged,
                   "residual " + fmt(rr.final_residual) + " after " +
                       std::to_string(rr.steps) + " steps"});
    return out;
}

}  // namespace detail

inline std::vector<std::string> verify_suite_names() {
    return {"roundtrip", "transport", "cfl", "energy", "ports", "oracle"};
}

inline std::vector<CheckResult> run_verify_suite(const std::string& name) {
    if (name == "roundtrip") return detail::suite_roundtrip();
    if (name == "transport") return detail::suite_transport();
    if (name == "cfl") return detail::suite_cfl();
    if (name == "energy") return detail::suite_energy();
    if (name == "ports") return detail::suite_ports();
    if (name == "oracle") return detail::suite_oracle();
    std::string msg = "unknown verify suite '" + name + "'; available:";
    for (const auto& s : verify_suite_names()) msg += " " + s;
    throw std::invalid_argument(msg);
}

}  // namespace wavepmp
