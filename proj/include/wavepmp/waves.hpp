#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/metric.hpp"

#include <random>
#include <utility>
#include <vector>

namespace wavepmp {

/// Per-node pair of counter-propagating wave vectors. Columns index the
/// mini-batch; node k holds matrices of shape (width_k x batch).
struct WaveField {
    std::vector<Matrix> plus;
    std::vector<Matrix> minus;
    long step = 0;

    static WaveField zeros(const std::vector<int>& widths, int batch) {
        require(batch >= 1, "waves: batch must be >= 1");
        WaveField f;
        f.plus.reserve(widths.size());
        f.minus.reserve(widths.size());
        for (int w : widths) {
            f.plus.push_back(Matrix::Zero(w, batch));
            f.minus.push_back(Matrix::Zero(w, batch));
        }
        return f;
    }

    int nodes() const { return static_cast<int>(plus.size()); }
    int batch() const { return plus.empty() ? 0 : static_cast<int>(plus[0].cols()); }

    bool finite() const {
        for (const auto& m : plus)
            if (!m.allFinite()) return false;
        for (const auto& m : minus)
            if (!m.allFinite()) return false;
        return true;
    }

    /// Seeded standard-normal fill; used by witness and decay runs.
    void randomize(std::uint64_t seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> g(0.0, 1.0);
        for (auto* side : {&plus, &minus})
            for (auto& m : *side)
                for (Eigen::Index j = 0; j < m.cols(); ++j)
                    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = g(rng);
    }
};

/// State/costate node values (same layout as WaveField).
struct NodeStates {
    std::vector<Matrix> x;
    std::vector<Matrix> lambda;
};

/// w_pm = (Theta x +- Theta^{-T} lambda) / sqrt(2)
inline std::pair<Matrix, Matrix> wave_transform(const Matrix& x, const Matrix& lambda,
                                                const MetricFactor& theta) {
    require(x.rows() == lambda.rows() && x.cols() == lambda.cols(),
            "wave_transform: state/costate dimension mismatch");
    const Matrix p = theta.apply(x);
    const Matrix q = theta.apply_inv_t(lambda);
    return {kInvSqrt2 * (p + q), kInvSqrt2 * (p - q)};
}

/// Inverse: x = Theta^{-1}(w+ + w-)/sqrt(2), lambda = Theta^T(w+ - w-)/sqrt(2)
inline std::pair<Matrix, Matrix> inverse_wave_transform(const Matrix& w_plus,
                                                        const Matrix& w_minus,
                                                        const MetricFactor& theta) {
    require(w_plus.rows() == w_minus.rows() && w_plus.cols() == w_minus.cols(),
            "inverse_wave_transform: wave dimension mismatch");
    Matrix x = theta.apply_inv(kInvSqrt2 * (w_plus + w_minus));
    Matrix lambda = theta.apply_t(kInvSqrt2 * (w_plus - w_minus));
    return {std::move(x), std::move(lambda)};
}

/// The diagonalized pairing: lambda^T v = (||w+||^2 - ||w-||^2)/2.
/// Sums over batch columns.
inline double power_split(const Matrix& w_plus, const Matrix& w_minus) {
    require(w_plus.rows() == w_minus.rows() && w_plus.cols() == w_minus.cols(),
            "power_split: wave dimension mismatch");
    return 0.5 * (w_plus.squaredNorm() - w_minus.squaredNorm());
}

inline NodeStates reconstruct(const WaveField& field,
                              const std::vector<MetricFactor>& thetas) {
    require(thetas.size() == field.plus.size(), "reconstruct: metric count mismatch");
    NodeStates s;
    s.x.reserve(field.nodes());
    s.lambda.reserve(field.nodes());
    for (int k = 0; k < field.nodes(); ++k) {
        auto [x, lam] = inverse_wave_transform(field.plus[k], field.minus[k], thetas[k]);
        s.x.push_back(std::move(x));
        s.lambda.push_back(std::move(lam));
    }
    return s;
}

inline WaveField encode(const NodeStates& states, const std::vector<MetricFactor>& thetas) {
    require(states.x.size() == thetas.size(), "encode: metric count mismatch");
    WaveField f;
    f.plus.reserve(states.x.size());
    f.minus.reserve(states.x.size());
    for (std::size_t k = 0; k < states.x.size(); ++k) {
        auto [wp, wm] = wave_transform(states.x[k], states.lambda[k], thetas[k]);
        f.plus.push_back(std::move(wp));
        f.minus.push_back(std::move(wm));
    }
    return f;
}

}  // namespace wavepmp
