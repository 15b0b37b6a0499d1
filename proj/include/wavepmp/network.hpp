#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/metric.hpp"

#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace wavepmp {

/// One layer map x_{k+1} = f_k(x_k; theta_k) together with its linearization
/// handles and an optional penalty R_k(x_k, theta_k).
///
/// Batch convention: node values are (width x batch) matrices and every map
/// acts column-wise. Parameter-space quantities (param_vjp, penalty gradients)
/// are averaged over batch columns, so that with the per-sample costates of
/// the adjoint recursion they produce the gradient of the mean objective.
class Layer {
public:
    virtual ~Layer() = default;

    virtual int in_dim() const = 0;
    virtual int out_dim() const = 0;
    virtual int param_dim() const = 0;

    virtual Vector params() const = 0;
    virtual void set_params(const Vector& p) = 0;

    virtual Matrix forward(const Matrix& x) const = 0;
    /// J_k(x) v
    virtual Matrix jvp(const Matrix& x, const Matrix& v) const = 0;
    /// J_k(x)^T v
    virtual Matrix vjp(const Matrix& x, const Matrix& v) const = 0;
    /// (grad_theta f_k(x))^T v, batch mean
    virtual Vector param_vjp(const Matrix& x, const Matrix& v) const = 0;

    /// Penalty R_k(x, theta), batch mean; zero by default.
    virtual double penalty(const Matrix& x) const {
        (void)x;
        return 0.0;
    }
    virtual Matrix penalty_grad_x(const Matrix& x) const {
        return Matrix::Zero(x.rows(), x.cols());
    }
    virtual Vector penalty_grad_params(const Matrix& x) const {
        (void)x;
        return Vector::Zero(param_dim());
    }

    virtual std::shared_ptr<Layer> clone() const = 0;
    virtual std::string name() const = 0;
};

enum class Activation { Linear, Tanh, Relu };

inline const char* activation_name(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Tanh: return "tanh";
        case Activation::Relu: return "relu";
    }
    return "?";
}

/// act(W x + b) with analytic JVP/VJP/parameter-VJP and an optional L2
/// parameter penalty (mu/2)||theta||^2. The ReLU subgradient at 0 is 0.
class AffineLayer final : public Layer {
public:
    AffineLayer(Matrix W, Vector b, Activation act = Activation::Linear, double l2 = 0.0)
        : W_(std::move(W)), b_(std::move(b)), act_(act), l2_(l2) {
        require(W_.rows() == b_.size(), "affine: bias size mismatch");
    }

    int in_dim() const override { return static_cast<int>(W_.cols()); }
    int out_dim() const override { return static_cast<int>(W_.rows()); }
    int param_dim() const override { return static_cast<int>(W_.size() + b_.size()); }

    const Matrix& weight() const { return W_; }
    const Vector& bias() const { return b_; }
    Activation activation() const { return act_; }

    Vector params() const override {
        Vector p(param_dim());
        p.head(W_.size()) = Eigen::Map<const Vector>(W_.data(), W_.size());
        p.tail(b_.size()) = b_;
        return p;
    }

    void set_params(const Vector& p) override {
        require(p.size() == param_dim(), "affine: parameter size mismatch");
        Eigen::Map<Vector>(W_.data(), W_.size()) = p.head(W_.size());
        b_ = p.tail(b_.size());
    }

    Matrix forward(const Matrix& x) const override {
        return activate(pre(x));
    }

    Matrix jvp(const Matrix& x, const Matrix& v) const override {
        require(v.rows() == in_dim(), "affine jvp: dimension mismatch");
        return dact(pre(x)).cwiseProduct(W_ * v);
    }

    Matrix vjp(const Matrix& x, const Matrix& v) const override {
        require(v.rows() == out_dim(), "affine vjp: dimension mismatch");
        return W_.transpose() * dact(pre(x)).cwiseProduct(v);
    }

    Vector param_vjp(const Matrix& x, const Matrix& v) const override {
        require(v.rows() == out_dim(), "affine param_vjp: dimension mismatch");
        const double inv_b = 1.0 / static_cast<double>(x.cols());
        const Matrix g = dact(pre(x)).cwiseProduct(v);
        const Matrix dW = inv_b * (g * x.transpose());
        Vector out(param_dim());
        out.head(W_.size()) = Eigen::Map<const Vector>(dW.data(), dW.size());
        out.tail(b_.size()) = inv_b * g.rowwise().sum();
        return out;
    }

    double penalty(const Matrix&) const override {
        if (l2_ == 0.0) return 0.0;
        return 0.5 * l2_ * (W_.squaredNorm() + b_.squaredNorm());
    }

    Vector penalty_grad_params(const Matrix&) const override {
        if (l2_ == 0.0) return Vector::Zero(param_dim());
        return l2_ * params();
    }

    std::shared_ptr<Layer> clone() const override {
        return std::make_shared<AffineLayer>(*this);
    }

    std::string name() const override {
        return std::string("affine-") + activation_name(act_);
    }

private:
    Matrix pre(const Matrix& x) const {
        require(x.rows() == in_dim(), "affine: input dimension mismatch");
        return (W_ * x).colwise() + b_;
    }

    Matrix activate(const Matrix& z) const {
        switch (act_) {
            case Activation::Linear: return z;
            case Activation::Tanh: return z.array().tanh().matrix();
            case Activation::Relu: return z.cwiseMax(0.0);
        }
        return z;
    }

    Matrix dact(const Matrix& z) const {
        switch (act_) {
            case Activation::Linear: return Matrix::Ones(z.rows(), z.cols());
            case Activation::Tanh: return (1.0 - z.array().tanh().square()).matrix();
            case Activation::Relu:
                return (z.array() > 0.0).cast<double>().matrix();
        }
        return Matrix::Ones(z.rows(), z.cols());
    }

    Matrix W_;
    Vector b_;
    Activation act_;
    double l2_;
};

/// Terminal loss ell(x_N, y): value is the batch mean, grad() returns the
/// per-column gradient of the per-sample loss.
class Loss {
public:
    virtual ~Loss() = default;
    virtual double value(const Matrix& x, const Matrix& y) const = 0;
    virtual Matrix grad(const Matrix& x, const Matrix& y) const = 0;
    virtual std::string name() const = 0;
};

class QuadraticLoss final : public Loss {
public:
    double value(const Matrix& x, const Matrix& y) const override {
        require(x.rows() == y.rows() && x.cols() == y.cols(),
                "loss: target dimension mismatch");
        return 0.5 * (x - y).squaredNorm() / static_cast<double>(x.cols());
    }
    Matrix grad(const Matrix& x, const Matrix& y) const override {
        require(x.rows() == y.rows() && x.cols() == y.cols(),
                "loss: target dimension mismatch");
        return x - y;
    }
    std::string name() const override { return "quadratic"; }
};

/// Softmax cross entropy with one-hot (or probability) targets.
class SoftmaxCrossEntropyLoss final : public Loss {
public:
    double value(const Matrix& x, const Matrix& y) const override {
        require(x.rows() == y.rows() && x.cols() == y.cols(),
                "loss: target dimension mismatch");
        double total = 0.0;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double m = x.col(j).maxCoeff();
            const double lse = m + std::log((x.col(j).array() - m).exp().sum());
            total += lse - x.col(j).dot(y.col(j));
        }
        return total / static_cast<double>(x.cols());
    }
    Matrix grad(const Matrix& x, const Matrix& y) const override {
        require(x.rows() == y.rows() && x.cols() == y.cols(),
                "loss: target dimension mismatch");
        Matrix g(x.rows(), x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double m = x.col(j).maxCoeff();
            Vector e = (x.col(j).array() - m).exp();
            g.col(j) = e / e.sum() - y.col(j);
        }
        return g;
    }
    std::string name() const override { return "softmax-xent"; }
};

/// Ordered layer maps with terminal loss and per-node metric factors.
struct NetworkSpec {
    std::vector<std::shared_ptr<Layer>> layers;
    std::shared_ptr<Loss> loss;
    std::vector<MetricFactor> metrics;  ///< N+1 node metric factors

    int depth() const { return static_cast<int>(layers.size()); }
    int nodes() const { return depth() + 1; }

    int node_width(int k) const {
        require(k >= 0 && k <= depth(), "network: node index out of range");
        return k == 0 ? layers.front()->in_dim() : layers[k - 1]->out_dim();
    }

    std::vector<int> widths() const {
        std::vector<int> w;
        w.reserve(nodes());
        w.push_back(layers.front()->in_dim());
        for (const auto& l : layers) w.push_back(l->out_dim());
        return w;
    }

    void validate() const {
        require(!layers.empty(), "network: need at least one layer");
        require(loss != nullptr, "network: missing terminal loss");
        for (std::size_t k = 1; k < layers.size(); ++k)
            require(layers[k]->in_dim() == layers[k - 1]->out_dim(),
                    "network: adjacent layer widths are inconsistent");
        if (!metrics.empty()) {
            require(static_cast<int>(metrics.size()) == nodes(),
                    "network: need one metric factor per node");
            for (int k = 0; k < nodes(); ++k)
                require(metrics[k].dim() == node_width(k),
                        "network: metric factor width mismatch");
        }
    }

    /// Fill missing metric factors with the identity default.
    void ensure_metrics() {
        if (metrics.empty())
            for (int k = 0; k < nodes(); ++k)
                metrics.push_back(MetricFactor::identity(node_width(k)));
    }

    NetworkSpec clone() const {
        NetworkSpec c;
        c.layers.reserve(layers.size());
        for (const auto& l : layers) c.layers.push_back(l->clone());
        c.loss = loss;
        c.metrics = metrics;
        return c;
    }
};

}  // namespace wavepmp
