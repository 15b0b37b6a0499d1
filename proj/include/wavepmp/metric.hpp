#pragma once

#include "wavepmp/common.hpp"

#include <memory>
#include <utility>

namespace wavepmp {

/// Invertible per-node metric factor Theta with cached inverse. Theta^T Theta
/// is the node metric; identity, scalar and diagonal forms have fast paths,
/// dense factors are LU-factored once at construction.
class MetricFactor {
public:
    enum class Kind { Identity, Scalar, Diagonal, Dense };

    static MetricFactor identity(int n) {
        MetricFactor m;
        m.kind_ = Kind::Identity;
        m.n_ = n;
        return m;
    }

    static MetricFactor scalar(int n, double s) {
        require(s != 0.0 && std::isfinite(s), "metric: scalar factor must be nonzero");
        MetricFactor m;
        m.kind_ = Kind::Scalar;
        m.n_ = n;
        m.scale_ = s;
        return m;
    }

    static MetricFactor diagonal(const Vector& d) {
        require(d.size() > 0, "metric: empty diagonal");
        for (Eigen::Index i = 0; i < d.size(); ++i)
            require(d[i] != 0.0 && std::isfinite(d[i]),
                    "metric: diagonal entries must be nonzero");
        MetricFactor m;
        m.kind_ = Kind::Diagonal;
        m.n_ = static_cast<int>(d.size());
        m.diag_ = d;
        return m;
    }

    static MetricFactor dense(const Matrix& theta) {
        require(theta.rows() == theta.cols(), "metric: factor must be square");
        MetricFactor m;
        m.kind_ = Kind::Dense;
        m.n_ = static_cast<int>(theta.rows());
        m.dense_ = std::make_shared<DenseData>();
        m.dense_->theta = theta;
        Eigen::JacobiSVD<Matrix> svd(theta);
        const double smin = svd.singularValues().minCoeff();
        const double smax = svd.singularValues().maxCoeff();
        require(smin > 1e-13 * std::max(smax, 1.0), "metric: factor is singular");
        m.dense_->lu.compute(theta);
        m.dense_->lu_t.compute(theta.transpose());
        return m;
    }

    Kind kind() const { return kind_; }
    int dim() const { return n_; }
    bool is_identity() const { return kind_ == Kind::Identity; }

    /// Materialized Theta (mostly for tests and diagnostics).
    Matrix matrix() const {
        switch (kind_) {
            case Kind::Identity: return Matrix::Identity(n_, n_);
            case Kind::Scalar:   return scale_ * Matrix::Identity(n_, n_);
            case Kind::Diagonal: return diag_.asDiagonal();
            case Kind::Dense:    return dense_->theta;
        }
        return {};
    }

    /// Theta * v, column-wise.
    Matrix apply(const Matrix& v) const {
        check_rows(v);
        switch (kind_) {
            case Kind::Identity: return v;
            case Kind::Scalar:   return scale_ * v;
            case Kind::Diagonal: return diag_.asDiagonal() * v;
            case Kind::Dense:    return dense_->theta * v;
        }
        return {};
    }

    /// Theta^{-1} * v.
    Matrix apply_inv(const Matrix& v) const {
        check_rows(v);
        switch (kind_) {
            case Kind::Identity: return v;
            case Kind::Scalar:   return v / scale_;
            case Kind::Diagonal: return diag_.cwiseInverse().asDiagonal() * v;
            case Kind::Dense:    return dense_->lu.solve(v);
        }
        return {};
    }

    /// Theta^T * v.
    Matrix apply_t(const Matrix& v) const {
        check_rows(v);
        switch (kind_) {
            case Kind::Identity: return v;
            case Kind::Scalar:   return scale_ * v;
            case Kind::Diagonal: return diag_.asDiagonal() * v;
            case Kind::Dense:    return dense_->theta.transpose() * v;
        }
        return {};
    }

    /// Theta^{-T} * v.
    Matrix apply_inv_t(const Matrix& v) const {
        check_rows(v);
        switch (kind_) {
            case Kind::Identity: return v;
            case Kind::Scalar:   return v / scale_;
            case Kind::Diagonal: return diag_.cwiseInverse().asDiagonal() * v;
            case Kind::Dense:    return dense_->lu_t.solve(v);
        }
        return {};
    }

private:
    struct DenseData {
        Matrix theta;
        Eigen::PartialPivLU<Matrix> lu;
        Eigen::PartialPivLU<Matrix> lu_t;
    };

    void check_rows(const Matrix& v) const {
        require(static_cast<int>(v.rows()) == n_, "metric: dimension mismatch");
    }

    Kind kind_ = Kind::Identity;
    int n_ = 0;
    double scale_ = 1.0;
    Vector diag_;
    std::shared_ptr<DenseData> dense_;
};

}  // namespace wavepmp
