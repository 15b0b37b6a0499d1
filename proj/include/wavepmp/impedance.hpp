#pragma once

#include "wavepmp/common.hpp"

#include <memory>
#include <string>
#include <utility>

namespace wavepmp {

/// Characteristic impedance of a parameter port. The choice of Z selects the
/// optimizer: resistive (1/eta) I recovers gradient descent, the landscape
/// curvature recovers Newton's method, and the dynamic R + sL termination
/// recovers heavy-ball momentum.
class Impedance {
public:
    enum class Kind { Resistive, Diagonal, Full, Curvature, Inductive };

    /// Z = (1/eta) I, dimension-agnostic.
    static Impedance resistive(double eta) {
        require(eta > 0.0, "impedance: eta must be positive");
        Impedance z;
        z.kind_ = Kind::Resistive;
        z.scale_ = 1.0 / eta;
        return z;
    }

    static Impedance diagonal(const Vector& d) {
        for (Eigen::Index i = 0; i < d.size(); ++i)
            require(d[i] > 0.0, "impedance: diagonal entries must be positive");
        Impedance z;
        z.kind_ = Kind::Diagonal;
        z.diag_ = d;
        return z;
    }

    static Impedance full(const Matrix& Z) { return from_spd(Z, Kind::Full); }

    /// Curvature (Hessian) impedance; the matrix must be SPD on the problems
    /// where it is used. Shares the spectral machinery with Kind::Full.
    static Impedance curvature(const Matrix& H) { return from_spd(H, Kind::Curvature); }

    /// Dynamic termination Z(s) = R + sL; has no static scattering form.
    static Impedance inductive(double R, double L) {
        require(R > 0.0 && L > 0.0, "impedance: R and L must be positive");
        Impedance z;
        z.kind_ = Kind::Inductive;
        z.R_ = R;
        z.L_ = L;
        return z;
    }

    Kind kind() const { return kind_; }
    double resistance() const { return R_; }
    double inductance() const { return L_; }

    bool is_static() const { return kind_ != Kind::Inductive; }

    Vector apply(const Vector& v) const {
        switch (kind_) {
            case Kind::Resistive: return scale_ * v;
            case Kind::Diagonal: return check(v), diag_.cwiseProduct(v);
            case Kind::Full:
            case Kind::Curvature: return check(v), spd_->Z * v;
            case Kind::Inductive: break;
        }
        throw std::invalid_argument("impedance: dynamic termination has no static Z");
    }

    Vector apply_inv(const Vector& v) const {
        switch (kind_) {
            case Kind::Resistive: return v / scale_;
            case Kind::Diagonal: return check(v), v.cwiseQuotient(diag_);
            case Kind::Full:
            case Kind::Curvature:
                return check(v), spd_->U * (spd_->evals.cwiseInverse().asDiagonal() *
                                            (spd_->U.transpose() * v));
            case Kind::Inductive: break;
        }
        throw std::invalid_argument("impedance: dynamic termination has no static Z");
    }

    Vector apply_sqrt(const Vector& v) const { return spectral(v, 0.5); }
    Vector apply_inv_sqrt(const Vector& v) const { return spectral(v, -0.5); }

    std::string name() const {
        switch (kind_) {
            case Kind::Resistive: return "resistive";
            case Kind::Diagonal: return "diagonal";
            case Kind::Full: return "full";
            case Kind::Curvature: return "curvature";
            case Kind::Inductive: return "inductive";
        }
        return "?";
    }

private:
    static Impedance from_spd(const Matrix& Z, Kind kind) {
        require(Z.rows() == Z.cols(), "impedance: matrix must be square");
        require((Z - Z.transpose()).norm() <= 1e-10 * std::max(1.0, Z.norm()),
                "impedance: matrix must be symmetric");
        Impedance z;
        z.kind_ = kind;
        z.spd_ = std::make_shared<SpdData>();
        z.spd_->Z = 0.5 * (Z + Z.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(z.spd_->Z);
        require(es.info() == Eigen::Success, "impedance: eigendecomposition failed");
        z.spd_->U = es.eigenvectors();
        z.spd_->evals = es.eigenvalues();
        require(z.spd_->evals.minCoeff() >= 1e-10,
                "impedance: matrix must be positive definite (eigenvalues >= 1e-10)");
        return z;
    }

    Vector spectral(const Vector& v, double power) const {
        switch (kind_) {
            case Kind::Resistive:
                return std::pow(scale_, power) * v;
            case Kind::Diagonal:
                check(v);
                return diag_.array().pow(power).matrix().cwiseProduct(v);
            case Kind::Full:
            case Kind::Curvature:
                check(v);
                return spd_->U * (spd_->evals.array().pow(power).matrix().asDiagonal() *
                                  (spd_->U.transpose() * v));
            case Kind::Inductive: break;
        }
        throw std::invalid_argument("impedance: dynamic termination has no static Z");
    }

    void check(const Vector& v) const {
        const Eigen::Index n = kind_ == Kind::Diagonal ? diag_.size() : spd_->Z.rows();
        require(v.size() == n, "impedance: dimension mismatch");
    }

    struct SpdData {
        Matrix Z;
        Matrix U;
        Vector evals;
    };

    Kind kind_ = Kind::Resistive;
    double scale_ = 1.0;
    double R_ = 0.0, L_ = 0.0;
    Vector diag_;
    std::shared_ptr<SpdData> spd_;
};

/// Effort/flow pair at a parameter port with its scattering decomposition.
struct PortSignals {
    Vector effort;     ///< e = -grad J
    Vector flow;       ///< parameter velocity
    Vector incident;   ///< a
    Vector reflected;  ///< b
};

/// a = (Z^{-1/2} e + Z^{1/2} f)/sqrt(2), b = (Z^{-1/2} e - Z^{1/2} f)/sqrt(2).
/// Power identity: e.f = (||a||^2 - ||b||^2)/2.
inline std::pair<Vector, Vector> port_scatter(const Vector& effort, const Vector& flow,
                                              const Impedance& Z) {
    require(effort.size() == flow.size(), "port_scatter: dimension mismatch");
    const Vector ze = Z.apply_inv_sqrt(effort);
    const Vector zf = Z.apply_sqrt(flow);
    return {kInvSqrt2 * (ze + zf), kInvSqrt2 * (ze - zf)};
}

/// The zero-reflection flow: theta_dot = -Z^{-1} grad J.
inline Vector matched_flow(const Vector& grad, const Impedance& Z) {
    return -Z.apply_inv(grad);
}

/// ||b||^2 for effort e = -grad (or any given effort) and flow.
inline double reflection_norm_sq(const Vector& effort, const Vector& flow,
                                 const Impedance& Z) {
    return port_scatter(effort, flow, Z).second.squaredNorm();
}

/// theta <- theta - eta * grad (resistive termination, Z = (1/eta) I).
inline Vector step_resistive(const Vector& theta, const Vector& grad, double eta) {
    require(eta >= 0.0, "step_resistive: eta must be nonnegative");
    return theta - eta * grad;
}

/// Semi-implicit Euler for -grad J = R theta_dot + L theta_ddot:
///   v <- v + (dtau/L)(-grad - R v);  theta <- theta + dtau v.
inline std::pair<Vector, Vector> step_inductive(const Vector& theta, const Vector& velocity,
                                                const Vector& grad, double R, double L,
                                                double dtau) {
    require(R > 0.0 && L > 0.0 && dtau > 0.0,
            "step_inductive: R, L and dtau must be positive");
    Vector v = velocity + (dtau / L) * (-grad - R * velocity);
    Vector t = theta + dtau * v;
    return {std::move(t), std::move(v)};
}

/// Newton-type step theta <- theta - eta H^{-1} grad. Falls back to a
/// resistive step (flagged) when H is not usably positive definite.
struct CurvatureStepResult {
    Vector theta_next;
    bool fell_back = false;
};

inline CurvatureStepResult step_curvature(const Vector& theta, const Vector& grad,
                                          const Matrix& hessian, double eta) {
    CurvatureStepResult out;
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (hessian + hessian.transpose()));
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-10) {
        out.theta_next = step_resistive(theta, grad, eta);
        out.fell_back = true;
        return out;
    }
    const Vector d = es.eigenvectors() *
                     (es.eigenvalues().cwiseInverse().asDiagonal() *
                      (es.eigenvectors().transpose() * grad));
    out.theta_next = theta - eta * d;
    return out;
}

}  // namespace wavepmp
