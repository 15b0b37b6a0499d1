#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wavepmp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr double kSqrt2 = 1.4142135623730951;
inline constexpr double kInvSqrt2 = 0.7071067811865476;

/// Run aborted because the loss grew past the divergence guard.
struct DivergenceError : std::runtime_error {
    long step;
    DivergenceError(long step_, const std::string& what)
        : std::runtime_error(what), step(step_) {}
};

/// Run aborted because the wave energy blew up or a value went nonfinite.
struct InstabilityError : std::runtime_error {
    long step;
    InstabilityError(long step_, const std::string& what)
        : std::runtime_error(what), step(step_) {}
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CheckpointError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline bool all_finite(const Matrix& m) { return m.allFinite(); }

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

}  // namespace wavepmp
