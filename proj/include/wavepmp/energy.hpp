#pragma once

#include "wavepmp/common.hpp"
#include "wavepmp/grid.hpp"
#include "wavepmp/waves.hpp"

#include <vector>

namespace wavepmp {

/// V = (dt/2) sum_k (||w_{+,k}||^2 + ||w_{-,k}||^2), summed over batch.
/// Uniform (midpoint) quadrature weights on the depth grid.
inline double wave_energy(const WaveField& field, double dt) {
    double v = 0.0;
    for (int k = 0; k < field.nodes(); ++k)
        v += field.plus[k].squaredNorm() + field.minus[k].squaredNorm();
    return 0.5 * dt * v;
}

/// One-step audit of the balance identity
///   dV/dtau = (c/2)(||w+(0)||^2 - ||w-(0)||^2)
///           + (c/2)(||w-(T)||^2 - ||w+(T)||^2)
///           - c * integral(w+.E+ + w-.E-) dt.
/// dV_measured uses the forward difference matching the forward-Euler solver;
/// flux and work terms are evaluated on the step-n field. The defect is
/// reported as-is and shrinks at O(dtau + dt) on smooth fields.
struct EnergyReport {
    double V_n = 0.0;
    double V_n1 = 0.0;
    double dV_measured = 0.0;
    double boundary_flux_in = 0.0;
    double boundary_flux_out = 0.0;
    double source_work = 0.0;
    double dV_predicted = 0.0;
    double defect = 0.0;
};

inline EnergyReport energy_balance_report(const WaveField& field_n,
                                          const WaveField& field_n1,
                                          const std::vector<Matrix>& e_plus,
                                          const std::vector<Matrix>& e_minus,
                                          const GridConfig& grid) {
    require(field_n.nodes() == field_n1.nodes(), "energy: field size mismatch");
    require(static_cast<int>(e_plus.size()) == field_n.nodes() &&
                static_cast<int>(e_minus.size()) == field_n.nodes(),
            "energy: source size mismatch");
    EnergyReport r;
    r.V_n = wave_energy(field_n, grid.dt);
    r.V_n1 = wave_energy(field_n1, grid.dt);
    r.dV_measured = (r.V_n1 - r.V_n) / grid.dtau;
    const double c = grid.c;
    r.boundary_flux_in = 0.5 * c * (field_n.plus.front().squaredNorm() -
                                    field_n.minus.front().squaredNorm());
    r.boundary_flux_out = 0.5 * c * (field_n.minus.back().squaredNorm() -
                                     field_n.plus.back().squaredNorm());
    double work = 0.0;
    for (int k = 0; k < field_n.nodes(); ++k)
        work += field_n.plus[k].cwiseProduct(e_plus[k]).sum() +
                field_n.minus[k].cwiseProduct(e_minus[k]).sum();
    r.source_work = c * grid.dt * work;
    r.dV_predicted = r.boundary_flux_in + r.boundary_flux_out - r.source_work;
    r.defect = std::abs(r.dV_measured - r.dV_predicted);
    return r;
}

/// Append-only time series of energy and port diagnostics for a run.
class PassivityMonitor {
public:
    struct Sample {
        long step = 0;
        double energy = 0.0;
        double input_margin = 0.0;
        double terminal_margin = 0.0;
        double source_work = 0.0;
    };

    void record(Sample s) { history_.push_back(s); }
    const std::vector<Sample>& history() const { return history_; }

    bool energy_nonincreasing(double tol = 1e-12) const {
        for (std::size_t i = 1; i < history_.size(); ++i)
            if (history_[i].energy > history_[i - 1].energy + tol) return false;
        return true;
    }

    /// max_n V_n / V_0 (growth witness; 0 when empty or V_0 == 0).
    double max_growth() const {
        if (history_.empty() || history_.front().energy <= 0.0) return 0.0;
        double m = 0.0;
        for (const auto& s : history_) m = std::max(m, s.energy);
        return m / history_.front().energy;
    }

private:
    std::vector<Sample> history_;
};

}  // namespace wavepmp
