#pragma once

#include "pbetc/kernels.hpp"

namespace pbetc {

struct PlantState {
    double t = 0.0;
    SpatialProfile u;
    double U_hold = 0.0;
    double t_last_event = 0.0;
    SpatialProfile u_at_event;
};

PlantState initial_state(const PlantConfig& plant);

/// Implicit Euler for u_t = eps u_xx + lambda u with the boundary rows folded in
/// by ghost-node elimination. The matrix depends only on dt, so it is assembled
/// once and reused while the input is held.
class ImplicitEulerStepper {
public:
    ImplicitEulerStepper(const PlantConfig& plant, double dt);

    /// One step with Robin data u_x(1) + q u(1) = boundary.
    Eigen::VectorXd advance(const Eigen::VectorXd& u, double boundary) const;

    double dt() const noexcept { return dt_; }

private:
    double dt_;
    bool dirichlet_;
    double boundary_gain_;
    Eigen::VectorXd lower_, diag_, upper_;
};

/// One implicit Euler step with U_hold (plus an optional additive boundary
/// perturbation) held over the step.
PlantState step(const PlantState& state, const PlantConfig& plant, double dt, double disturbance = 0.0);

/// U = int k u.
double sample_control(const GainProfile& gain, const SpatialProfile& u);

/// d = U(u_at_event) - U(u_now).
double input_holding_error(const GainProfile& gain, const SpatialProfile& u_now, const SpatialProfile& u_at_event);

}  // namespace pbetc
