#include "pbetc/plant.hpp"

namespace pbetc {

PlantState initial_state(const PlantConfig& plant) {
    return PlantState{0.0, plant.u0, 0.0, 0.0, plant.u0};
}

ImplicitEulerStepper::ImplicitEulerStepper(const PlantConfig& plant, double dt)
    : dt_(dt), dirichlet_(!plant.neumann()), boundary_gain_(0.0) {
    if (!(dt > 0.0)) throw Error(ErrorCode::ValidationError, "dt > 0");
    const Index n = plant.grid().size();
    const double dx = plant.grid().dx();
    const double r = plant.epsilon * dt / (dx * dx);
    const auto& lam = plant.lambda.values();

    lower_ = Eigen::VectorXd::Constant(n, -r);
    upper_ = Eigen::VectorXd::Constant(n, -r);
    diag_ = (1.0 + 2.0 * r) - dt * lam.array();

    if (dirichlet_) {
        diag_(0) = 1.0;
        upper_(0) = 0.0;
    } else {
        upper_(0) = -2.0 * r;
    }
    lower_(n - 1) = -2.0 * r;
    diag_(n - 1) += 2.0 * r * dx * plant.q;
    boundary_gain_ = 2.0 * plant.epsilon * dt / dx;
}

Eigen::VectorXd ImplicitEulerStepper::advance(const Eigen::VectorXd& u, double boundary) const {
    Eigen::VectorXd rhs = u;
    if (dirichlet_) rhs(0) = 0.0;
    rhs(rhs.size() - 1) += boundary_gain_ * boundary;
    try {
        return solve_tridiagonal<double>(lower_, diag_, upper_, rhs);
    } catch (const Error& e) {
        throw Error(ErrorCode::SolverFailure, e.what());
    }
}

PlantState step(const PlantState& state, const PlantConfig& plant, double dt, double disturbance) {
    require_same_grid(state.u.grid(), plant.grid(), "plant step");
    const ImplicitEulerStepper stepper(plant, dt);
    PlantState next = state;
    next.u = SpatialProfile(plant.grid(), stepper.advance(state.u.values(), state.U_hold + disturbance));
    next.t = state.t + dt;
    return next;
}

double sample_control(const GainProfile& gain, const SpatialProfile& u) {
    require_same_grid(gain.grid(), u.grid(), "sample_control");
    return trapezoid(gain.k.values().cwiseProduct(u.values()), u.grid().dx());
}

double input_holding_error(const GainProfile& gain, const SpatialProfile& u_now, const SpatialProfile& u_at_event) {
    return sample_control(gain, u_at_event) - sample_control(gain, u_now);
}

}  // namespace pbetc
