#pragma once

#include "pbetc/numerics.hpp"

namespace pbetc {

/// Reaction-diffusion plant u_t = eps u_xx + lambda(x) u on [0,1] with
/// theta1 u_x(0) = -theta2 u(0) and u_x(1) + q u(1) = U.
struct PlantConfig {
    double epsilon;
    SpatialProfile lambda;
    double q;
    int theta1;
    int theta2;
    SpatialProfile u0;

    const Grid& grid() const noexcept { return lambda.grid(); }
    double lambda_max() const { return lambda.max(); }
    bool neumann() const noexcept { return theta1 == 1; }

    /// Lower bound on q for stabilizability of the target system.
    double q_lower_bound() const { return lambda_max() / (2.0 * epsilon) + 0.5 * theta1; }
    bool assumption_holds() const { return q > q_lower_bound(); }

    /// Structural checks only (positivity, boundary flags, grids). The bound
    /// on q is checked where it matters, in gain_offset.
    void validate() const;

    bool operator==(const PlantConfig&) const = default;
};

enum class KernelKind { Forward, Inverse };

/// Samples of a Goursat kernel on {0 <= y <= x <= 1}. Entry (i,j) is the value at
/// (x_i, y_j); only j <= i is meaningful and the strict upper triangle is zero.
class KernelField {
public:
    KernelField(Grid grid, Eigen::MatrixXd values);

    const Grid& grid() const noexcept { return grid_; }
    const Eigen::MatrixXd& values() const noexcept { return values_; }
    double operator()(Index i, Index j) const { return values_(i, j); }
    double max_abs() const { return values_.cwiseAbs().maxCoeff(); }

    /// Trapezoid value of the double integral of K^2 over the triangle.
    double triangle_integral_sq() const;
    /// Trapezoid value of the integral of K(1,y)^2 over y.
    double last_row_integral_sq() const;

private:
    Grid grid_;
    Eigen::MatrixXd values_;
};

struct GainProfile {
    SpatialProfile k;
    double k_at_1;
    double kprime_at_1;
    SpatialProfile kpp;

    const Grid& grid() const noexcept { return k.grid(); }
};

struct KernelResidual {
    double pde;       ///< centered second differences on the interior of the triangle
    double diagonal;  ///< |K(x,x) + (1/2eps) int_0^x lambda|
    double boundary;  ///< Neumann: one-sided K_y(x,0); Dirichlet: |K(x,0)|
};

/// q - (1/2eps) int lambda. Throws AssumptionViolated when q is too small.
double gain_offset(const PlantConfig& plant);

/// Solve the forward (Forward) or inverse (Inverse) kernel on `grid`, which may
/// be finer than the plant grid; lambda is interpolated piecewise-linearly.
KernelField solve_kernel(const PlantConfig& plant, const Grid& grid, KernelKind kind);
KernelField solve_kernel_forward(const PlantConfig& plant, const Grid& grid);
KernelField solve_kernel_inverse(const PlantConfig& plant, const Grid& grid);

/// Keep only the nodes shared with a coarser nested grid.
KernelField restrict_kernel(const KernelField& field, const Grid& coarse);

KernelResidual kernel_residual(const KernelField& field, const PlantConfig& plant, KernelKind kind);

/// k(y) = wp K(1,y) + K_x(1,y), on the kernel's grid.
GainProfile gain_profile(const KernelField& K, double wp, const PlantConfig& plant);
/// Derived gain quantities (k(1), k'(1), k'') from samples of k.
GainProfile make_gain(SpatialProfile k);
GainProfile restrict_gain(const GainProfile& gain, const Grid& coarse);

SpatialProfile forward_transform(const SpatialProfile& u, const KernelField& K);
SpatialProfile inverse_transform(const SpatialProfile& w, const KernelField& L);

/// Dense lower-triangular matrix I + sign * (K o end-corrected trapezoid weights); applying it
/// reproduces forward_transform (sign = -1) or inverse_transform (sign = +1).
Eigen::MatrixXd volterra_matrix(const KernelField& kernel, double sign);

}  // namespace pbetc
