#include "pbetc/kernels.hpp"

#include <cmath>

namespace pbetc {

void PlantConfig::validate() const {
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw Error(ErrorCode::ValidationError, "epsilon > 0");
    if (!(q > 0.0) || !std::isfinite(q)) throw Error(ErrorCode::ValidationError, "q > 0");
    const bool flags_ok = (theta1 == 0 || theta1 == 1) && (theta2 == 0 || theta2 == 1) &&
                          theta1 * theta2 == 0 && theta1 + theta2 == 1;
    if (!flags_ok) throw Error(ErrorCode::ValidationError, "theta1, theta2 in {0,1} with exactly one set");
    if (lambda.values().minCoeff() < 0.0) throw Error(ErrorCode::ValidationError, "lambda >= 0");
    require_same_grid(lambda.grid(), u0.grid(), "lambda and u0");
}

KernelField::KernelField(Grid grid, Eigen::MatrixXd values) : grid_(grid), values_(std::move(values)) {
    if (values_.rows() != grid_.size() || values_.cols() != grid_.size())
        throw Error(ErrorCode::GridMismatch, "kernel matrix does not match grid");
    values_.triangularView<Eigen::StrictlyUpper>().setZero();
}

double KernelField::triangle_integral_sq() const {
    const Index n = grid_.size();
    const double dx = grid_.dx();
    Eigen::VectorXd rows = Eigen::VectorXd::Zero(n);
    for (Index i = 1; i < n; ++i) rows(i) = trapezoid(values_.row(i).head(i + 1).transpose().cwiseAbs2(), dx);
    return trapezoid(rows, dx);
}

double KernelField::last_row_integral_sq() const {
    const Index n = grid_.size();
    return trapezoid(values_.row(n - 1).transpose().cwiseAbs2(), grid_.dx());
}

double gain_offset(const PlantConfig& plant) {
    if (!plant.assumption_holds())
        throw Error(ErrorCode::AssumptionViolated,
                    "q must exceed lambda_max/(2 eps) + theta1/2 = " + std::to_string(plant.q_lower_bound()));
    return plant.q - trapezoid_integral(plant.lambda) / (2.0 * plant.epsilon);
}

KernelField solve_kernel(const PlantConfig& plant, const Grid& grid, KernelKind kind) {
    const Index n = grid.size();
    const Index N = n - 1;
    const Index P = 2 * N;
    const double delta = grid.dx();
    const double c = delta * delta / 16.0;
    const double sign = kind == KernelKind::Forward ? 1.0 : -1.0;

    // Characteristic lattice: xi = p*delta, eta = q*delta, so x = (p+q)*delta/2
    // and y = (p-q)*delta/2. Half-node tables are indexed by 2y/delta or 2x/delta.
    // The forward kernel carries lambda(y); the inverse carries lambda(x), which
    // is what makes the two Volterra maps inverse to each other for varying lambda.
    Eigen::VectorXd lam(P + 1), diag(P + 1);
    for (Index m = 0; m <= P; ++m) {
        const double s = 0.5 * static_cast<double>(m) * delta;
        lam(m) = sign * interpolate_linear(plant.lambda, s) / plant.epsilon;
        diag(m) = -cumulative_integral(plant.lambda, s) / (2.0 * plant.epsilon);
    }
    const bool at_x = kind == KernelKind::Inverse;
    auto at = [at_x](Index p, Index q) { return at_x ? p + q : p - q; };

    Eigen::MatrixXd G = Eigen::MatrixXd::Zero(P + 1, N + 1);
    G.col(0) = diag;

    auto cell = [&](double a, Index ma, double b, Index mb, double o, Index mo, Index mnew) {
        return (a + b - o + c * (lam(ma) * a + lam(mb) * b + lam(mo) * o)) / (1.0 - c * lam(mnew));
    };

    for (Index q = 0; q < N; ++q) {
        const Index q1 = q + 1;
        if (plant.neumann()) {
            // Even reflection across y = 0: G(q, q+1) mirrors G(q+1, q).
            const double a = G(q1, q);
            const Index ma = at_x ? 2 * q + 1 : 1;
            G(q1, q1) = cell(a, ma, a, ma, G(q, q), at(q, q), at(q1, q1));
        } else {
            G(q1, q1) = 0.0;
        }
        for (Index p = q1 + 1; p <= P - q1; ++p) {
            G(p, q1) = cell(G(p, q), at(p, q), G(p - 1, q1), at(p - 1, q1), G(p - 1, q), at(p - 1, q), at(p, q1));
        }
    }
    if (!G.allFinite() || c * lam.maxCoeff() >= 1.0)
        throw Error(ErrorCode::NoConvergence, "kernel march produced non-finite values");

    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j) K(i, j) = G(i + j, i - j);
    return KernelField(grid, std::move(K));
}

KernelField solve_kernel_forward(const PlantConfig& plant, const Grid& grid) {
    return solve_kernel(plant, grid, KernelKind::Forward);
}

KernelField solve_kernel_inverse(const PlantConfig& plant, const Grid& grid) {
    return solve_kernel(plant, grid, KernelKind::Inverse);
}

KernelField restrict_kernel(const KernelField& field, const Grid& coarse) {
    const Index r = coarse.refinement_to(field.grid());
    if (r == 0) throw Error(ErrorCode::GridMismatch, "kernel grid does not refine the target grid");
    const Index n = coarse.size();
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j <= i; ++j) K(i, j) = field(i * r, j * r);
    return KernelField(coarse, std::move(K));
}

KernelResidual kernel_residual(const KernelField& field, const PlantConfig& plant, KernelKind kind) {
    const Grid& g = field.grid();
    const Index n = g.size();
    const double dx = g.dx();
    const double sign = kind == KernelKind::Forward ? 1.0 : -1.0;
    const auto& K = field.values();

    KernelResidual r{0.0, 0.0, 0.0};
    for (Index j = 1; j + 1 < n; ++j) {
        for (Index i = j + 1; i + 1 < n; ++i) {
            const double node = kind == KernelKind::Forward ? g.node(j) : g.node(i);
            const double s = sign * interpolate_linear(plant.lambda, node) / plant.epsilon;
            const double lap = (K(i + 1, j) + K(i - 1, j) - K(i, j + 1) - K(i, j - 1)) / (dx * dx);
            r.pde = std::max(r.pde, std::abs(lap - s * K(i, j)));
        }
    }
    for (Index i = 0; i < n; ++i) {
        const double target = -cumulative_integral(plant.lambda, g.node(i)) / (2.0 * plant.epsilon);
        r.diagonal = std::max(r.diagonal, std::abs(K(i, i) - target));
    }
    for (Index i = 2; i < n; ++i) {
        const double b = plant.neumann() ? (-3.0 * K(i, 0) + 4.0 * K(i, 1) - K(i, 2)) / (2.0 * dx) : K(i, 0);
        r.boundary = std::max(r.boundary, std::abs(b));
    }
    return r;
}

GainProfile make_gain(SpatialProfile k) {
    const Index n = k.size();
    const double dx = k.grid().dx();
    const auto& v = k.values();
    const double k1 = v(n - 1);
    const double kp1 = (3.0 * v(n - 1) - 4.0 * v(n - 2) + v(n - 3)) / (2.0 * dx);
    SpatialProfile kpp = central_derivative(k, 2);
    return GainProfile{std::move(k), k1, kp1, std::move(kpp)};
}

GainProfile gain_profile(const KernelField& K, double wp, const PlantConfig& plant) {
    const Grid& g = K.grid();
    const Index n = g.size();
    const Index N = n - 1;
    if (n < 5) throw Error(ErrorCode::InvalidGrid, "gain_profile needs at least 5 nodes");
    const double s = 1.0 / (2.0 * g.dx());

    Eigen::VectorXd Kx(n);
    for (Index j = 0; j + 2 <= N; ++j) Kx(j) = (3.0 * K(N, j) - 4.0 * K(N - 1, j) + K(N - 2, j)) * s;
    // The stencil in x leaves the triangle for the last two columns; use the
    // known diagonal slope at y = 1 and a diagonal-direction stencil at y = 1 - dx.
    const double Ky_corner = (3.0 * K(N, N) - 4.0 * K(N, N - 1) + K(N, N - 2)) * s;
    Kx(N) = -interpolate_linear(plant.lambda, 1.0) / (2.0 * plant.epsilon) - Ky_corner;
    const double along_diag = (3.0 * K(N, N - 1) - 4.0 * K(N - 1, N - 2) + K(N - 2, N - 3)) * s;
    const double Ky = (K(N, N) - K(N, N - 2)) * s;
    Kx(N - 1) = along_diag - Ky;

    Eigen::VectorXd k = wp * K.values().row(N).transpose() + Kx;
    return make_gain(SpatialProfile(g, std::move(k)));
}

GainProfile restrict_gain(const GainProfile& gain, const Grid& coarse) {
    const Index r = coarse.refinement_to(gain.grid());
    if (r == 0) throw Error(ErrorCode::GridMismatch, "gain grid does not refine the target grid");
    Eigen::VectorXd k(coarse.size());
    for (Index i = 0; i < coarse.size(); ++i) k(i) = gain.k[i * r];
    return make_gain(SpatialProfile(coarse, std::move(k)));
}

namespace {

SpatialProfile volterra_apply(const SpatialProfile& v, const KernelField& kernel, double sign) {
    require_same_grid(v.grid(), kernel.grid(), "transform");
    const Index n = v.size();
    const double dx = v.grid().dx();
    const auto& x = v.values();
    const auto& K = kernel.values();
    Eigen::VectorXd out = x;
    for (Index i = 1; i < n; ++i) {
        const Eigen::VectorXd w = gregory_weights<double>(i + 1, dx);
        out(i) += sign * K.row(i).head(i + 1).dot(w.cwiseProduct(x.head(i + 1)));
    }
    return SpatialProfile(v.grid(), std::move(out));
}

}  // namespace

SpatialProfile forward_transform(const SpatialProfile& u, const KernelField& K) {
    return volterra_apply(u, K, -1.0);
}

SpatialProfile inverse_transform(const SpatialProfile& w, const KernelField& L) {
    return volterra_apply(w, L, 1.0);
}

Eigen::MatrixXd volterra_matrix(const KernelField& kernel, double sign) {
    const Index n = kernel.grid().size();
    const double dx = kernel.grid().dx();
    Eigen::MatrixXd T = Eigen::MatrixXd::Identity(n, n);
    for (Index i = 1; i < n; ++i) {
        const Eigen::VectorXd w = gregory_weights<double>(i + 1, dx);
        for (Index j = 0; j <= i; ++j) T(i, j) += sign * w(j) * kernel(i, j);
    }
    return T;
}

}  // namespace pbetc
