#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles/bessel_kernel.hpp"
#include "oracles/quadrature.hpp"
#include "pbetc/kernels.hpp"
#include "support.hpp"

using namespace pbetc;

namespace {

PlantConfig plant_with_lambda(const SpatialProfile& lambda, double q, int theta1 = 1) {
    auto p = fixture::reference_plant(lambda.size());
    p.lambda = lambda;
    p.q = q;
    p.theta1 = theta1;
    p.theta2 = 1 - theta1;
    return p;
}

KernelField solve_on_plant_grid(const PlantConfig& plant, KernelKind kind, Index refinement = 6) {
    return restrict_kernel(solve_kernel(plant, plant.grid().refined(refinement), kind), plant.grid());
}

double max_error_vs(const KernelField& field, double lbar, bool inverse, bool neumann) {
    double err = 0.0;
    const Grid& g = field.grid();
    for (Index i = 0; i < g.size(); ++i)
        for (Index j = 0; j <= i; ++j) {
            const double ref = inverse ? oracle::inverse_kernel(g.node(i), g.node(j), lbar, neumann)
                                       : oracle::forward_kernel(g.node(i), g.node(j), lbar, neumann);
            err = std::max(err, std::abs(field(i, j) - ref));
        }
    return err;
}

}  // namespace

TEST_CASE("zero reaction gives zero kernels and zero gain") {
    const auto plant = plant_with_lambda(SpatialProfile::constant(Grid(101), 0.0), 2.0);
    const auto K = solve_kernel_forward(plant, plant.grid());
    const auto L = solve_kernel_inverse(plant, plant.grid());
    CHECK(K.max_abs() == 0.0);
    CHECK(L.max_abs() == 0.0);
    const auto gain = gain_profile(K, gain_offset(plant), plant);
    CHECK(gain.k.values().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("constant reaction matches the Bessel series (Neumann)") {
    const auto plant = fixture::reference_plant();
    const double lbar = 0.25 / 0.1;
    const auto K = solve_on_plant_grid(plant, KernelKind::Forward);
    const auto L = solve_on_plant_grid(plant, KernelKind::Inverse);
    CHECK(max_error_vs(K, lbar, false, true) <= 1e-6);
    CHECK(max_error_vs(L, lbar, true, true) <= 1e-6);
}

TEST_CASE("constant reaction matches the Bessel series (Dirichlet)") {
    const auto plant = plant_with_lambda(SpatialProfile::constant(Grid(201), 0.25), 2.0, 0);
    const double lbar = 0.25 / 0.1;
    CHECK(max_error_vs(solve_on_plant_grid(plant, KernelKind::Forward), lbar, false, false) <= 1e-6);
    CHECK(max_error_vs(solve_on_plant_grid(plant, KernelKind::Inverse), lbar, true, false) <= 1e-6);
}

TEST_CASE("discretization error shrinks under refinement") {
    const auto plant = fixture::reference_plant(51);
    const double lbar = 2.5;
    const double e1 = max_error_vs(solve_on_plant_grid(plant, KernelKind::Forward, 1), lbar, false, true);
    const double e2 = max_error_vs(solve_on_plant_grid(plant, KernelKind::Forward, 2), lbar, false, true);
    CHECK(e2 < e1);
    CHECK(e1 / e2 > 3.0);
}

TEST_CASE("spatially varying reaction satisfies the kernel equations") {
    const Grid g(201);
    const auto lambda = SpatialProfile::sample(g, [](double x) { return 0.25 * (1.0 + x); });
    const auto plant = plant_with_lambda(lambda, 4.0);
    // Checked on the grid the solver actually marched on.
    for (auto kind : {KernelKind::Forward, KernelKind::Inverse}) {
        const auto field = solve_kernel(plant, g.refined(6), kind);
        const auto r = kernel_residual(field, plant, kind);
        CAPTURE(static_cast<int>(kind));
        CHECK(r.pde <= 1e-6 * (1.0 + field.max_abs()));
        CHECK(r.diagonal <= 1e-8);
        CHECK(r.boundary <= 1e-6 * (1.0 + field.max_abs()));
    }
}

TEST_CASE("diagonal values equal the closed form") {
    const auto plant = fixture::reference_plant();
    const auto K = solve_on_plant_grid(plant, KernelKind::Forward);
    const auto L = solve_on_plant_grid(plant, KernelKind::Inverse);
    for (Index i = 0; i < plant.grid().size(); ++i) {
        const double x = plant.grid().node(i);
        CHECK(std::abs(K(i, i) + 0.25 * x / 0.2) <= 1e-12);
        CHECK(std::abs(L(i, i) + 0.25 * x / 0.2) <= 1e-12);
    }
}

TEST_CASE("forward and inverse transforms are mutually inverse") {
    auto plant = fixture::reference_plant();
    SUBCASE("constant reaction") {}
    SUBCASE("affine reaction") {
        plant = plant_with_lambda(SpatialProfile::sample(plant.grid(), [](double x) { return 0.25 * (1.0 + x); }), 4.0);
    }
    const auto K = solve_on_plant_grid(plant, KernelKind::Forward);
    const auto L = solve_on_plant_grid(plant, KernelKind::Inverse);
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 20; ++trial) {
        const auto u = fixture::random_profile(plant.grid(), rng, 6);
        const double nu = l2_norm(u);
        const auto back = inverse_transform(forward_transform(u, K), L);
        const auto fwd = forward_transform(inverse_transform(u, L), K);
        CHECK(l2_norm(SpatialProfile(u.grid(), back.values() - u.values())) <= 1e-6 * nu);
        CHECK(l2_norm(SpatialProfile(u.grid(), fwd.values() - u.values())) <= 1e-6 * nu);
    }
}

TEST_CASE("transform edge cases") {
    const auto plant = fixture::reference_plant();
    const KernelField zero(plant.grid(), Eigen::MatrixXd::Zero(201, 201));
    CHECK(forward_transform(plant.u0, zero) == plant.u0);
    const auto K = solve_on_plant_grid(plant, KernelKind::Forward);
    const auto u_zero = SpatialProfile::constant(plant.grid(), 0.0);
    CHECK(forward_transform(u_zero, K).values().cwiseAbs().maxCoeff() == 0.0);
    CHECK_THROWS_AS(forward_transform(SpatialProfile::constant(Grid(101), 1.0), K), Error);
}

TEST_CASE("transformed norm agrees with the dense-matrix oracle") {
    const auto plant = fixture::reference_plant();
    const auto K = solve_on_plant_grid(plant, KernelKind::Forward);
    const auto L = solve_on_plant_grid(plant, KernelKind::Inverse);
    const double dx = plant.grid().dx();
    const Eigen::MatrixXd A = oracle::dense_volterra(K.values(), dx, -1.0);
    const double w_ref = oracle::l2_norm_loop(A * plant.u0.values(), dx);
    CHECK(std::abs(l2_norm(forward_transform(plant.u0, K)) - w_ref) <= 1e-6);
    CHECK((volterra_matrix(K, -1.0) - A).cwiseAbs().maxCoeff() <= 1e-15);
    const Eigen::MatrixXd Ainv = oracle::dense_volterra(L.values(), dx, +1.0);
    CHECK((inverse_transform(plant.u0, L).values() - Ainv * plant.u0.values()).cwiseAbs().maxCoeff() <= 1e-13);
}

TEST_CASE("triangle integrals agree with the masked-square oracle") {
    const auto plant = fixture::reference_plant();
    const auto K = solve_on_plant_grid(plant, KernelKind::Forward);
    CHECK(std::abs(K.triangle_integral_sq() - oracle::triangle_sq(K.values(), plant.grid().dx())) <= 1e-13);
    std::vector<double> last(201);
    for (Index j = 0; j < 201; ++j) last[static_cast<std::size_t>(j)] = K(200, j) * K(200, j);
    CHECK(std::abs(K.last_row_integral_sq() - oracle::trapezoid_loop(last, plant.grid().dx())) <= 1e-13);
}

TEST_CASE("gain agrees with the differentiated series") {
    const auto plant = fixture::reference_plant();
    const double wp = gain_offset(plant);
    CHECK(wp == doctest::Approx(2.0 - 0.25 / 0.2));
    const auto fine = plant.grid().refined(6);
    const auto gain = restrict_gain(gain_profile(solve_kernel_forward(plant, fine), wp, plant), plant.grid());
    const double lbar = 2.5, hstep = 1e-5;
    double err = 0.0;
    for (Index j = 0; j < 201; ++j) {
        const double y = plant.grid().node(j);
        const double kx = (oracle::forward_kernel(1.0 + hstep, y, lbar) - oracle::forward_kernel(1.0 - hstep, y, lbar)) /
                          (2.0 * hstep);
        err = std::max(err, std::abs(gain.k[j] - (wp * oracle::forward_kernel(1.0, y, lbar) + kx)));
    }
    CHECK(err <= 1e-4);
    CHECK(gain.k_at_1 == doctest::Approx(gain.k.back()));
}

TEST_CASE("gain magnitude grows with the reaction strength") {
    double previous = -1.0;
    for (double lam : {0.0, 0.0625, 0.125, 0.25}) {
        const auto plant = plant_with_lambda(SpatialProfile::constant(Grid(101), lam), 2.0);
        const auto gain = gain_profile(solve_kernel_forward(plant, plant.grid().refined(2)), gain_offset(plant), plant);
        const double norm = l2_norm(gain.k);
        if (lam == 0.0) CHECK(norm == 0.0);
        CHECK(norm > previous);
        previous = norm;
    }
}

TEST_CASE("gain offset requires the stabilizability bound") {
    auto plant = fixture::reference_plant();
    plant.q = 1.0;  // bound is 0.25/0.2 + 0.5 = 1.75
    CHECK_FALSE(plant.assumption_holds());
    try {
        gain_offset(plant);
        FAIL("expected AssumptionViolated");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::AssumptionViolated);
    }
    const auto heat = plant_with_lambda(SpatialProfile::constant(Grid(11), 0.0), 1.0);
    CHECK(gain_offset(heat) == 1.0);
}
