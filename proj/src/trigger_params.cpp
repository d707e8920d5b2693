#include "pbetc/trigger_params.hpp"

#include <algorithm>
#include <cmath>

namespace pbetc {

namespace {

void require(bool ok, const char* what) {
    if (!ok) throw Error(ErrorCode::ValidationError, what);
}

}  // namespace

void UserParams::validate() const {
    require(gamma > 0.0 && std::isfinite(gamma), "gamma > 0");
    require(eta > 0.0 && std::isfinite(eta), "eta > 0");
    require(c >= 0.0 && std::isfinite(c), "c >= 0");
    require(sigma > 0.0 && sigma < 1.0, "sigma in (0,1)");
    require(m0 > 0.0 && std::isfinite(m0), "m0 > 0");
    require(kappa > 0.0 && std::isfinite(kappa), "kappa > 0");
    require(!B || (*B > 0.0 && std::isfinite(*B)), "B > 0");
    require(h >= 0.0 && std::isfinite(h), "h >= 0");
    require(kernel_refinement >= 1, "kernel_refinement >= 1");
    require(stc_cap_factor > 0.0 && std::isfinite(stc_cap_factor), "stc_cap_factor > 0");
}

Eigen::VectorXd alpha1_integrand(const GainProfile& gain, const PlantConfig& plant) {
    require_same_grid(gain.grid(), plant.grid(), "alpha1 integrand");
    const double eps = plant.epsilon;
    return eps * gain.kpp.values() + (eps * gain.k_at_1) * gain.k.values() +
           plant.lambda.values().cwiseProduct(gain.k.values());
}

Alphas compute_alphas(const GainProfile& gain, const PlantConfig& plant) {
    const Eigen::VectorXd f = alpha1_integrand(gain, plant);
    const double alpha1 = 3.0 * trapezoid(f.cwiseAbs2(), plant.grid().dx());
    const double s = plant.epsilon * plant.q * gain.k_at_1 + plant.epsilon * gain.kprime_at_1;
    return {alpha1, 3.0 * s * s};
}

Betas compute_betas(const Alphas& alphas, double gamma, double sigma) {
    if (!(sigma > 0.0 && sigma < 1.0)) throw Error(ErrorCode::BadSigma, "sigma must lie in (0,1)");
    const double d = gamma * (1.0 - sigma);
    return {alphas.alpha1 / d, alphas.alpha2 / d};
}

double b_coefficient(double epsilon, double wp, int theta1, double kappa) {
    return epsilon * std::min(wp - 0.5 * theta1, 0.5) - epsilon / (2.0 * kappa);
}

double B_kappa_margin(double B, double kappa, const Betas& betas, double wp, const PlantConfig& plant,
                      const KernelField& L) {
    const double Lt = 1.0 + std::sqrt(L.triangle_integral_sq());
    return B * b_coefficient(plant.epsilon, wp, plant.theta1, kappa) - 2.0 * betas.beta1 * Lt * Lt -
           2.0 * betas.beta2 - 4.0 * betas.beta2 * L.last_row_integral_sq();
}

double validate_B_kappa(double B, double kappa, const Betas& betas, double wp, const PlantConfig& plant,
                        const KernelField& L) {
    const double margin = B_kappa_margin(B, kappa, betas, wp, plant, L);
    if (!(margin > 0.0))
        throw Error(ErrorCode::InvalidBKappa, "B/kappa inequality fails, margin = " + std::to_string(margin));
    return margin;
}

double auto_B(double kappa, const Betas& betas, double wp, const PlantConfig& plant, const KernelField& L) {
    const double coef = b_coefficient(plant.epsilon, wp, plant.theta1, kappa);
    if (!(coef > 0.0))
        throw Error(ErrorCode::InvalidBKappa, "no B works: the B coefficient is not positive for this kappa");
    auto ok = [&](double B) { return B_kappa_margin(B, kappa, betas, wp, plant, L) >= 0.05 * B * coef; };
    double lo = 0.0;
    double hi = 1.0;
    while (!ok(hi)) {
        lo = hi;
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        (ok(mid) ? hi : lo) = mid;
    }
    return hi;
}

double compute_rho(double epsilon, double kappa, double B) { return 0.5 * epsilon * kappa * B; }

DecayRates compute_b_bstar(double B, const Betas& betas, const KernelField& L, double eta, double epsilon) {
    const double Lt = 1.0 + std::sqrt(L.triangle_integral_sq());
    const double b = epsilon * B / 4.0 - betas.beta1 * Lt * Lt - 2.0 * betas.beta2 * L.last_row_integral_sq();
    if (!(b > 0.0)) throw Error(ErrorCode::NonPositiveB, "b = " + std::to_string(b));
    return {b, std::min(2.0 * b / B, eta)};
}

double dwell_tau(double a, double gamma, double rho, double sigma) {
    return std::log1p(sigma * a / ((1.0 - sigma) * (a + gamma * rho))) / a;
}

DwellConstants compute_a_rho1_tau(const GainProfile& gain, double epsilon, double eta, double gamma,
                                  double rho, double sigma) {
    const double rho1 = 3.0 * epsilon * epsilon * gain.k_at_1 * gain.k_at_1;
    const double a = 1.0 + rho1 + eta;
    return {a, rho1, dwell_tau(a, gamma, rho, sigma)};
}

Tildes compute_tildes_M(const KernelField& K, const KernelField& L, double B) {
    const double Lt = 1.0 + std::sqrt(L.triangle_integral_sq());
    const double Kt = 1.0 + std::sqrt(K.triangle_integral_sq());
    const double M = std::sqrt((2.0 * Lt * Lt / B) * std::max(B * Kt * Kt / 2.0, 1.0));
    return {Lt, Kt, M};
}

DerivedParams derive_all(const PlantConfig& plant, const UserParams& user, TriggerKind kind) {
    user.validate();
    plant.validate();
    if (kind == TriggerKind::PETC && !(user.h > 0.0))
        throw Error(ErrorCode::ValidationError, "h > 0 for PETC");
    if (kind == TriggerKind::STC && !(plant.lambda_max() > 0.0))
        throw Error(ErrorCode::LambdaZero, "self-triggering needs lambda_max > 0");

    const double wp = gain_offset(plant);
    const Grid& grid = plant.grid();
    const Grid fine = grid.refined(user.kernel_refinement);
    const KernelField K_fine = solve_kernel_forward(plant, fine);
    const KernelField L_fine = solve_kernel_inverse(plant, fine);
    GainProfile gain = restrict_gain(gain_profile(K_fine, wp, plant), grid);
    KernelField K = restrict_kernel(K_fine, grid);
    KernelField L = restrict_kernel(L_fine, grid);

    const Alphas alphas = compute_alphas(gain, plant);
    const Betas betas = compute_betas(alphas, user.gamma, user.sigma);
    const double B = user.B ? *user.B : auto_B(user.kappa, betas, wp, plant, L);
    const double margin = validate_B_kappa(B, user.kappa, betas, wp, plant, L);
    const double rho = compute_rho(plant.epsilon, user.kappa, B);
    const DecayRates rates = compute_b_bstar(B, betas, L, user.eta, plant.epsilon);
    const DwellConstants dwell = compute_a_rho1_tau(gain, plant.epsilon, user.eta, user.gamma, rho, user.sigma);
    const Tildes tildes = compute_tildes_M(K, L, B);

    if (kind == TriggerKind::PETC && user.h > dwell.tau)
        throw Error(ErrorCode::HTooLarge,
                    "h = " + std::to_string(user.h) + " exceeds tau = " + std::to_string(dwell.tau));
    if (kind != TriggerKind::CETC && user.eta > 2.0 * rates.b / B)
        throw Error(ErrorCode::EtaTooLarge,
                    "eta = " + std::to_string(user.eta) + " exceeds 2b/B = " + std::to_string(2.0 * rates.b / B));

    const double k_norm_sq = l2_norm_sq(gain.k);
    const double L_last = L.last_row_integral_sq();
    return DerivedParams{
        .user = user,
        .kind = kind,
        .epsilon = plant.epsilon,
        .lambda_max = plant.lambda_max(),
        .wp = wp,
        .gain = std::move(gain),
        .K = std::move(K),
        .L = std::move(L),
        .alpha1 = alphas.alpha1,
        .alpha2 = alphas.alpha2,
        .beta1 = betas.beta1,
        .beta2 = betas.beta2,
        .B = B,
        .margin = margin,
        .rho = rho,
        .rho1 = dwell.rho1,
        .a = dwell.a,
        .tau = dwell.tau,
        .L_tilde = tildes.L_tilde,
        .K_tilde = tildes.K_tilde,
        .L_last_row_sq = L_last,
        .k_norm_sq = k_norm_sq,
        .b = rates.b,
        .b_star = rates.b_star,
        .M = tildes.M,
    };
}

}  // namespace pbetc
