#pragma once

#include <optional>

#include "pbetc/kernels.hpp"
#include "pbetc/trigger_kind.hpp"

namespace pbetc {

/// Free design parameters of the trigger.
struct UserParams {
    double gamma = 1.0;
    double eta = 0.0;
    double c = 0.0;
    double sigma = 0.0;
    double m0 = 0.0;
    double kappa = 0.0;
    std::optional<double> B;  ///< empty selects the smallest admissible B
    double h = 0.0;           ///< PETC sampling period
    bool robust_residual = false;
    TriggerFamily family = TriggerFamily::PerformanceBarrier;
    int kernel_refinement = 6;     ///< kernel solver grid = plant grid refined by this factor
    double stc_cap_factor = 100.0; ///< self-trigger dwell cap as a multiple of tau when H vanishes

    /// Throws ValidationError naming the first violated constraint.
    void validate() const;
    bool operator==(const UserParams&) const = default;
};

struct Alphas {
    double alpha1;
    double alpha2;
};

struct Betas {
    double beta1;
    double beta2;
};

struct DecayRates {
    double b;
    double b_star;
};

struct DwellConstants {
    double a;
    double rho1;
    double tau;
};

struct Tildes {
    double L_tilde;
    double K_tilde;
    double M;
};

struct DerivedParams {
    UserParams user;
    TriggerKind kind;
    double epsilon;
    double lambda_max;
    double wp;
    GainProfile gain;
    KernelField K;  ///< on the plant grid
    KernelField L;  ///< on the plant grid
    double alpha1, alpha2;
    double beta1, beta2;
    double B;
    double margin;
    double rho;
    double rho1;
    double a;
    double tau;
    double L_tilde;
    double K_tilde;
    double L_last_row_sq;  ///< integral of L(1,y)^2
    double k_norm_sq;
    double b;
    double b_star;
    double M;
};

Alphas compute_alphas(const GainProfile& gain, const PlantConfig& plant);
/// Pointwise integrand of alpha1 (before the factor 3 and the integral).
Eigen::VectorXd alpha1_integrand(const GainProfile& gain, const PlantConfig& plant);

Betas compute_betas(const Alphas& alphas, double gamma, double sigma);

/// Coefficient of B in the admissibility inequality.
double b_coefficient(double epsilon, double wp, int theta1, double kappa);
/// Left-hand side of the (B, kappa) admissibility inequality; no throw.
double B_kappa_margin(double B, double kappa, const Betas& betas, double wp, const PlantConfig& plant,
                      const KernelField& L);
/// As B_kappa_margin, but throws InvalidBKappa when the margin is not positive.
double validate_B_kappa(double B, double kappa, const Betas& betas, double wp, const PlantConfig& plant,
                        const KernelField& L);
/// Smallest B whose margin is at least 5% of the B-coefficient term, by bisection.
double auto_B(double kappa, const Betas& betas, double wp, const PlantConfig& plant, const KernelField& L);

double compute_rho(double epsilon, double kappa, double B);
DecayRates compute_b_bstar(double B, const Betas& betas, const KernelField& L, double eta, double epsilon);
DwellConstants compute_a_rho1_tau(const GainProfile& gain, double epsilon, double eta, double gamma,
                                  double rho, double sigma);
/// tau from its closed form, for callers that already have a and rho.
double dwell_tau(double a, double gamma, double rho, double sigma);
Tildes compute_tildes_M(const KernelField& K, const KernelField& L, double B);

/// Full pipeline from plant and user choices to every trigger constant.
DerivedParams derive_all(const PlantConfig& plant, const UserParams& user, TriggerKind kind);

}  // namespace pbetc
