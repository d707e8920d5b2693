#pragma once

#include <cstdint>
#include <memory>

#include "pbetc/trigger_params.hpp"

namespace pbetc {

/// V = (B/2)|w|^2 + m.
double lyapunov_V(double w_norm_sq, double m, double B);

/// W = exp(-b* t) V0 - V, or max{0, W} when robust.
double residual_W(double t, double V, double V0, double b_star, bool robust);

/// Right-hand side of the dynamic variable m. The regular family has no W term.
double m_rhs(double m, double d, double u_norm_sq, double u1_sq, double W, const DerivedParams& p);

/// Explicit Euler step of m. Throws NonPositiveM if the result is not positive.
double step_m(double m, double d, double u_norm_sq, double u1_sq, double W, const DerivedParams& p, double dt);

/// Integrating-factor step with the forcing frozen over dt; a cross-check for step_m.
double step_m_exponential(double m, double d, double u_norm_sq, double u1_sq, double W, const DerivedParams& p,
                          double dt);

struct TriggerEval {
    double value;
    bool fire;
};

/// Continuous trigger function d^2 - gamma m - (c/rho) W; fires when positive.
TriggerEval cetc_check(double d, double m, double W, const DerivedParams& p);

/// Periodic trigger function, valid only at multiples of h (OffGridCall otherwise).
TriggerEval petc_check(double t, double d, double m, double W, const DerivedParams& p);

/// Bound H = 2|k|^2 (2 + eps^2 |k|^2 / lambda_max^2) |u|^2 used by the self-trigger.
double stc_H(double u_norm_sq, const DerivedParams& p);

/// Uncapped log-formula candidate for the next dwell; -inf when the log
/// argument is not positive and +inf when H vanishes.
double stc_tau_check(double m, double W, double H, const DerivedParams& p);

/// Next self-triggered dwell max{tau, tau_check}; tau_check is replaced by
/// stc_cap_factor * tau when H < 1e-300.
double stc_next_dwell(double m, double W, double H, const DerivedParams& p);

struct TriggerState {
    double m = 0.0;
    double V0 = 0.0;
    double V = 0.0;
    double W = 0.0;      ///< raw residual
    double W_eff = 0.0;  ///< residual as seen by the trigger (clamped when robust)
    double d = 0.0;
    double Gamma = 0.0;          ///< continuous trigger function at the current observation
    double decision = 0.0;       ///< value the policy last compared against zero
    double t_next_check = 0.0;   ///< self-trigger deadline
    double last_dwell_plan = 0.0;
    std::uint64_t events = 0;
};

/// What the plant looks like at one supervision instant.
struct Observation {
    double t;
    std::int64_t step;
    double d;
    double u_norm_sq;
    double u1;
    double w_norm_sq;
};

/// Refresh V, W, W_eff, d and Gamma in `s` from an observation.
void observe(const Observation& obs, const DerivedParams& p, TriggerState& s);

class TriggerPolicy {
public:
    explicit TriggerPolicy(const DerivedParams& p) : p_(p) {}
    virtual ~TriggerPolicy() = default;

    /// Decide at the current (already observed) instant. The first call always fires.
    bool should_fire(const Observation& obs, TriggerState& s) {
        if (s.events == 0) return true;
        return decide(obs, s);
    }

    /// Bookkeeping after the controller resampled at obs.t.
    virtual void on_event(const Observation& obs, TriggerState& s) {
        (void)obs;
        ++s.events;
    }

    virtual TriggerKind kind() const noexcept = 0;

protected:
    virtual bool decide(const Observation& obs, TriggerState& s) = 0;
    const DerivedParams& p_;
};

struct Trigger {
    TriggerState state;
    std::unique_ptr<TriggerPolicy> policy;
};

/// Policy plus initial state (m = m0). `dt` is the supervision step; PETC
/// needs h to be an integer multiple of it.
Trigger make_trigger(TriggerKind kind, const DerivedParams& params, double initial_V0, double dt);

}  // namespace pbetc
