#include "pbetc/triggers.hpp"

#include <cmath>
#include <limits>

namespace pbetc {

namespace {

bool barrier_family(const DerivedParams& p) { return p.user.family == TriggerFamily::PerformanceBarrier; }

double forcing(double d, double u_norm_sq, double u1_sq, double W, const DerivedParams& p) {
    double f = -p.rho * d * d + p.beta1 * u_norm_sq + p.beta2 * u1_sq;
    if (barrier_family(p)) f += p.user.c * W;
    return f;
}

}  // namespace

double lyapunov_V(double w_norm_sq, double m, double B) { return 0.5 * B * w_norm_sq + m; }

double residual_W(double t, double V, double V0, double b_star, bool robust) {
    const double W = std::exp(-b_star * t) * V0 - V;
    return robust ? std::max(0.0, W) : W;
}

double m_rhs(double m, double d, double u_norm_sq, double u1_sq, double W, const DerivedParams& p) {
    double r = -p.user.eta * m - p.rho * d * d + p.beta1 * u_norm_sq + p.beta2 * u1_sq;
    if (barrier_family(p)) r += p.user.c * W;
    return r;
}

double step_m(double m, double d, double u_norm_sq, double u1_sq, double W, const DerivedParams& p, double dt) {
    const double next = m + dt * m_rhs(m, d, u_norm_sq, u1_sq, W, p);
    if (!(next > 0.0)) throw Error(ErrorCode::NonPositiveM, "m became " + std::to_string(next));
    return next;
}

double step_m_exponential(double m, double d, double u_norm_sq, double u1_sq, double W, const DerivedParams& p,
                          double dt) {
    const double eta = p.user.eta;
    const double decay = std::exp(-eta * dt);
    const double next = m * decay + forcing(d, u_norm_sq, u1_sq, W, p) * (-std::expm1(-eta * dt)) / eta;
    if (!(next > 0.0)) throw Error(ErrorCode::NonPositiveM, "m became " + std::to_string(next));
    return next;
}

TriggerEval cetc_check(double d, double m, double W, const DerivedParams& p) {
    double g = d * d - p.user.gamma * m;
    if (barrier_family(p)) g -= (p.user.c / p.rho) * W;
    return {g, g > 0.0};
}

TriggerEval petc_check(double t, double d, double m, double W, const DerivedParams& p) {
    const double h = p.user.h;
    const double n = std::round(t / h);
    if (std::abs(t - n * h) > 1e-9 * std::max(1.0, t))
        throw Error(ErrorCode::OffGridCall, "periodic check at t = " + std::to_string(t));
    const double a = p.a;
    const double gr = p.user.gamma * p.rho;
    double g = (a + gr) * std::exp(a * h) * d * d - gr * d * d - p.user.gamma * a * m;
    if (barrier_family(p)) g -= (a * p.user.c / p.rho) * std::exp(-p.user.c * h) * W;
    return {g, g > 0.0};
}

double stc_H(double u_norm_sq, const DerivedParams& p) {
    if (!(p.lambda_max > 0.0)) throw Error(ErrorCode::LambdaZero, "H is undefined for lambda_max = 0");
    const double k2 = p.k_norm_sq;
    const double e = p.epsilon;
    return 2.0 * k2 * (2.0 + e * e * k2 / (p.lambda_max * p.lambda_max)) * u_norm_sq;
}

double stc_tau_check(double m, double W, double H, const DerivedParams& p) {
    if (H < 1e-300) return std::numeric_limits<double>::infinity();
    const double g = 2.0 * p.lambda_max + p.user.eta;
    const double gr = p.user.gamma * p.rho * H / g;
    double num = p.user.gamma * m + gr;
    double rate = g;
    if (barrier_family(p)) {
        num += (p.user.c / p.rho) * W;
        rate += p.user.c;
    }
    const double arg = num / (H + gr);
    if (!(arg > 0.0)) return -std::numeric_limits<double>::infinity();
    return std::log(arg) / rate;
}

double stc_next_dwell(double m, double W, double H, const DerivedParams& p) {
    double tc = stc_tau_check(m, W, H, p);
    if (std::isinf(tc) && tc > 0.0) tc = p.user.stc_cap_factor * p.tau;
    return std::max(p.tau, tc);
}

void observe(const Observation& obs, const DerivedParams& p, TriggerState& s) {
    s.d = obs.d;
    s.V = lyapunov_V(obs.w_norm_sq, s.m, p.B);
    s.W = residual_W(obs.t, s.V, s.V0, p.b_star, false);
    s.W_eff = p.user.robust_residual ? std::max(0.0, s.W) : s.W;
    s.Gamma = cetc_check(s.d, s.m, s.W_eff, p).value;
}

namespace {

class ContinuousPolicy final : public TriggerPolicy {
public:
    using TriggerPolicy::TriggerPolicy;
    TriggerKind kind() const noexcept override { return TriggerKind::CETC; }

protected:
    bool decide(const Observation&, TriggerState& s) override {
        const TriggerEval e = cetc_check(s.d, s.m, s.W_eff, p_);
        s.decision = e.value;
        return e.fire;
    }
};

class PeriodicPolicy final : public TriggerPolicy {
public:
    PeriodicPolicy(const DerivedParams& p, double dt) : TriggerPolicy(p), stride_(0) {
        const double ratio = p.user.h / dt;
        stride_ = static_cast<std::int64_t>(std::llround(ratio));
        if (stride_ < 1 || std::abs(ratio - static_cast<double>(stride_)) > 1e-9 * ratio)
            throw Error(ErrorCode::ValidationError, "h must be an integer multiple of dt");
    }
    TriggerKind kind() const noexcept override { return TriggerKind::PETC; }

protected:
    bool decide(const Observation& obs, TriggerState& s) override {
        if (obs.step % stride_ != 0) return false;
        const TriggerEval e = petc_check(obs.t, s.d, s.m, s.W_eff, p_);
        s.decision = e.value;
        return e.fire;
    }

private:
    std::int64_t stride_;
};

class SelfPolicy final : public TriggerPolicy {
public:
    using TriggerPolicy::TriggerPolicy;
    TriggerKind kind() const noexcept override { return TriggerKind::STC; }

    void on_event(const Observation& obs, TriggerState& s) override {
        TriggerPolicy::on_event(obs, s);
        const double H = stc_H(obs.u_norm_sq, p_);
        s.last_dwell_plan = stc_next_dwell(s.m, s.W_eff, H, p_);
        s.t_next_check = obs.t + s.last_dwell_plan;
    }

protected:
    bool decide(const Observation& obs, TriggerState& s) override {
        s.decision = obs.t - s.t_next_check;
        return obs.t >= s.t_next_check - 1e-12 * std::max(1.0, obs.t);
    }
};

}  // namespace

Trigger make_trigger(TriggerKind kind, const DerivedParams& params, double initial_V0, double dt) {
    Trigger t;
    t.state.m = params.user.m0;
    t.state.V0 = initial_V0;
    switch (kind) {
        case TriggerKind::CETC: t.policy = std::make_unique<ContinuousPolicy>(params); break;
        case TriggerKind::PETC: t.policy = std::make_unique<PeriodicPolicy>(params, dt); break;
        case TriggerKind::STC:
            if (!(params.lambda_max > 0.0)) throw Error(ErrorCode::LambdaZero, "self-trigger needs lambda_max > 0");
            t.policy = std::make_unique<SelfPolicy>(params);
            break;
    }
    return t;
}

std::string_view to_string(TriggerKind kind) noexcept {
    switch (kind) {
        case TriggerKind::CETC: return "CETC";
        case TriggerKind::PETC: return "PETC";
        case TriggerKind::STC: return "STC";
    }
    return "?";
}

std::string_view to_string(TriggerFamily family) noexcept {
    return family == TriggerFamily::Regular ? "regular" : "performance";
}

std::optional<TriggerKind> parse_trigger_kind(std::string_view text) noexcept {
    if (text == "CETC") return TriggerKind::CETC;
    if (text == "PETC") return TriggerKind::PETC;
    if (text == "STC") return TriggerKind::STC;
    return std::nullopt;
}

std::optional<TriggerFamily> parse_trigger_family(std::string_view text) noexcept {
    if (text == "regular") return TriggerFamily::Regular;
    if (text == "performance") return TriggerFamily::PerformanceBarrier;
    return std::nullopt;
}

}  // namespace pbetc
