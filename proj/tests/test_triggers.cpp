#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pbetc/triggers.hpp"
#include "support.hpp"

using namespace pbetc;

namespace {

DerivedParams with_c(double c, TriggerFamily family, TriggerKind kind = TriggerKind::CETC) {
    DerivedParams p = fixture::reference_params(kind);
    p.user.c = c;
    p.user.family = family;
    return p;
}

}  // namespace

TEST_CASE("Lyapunov value") {
    CHECK(lyapunov_V(0.0, 1e-4, 3325.0) == 1e-4);
    CHECK(lyapunov_V(2.0, 1.0, 4.0) == 5.0);

    const auto& p = fixture::reference_params();
    const auto plant = fixture::reference_plant();
    const double w2 = l2_norm_sq(forward_transform(plant.u0, p.K));
    CHECK(lyapunov_V(w2, 1e-4, p.B) == doctest::Approx(p.B / 2.0 * w2 + 1e-4).epsilon(1e-15));
}

TEST_CASE("performance residual") {
    CHECK(residual_W(0.0, 7.0, 7.0, 0.0383, false) == 0.0);
    const double V = std::exp(-0.0383 * 3.0) * 7.0;
    CHECK(residual_W(3.0, V, 7.0, 0.0383, false) == 0.0);
    CHECK(residual_W(3.0, 2.0 * V, 7.0, 0.0383, true) == 0.0);
    CHECK(residual_W(3.0, 2.0 * V, 7.0, 0.0383, false) == doctest::Approx(-V));
    CHECK(residual_W(3.0, 0.5 * V, 7.0, 0.0383, true) == doctest::Approx(0.5 * V));
}

TEST_CASE("explicit step of the dynamic variable") {
    const auto& p = fixture::reference_params();
    const double dt = 1e-3;
    CHECK(step_m(0.3, 0.0, 0.0, 0.0, 0.0, p, dt) == doctest::Approx(0.3 * (1.0 - 0.0383 * dt)).epsilon(1e-15));

    DerivedParams still = p;
    still.user.eta = 0.0;
    CHECK(step_m(0.3, 0.0, 0.0, 0.0, 0.0, still, dt) == 0.3);

    // one step from t = 0 of the reference run: hand evaluation of the right-hand side
    const double m = 1e-4, d = 0.01, un = 100.0 / 630.0, u1 = 0.0, W = 0.0;
    const double hand = m + dt * (-0.0383 * m - p.rho * d * d + p.beta1 * un + p.beta2 * u1 * u1 + p.user.c * W);
    CHECK(std::abs(step_m(m, d, un, u1 * u1, W, p, dt) - hand) <= 1e-14);

    try {
        step_m(1e-4, 10.0, 0.0, 0.0, 0.0, p, dt);
        FAIL("expected NonPositiveM");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonPositiveM);
    }
}

TEST_CASE("integrating-factor step agrees with the explicit step to second order") {
    const auto& p = fixture::reference_params();
    auto gap = [&](double dt) {
        return std::abs(step_m(0.5, 0.01, 0.1, 0.02, 3.0, p, dt) - step_m_exponential(0.5, 0.01, 0.1, 0.02, 3.0, p, dt));
    };
    CHECK(gap(1e-3) < 1e-6);
    CHECK(gap(1e-3) / gap(5e-4) == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("continuous trigger function") {
    DerivedParams p = with_c(1.0, TriggerFamily::PerformanceBarrier);
    CHECK_FALSE(cetc_check(0.0, 1e-4, 5.0, p).fire);
    CHECK(cetc_check(0.0, 1e-4, 5.0, p).value < 0.0);

    p.rho = 827.1872;
    p.user.gamma = 1.0;
    const auto e = cetc_check(std::sqrt(0.5), 0.2, 82.71872, p);
    CHECK(e.value == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(e.fire);
}

TEST_CASE("c = 0 reduces the barrier family to the regular one") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-2.0, 2.0), pos(1e-6, 3.0);
    for (auto kind : {TriggerKind::CETC, TriggerKind::PETC, TriggerKind::STC}) {
        const auto P = with_c(0.0, TriggerFamily::PerformanceBarrier, kind);
        const auto R = with_c(0.0, TriggerFamily::Regular, kind);
        for (int i = 0; i < 200; ++i) {
            const double d = u(rng), m = pos(rng), W = u(rng) * 10.0, un = pos(rng), u1 = u(rng);
            CHECK(cetc_check(d, m, W, P).value == cetc_check(d, m, W, R).value);
            CHECK(petc_check(0.03, d, m, W, P).value == petc_check(0.03, d, m, W, R).value);
            CHECK(m_rhs(m, d, un, u1 * u1, W, P) == m_rhs(m, d, un, u1 * u1, W, R));
            if (kind == TriggerKind::STC) {
                const double H = stc_H(un, P);
                CHECK(stc_next_dwell(m, std::abs(W), H, P) == stc_next_dwell(m, std::abs(W), H, R));
            }
        }
    }
}

TEST_CASE("regular family ignores the residual entirely") {
    const auto R = with_c(5.0, TriggerFamily::Regular);
    CHECK(cetc_check(0.3, 0.1, 100.0, R).value == cetc_check(0.3, 0.1, -100.0, R).value);
    CHECK(m_rhs(0.1, 0.3, 1.0, 0.2, 100.0, R) == m_rhs(0.1, 0.3, 1.0, 0.2, 0.0, R));
}

TEST_CASE("periodic trigger function") {
    const auto p = with_c(1.0, TriggerFamily::PerformanceBarrier, TriggerKind::PETC);
    const double h = p.user.h, a = p.a, g = p.user.gamma, rho = p.rho, c = p.user.c;

    const auto zero_d = petc_check(0.05, 0.0, 1e-3, 4.0, p);
    CHECK(zero_d.value == doctest::Approx(-g * a * 1e-3 - (a * c / rho) * std::exp(-c * h) * 4.0));
    CHECK_FALSE(zero_d.fire);

    const auto r = with_c(0.0, TriggerFamily::Regular, TriggerKind::PETC);
    const double d = 0.02, m = 1e-4;
    CHECK(petc_check(0.05, d, m, 0.0, r).value ==
          doctest::Approx((a + g * rho) * std::exp(a * h) * d * d - g * rho * d * d - g * a * m));

    // The function is affine in d^2; the flag flips at its root.
    const double W = 2.5;
    const double root = (g * a * m + (a * c / rho) * std::exp(-c * h) * W) /
                        ((a + g * rho) * std::exp(a * h) - g * rho);
    CHECK_FALSE(petc_check(0.05, std::sqrt(root * (1.0 - 1e-9)), m, W, p).fire);
    CHECK(petc_check(0.05, std::sqrt(root * (1.0 + 1e-9)), m, W, p).fire);
    CHECK(std::abs(petc_check(0.05, std::sqrt(root), m, W, p).value) <= 1e-12 * g * a * m);

    try {
        petc_check(0.005, 0.1, 1e-4, 0.0, p);
        FAIL("expected OffGridCall");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::OffGridCall);
    }
    CHECK_NOTHROW(petc_check(0.0, 0.1, 1e-4, 0.0, p));
    CHECK_NOTHROW(petc_check(123.45, 0.1, 1e-4, 0.0, p));
}

TEST_CASE("self-trigger bound H") {
    DerivedParams p = fixture::reference_params(TriggerKind::STC);
    CHECK(stc_H(0.0, p) == 0.0);
    p.k_norm_sq = 1.0;
    p.epsilon = 0.1;
    p.lambda_max = 0.25;
    CHECK(stc_H(1.0, p) == doctest::Approx(4.32).epsilon(1e-14));
    CHECK(stc_H(4.0, p) == doctest::Approx(4.0 * stc_H(1.0, p)).epsilon(1e-15));
    p.lambda_max = 0.0;
    try {
        stc_H(1.0, p);
        FAIL("expected LambdaZero");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::LambdaZero);
    }
}

TEST_CASE("self-triggered dwell") {
    const auto& p = fixture::reference_params(TriggerKind::STC);
    SUBCASE("vanishing H uses the cap") {
        CHECK(stc_tau_check(1e-4, 0.0, 0.0, p) == std::numeric_limits<double>::infinity());
        CHECK(stc_next_dwell(1e-4, 0.0, 0.0, p) == 100.0 * p.tau);
    }
    SUBCASE("short candidate falls back to tau") {
        const double H = 1e6;
        CHECK(stc_tau_check(1e-8, 0.0, H, p) < p.tau);
        CHECK(stc_next_dwell(1e-8, 0.0, H, p) == p.tau);
    }
    SUBCASE("reference state at t = 0") {
        const double un = l2_norm_sq(fixture::reference_plant().u0);
        const double H = 2.0 * p.k_norm_sq * (2.0 + 0.01 * p.k_norm_sq / 0.0625) * un;
        CHECK(std::abs(stc_H(un, p) - H) <= 1e-12 * H);
        const double g = 2.0 * 0.25 + 0.0383;
        const double gr = p.user.gamma * p.rho * H / g;
        const double tc = std::log((p.user.gamma * 1e-4 + gr) / (H + gr)) / (g + p.user.c);
        CHECK(std::abs(stc_next_dwell(1e-4, 0.0, H, p) - std::max(p.tau, tc)) <= 1e-10);
    }
}

TEST_CASE("first decision always fires") {
    for (auto kind : {TriggerKind::CETC, TriggerKind::PETC, TriggerKind::STC}) {
        const auto& p = fixture::reference_params(kind);
        auto trig = make_trigger(kind, p, 1.0, 1e-3);
        CHECK(trig.state.m == p.user.m0);
        CHECK(trig.policy->kind() == kind);
        const Observation obs{0.0, 0, 0.0, 0.1, 0.0, 0.1};
        observe(obs, p, trig.state);
        CHECK(trig.policy->should_fire(obs, trig.state));
    }
}

TEST_CASE("periodic policy only fires on its sampling grid") {
    auto p = with_c(1.0, TriggerFamily::PerformanceBarrier, TriggerKind::PETC);
    const double dt = 1e-3;
    auto trig = make_trigger(TriggerKind::PETC, p, 1.0, dt);
    int fired = 0;
    for (std::int64_t s = 0; s <= 100; ++s) {
        const Observation obs{static_cast<double>(s) * dt, s, 5.0, 0.1, 0.0, 0.0};
        observe(obs, p, trig.state);
        if (trig.policy->should_fire(obs, trig.state)) {
            CHECK(s % 10 == 0);
            trig.policy->on_event(obs, trig.state);
            ++fired;
        }
    }
    CHECK(fired == 11);
    p.user.h = 0.0105;
    CHECK_THROWS_AS(make_trigger(TriggerKind::PETC, p, 1.0, dt), Error);
}

TEST_CASE("self-trigger schedules exactly the computed dwell") {
    const auto& p = fixture::reference_params(TriggerKind::STC);
    auto trig = make_trigger(TriggerKind::STC, p, 1.0, 1e-3);
    const Observation obs{0.0, 0, 0.0, 0.15, 0.0, 1e-3};
    observe(obs, p, trig.state);
    REQUIRE(trig.policy->should_fire(obs, trig.state));
    trig.policy->on_event(obs, trig.state);
    const double G = stc_next_dwell(trig.state.m, trig.state.W_eff, stc_H(0.15, p), p);
    CHECK(trig.state.t_next_check == G);
    CHECK(trig.state.last_dwell_plan == G);

    const Observation early{G * 0.999, 1, 0.0, 0.15, 0.0, 1e-3};
    observe(early, p, trig.state);
    CHECK_FALSE(trig.policy->should_fire(early, trig.state));
    const Observation due{G, 2, 0.0, 0.15, 0.0, 1e-3};
    observe(due, p, trig.state);
    CHECK(trig.policy->should_fire(due, trig.state));
}

TEST_CASE("observe refreshes the residual with and without clamping") {
    DerivedParams p = fixture::reference_params();
    TriggerState s;
    s.m = 1e-4;
    s.V0 = 1.0;
    const Observation obs{0.0, 0, 0.3, 0.1, 0.0, 1.0};  // V far above V0
    observe(obs, p, s);
    CHECK(s.W < 0.0);
    CHECK(s.W_eff == s.W);
    p.user.robust_residual = true;
    observe(obs, p, s);
    CHECK(s.W < 0.0);
    CHECK(s.W_eff == 0.0);
    CHECK(s.Gamma == cetc_check(0.3, 1e-4, 0.0, p).value);
}

TEST_CASE("kind and family names round-trip") {
    for (auto k : {TriggerKind::CETC, TriggerKind::PETC, TriggerKind::STC})
        CHECK(parse_trigger_kind(to_string(k)) == k);
    for (auto f : {TriggerFamily::Regular, TriggerFamily::PerformanceBarrier})
        CHECK(parse_trigger_family(to_string(f)) == f);
    CHECK_FALSE(parse_trigger_kind("ETC").has_value());
}
