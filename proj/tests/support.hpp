#pragma once

// Shared fixtures: the reference plant (eps = 0.1, lambda = 0.25, q = 2,
// Neumann at 0, quartic initial profile) and helpers for random profiles.

#include <cmath>
#include <random>

#include "pbetc/config.hpp"
#include "pbetc/trigger_params.hpp"

namespace fixture {

inline pbetc::PlantConfig reference_plant(pbetc::Index n = 201) {
    const pbetc::Grid g(n);
    return pbetc::PlantConfig{
        0.1,
        pbetc::SpatialProfile::constant(g, 0.25),
        2.0,
        1,
        0,
        pbetc::SpatialProfile::sample(g, [](double x) { return 10.0 * x * x * (x - 1.0) * (x - 1.0); }),
    };
}

inline pbetc::UserParams reference_user() {
    pbetc::UserParams u;
    u.gamma = 1.0;
    u.eta = 0.0383;
    u.c = 1.0;
    u.sigma = 0.9;
    u.m0 = 1e-4;
    u.kappa = 5.0;
    u.B = 3325.0;
    u.h = 0.01;
    return u;
}

/// Derived constants of the reference setup, computed once per kind.
inline const pbetc::DerivedParams& reference_params(pbetc::TriggerKind kind = pbetc::TriggerKind::CETC) {
    static const pbetc::DerivedParams cetc = pbetc::derive_all(reference_plant(), reference_user(), pbetc::TriggerKind::CETC);
    static const pbetc::DerivedParams petc = pbetc::derive_all(reference_plant(), reference_user(), pbetc::TriggerKind::PETC);
    static const pbetc::DerivedParams stc = pbetc::derive_all(reference_plant(), reference_user(), pbetc::TriggerKind::STC);
    switch (kind) {
        case pbetc::TriggerKind::PETC: return petc;
        case pbetc::TriggerKind::STC: return stc;
        default: return cetc;
    }
}

/// Smooth random profile: a few cosine modes with random amplitudes.
inline pbetc::SpatialProfile random_profile(const pbetc::Grid& g, std::mt19937_64& rng, int modes = 4) {
    std::normal_distribution<double> amp(0.0, 1.0);
    std::vector<double> a(static_cast<std::size_t>(modes));
    for (auto& v : a) v = amp(rng);
    return pbetc::SpatialProfile::sample(g, [&](double x) {
        double s = 0.0;
        for (int k = 0; k < modes; ++k) s += a[static_cast<std::size_t>(k)] * std::cos(k * 3.141592653589793 * x);
        return s;
    });
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace fixture
