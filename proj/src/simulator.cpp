#include "pbetc/simulator.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace pbetc {

void SimConfig::validate() const {
    if (!(dt > 0.0)) throw Error(ErrorCode::ValidationError, "dt > 0");
    if (!(T_final >= dt)) throw Error(ErrorCode::ValidationError, "T_final >= dt");
    if (record_stride < 1) throw Error(ErrorCode::ValidationError, "record_stride >= 1");
    if (disturbance && !(disturbance->duration >= 0.0))
        throw Error(ErrorCode::ValidationError, "disturbance duration >= 0");
    plant.validate();
    user.validate();
}

namespace {

struct Loop {
    const SimConfig& cfg;
    const DerivedParams& p;
    Eigen::VectorXd weights;
    Eigen::VectorXd k_weighted;
    Eigen::MatrixXd T;

    double norm_sq(const Eigen::VectorXd& v) const { return weights.dot(v.cwiseAbs2()); }
    double control(const Eigen::VectorXd& u) const { return k_weighted.dot(u); }
    double transformed_norm_sq(const Eigen::VectorXd& u) const {
        const Eigen::VectorXd w = T.triangularView<Eigen::Lower>() * u;
        return norm_sq(w);
    }
};

}  // namespace

SimOutput run(const SimConfig& cfg) {
    cfg.validate();
    const DerivedParams derived = derive_all(cfg.plant, cfg.user, cfg.kind);
    const DerivedParams& p = derived;
    const Grid& grid = cfg.plant.grid();
    const Index n = grid.size();

    Loop loop{cfg, p, trapezoid_weights<double>(n, grid.dx()), {}, volterra_matrix(p.K, -1.0)};
    loop.k_weighted = p.gain.k.values().cwiseProduct(loop.weights);

    const bool disturbed = cfg.disturbance.has_value() && cfg.disturbance->amplitude != 0.0;
    const bool self_triggered = cfg.kind == TriggerKind::STC;
    const ImplicitEulerStepper stepper(cfg.plant, cfg.dt);

    Eigen::VectorXd u = cfg.plant.u0.values();
    const double V0 = lyapunov_V(loop.transformed_norm_sq(u), cfg.user.m0, p.B);
    Trigger trig = make_trigger(cfg.kind, p, V0, cfg.dt);
    TriggerState& s = trig.state;

    std::vector<TraceRow> trace;
    std::vector<double> events;
    std::vector<double> planned;
    const auto n_steps = static_cast<std::int64_t>(std::llround(cfg.T_final / cfg.dt));
    trace.reserve(static_cast<std::size_t>(n_steps / cfg.record_stride + 16));

    double U_hold = 0.0;
    double t = 0.0;
    for (std::int64_t step = 0;; ++step) {
        const bool last = self_triggered ? t >= cfg.T_final : step == n_steps;
        const double u_norm_sq = loop.norm_sq(u);
        const double u1 = u(n - 1);
        const double U_now = loop.control(u);
        const Observation obs{t, step, U_hold - U_now, u_norm_sq, u1, loop.transformed_norm_sq(u)};
        observe(obs, p, s);
        const double gamma_pre = s.Gamma;

        if (!disturbed && s.V > std::exp(-p.b_star * t) * V0 * (1.0 + 1e-6))
            throw Error(ErrorCode::BarrierBreach, "V exceeds the performance barrier at t = " + format_double(t));

        const bool fired = !last && trig.policy->should_fire(obs, s);
        if (fired) {
            U_hold = U_now;
            s.d = 0.0;
            events.push_back(t);
            trig.policy->on_event(obs, s);
            if (self_triggered) planned.push_back(s.last_dwell_plan);
        }

        if (fired || last || step % cfg.record_stride == 0) {
            trace.push_back(TraceRow{t, std::sqrt(u_norm_sq), s.V, s.W, gamma_pre, s.m, U_hold, u1, fired, s.d,
                                     s.W_eff});
        }
        if (last) break;

        // Step length: the plant clock stops exactly at self-triggered deadlines and at T_final.
        double h = cfg.dt;
        double t_next = self_triggered ? t + cfg.dt : static_cast<double>(step + 1) * cfg.dt;
        if (self_triggered) {
            const double target = std::min(s.t_next_check, cfg.T_final);
            if (target - t <= cfg.dt * (1.0 + 1e-9)) {
                h = target - t;
                t_next = target;
            }
        }

        s.m = step_m(s.m, s.d, u_norm_sq, u1 * u1, s.W_eff, p, h);
        const double boundary = U_hold + (disturbed && cfg.disturbance->active(t) ? cfg.disturbance->amplitude : 0.0);
        u = h == cfg.dt ? stepper.advance(u, boundary) : ImplicitEulerStepper(cfg.plant, h).advance(u, boundary);
        t = t_next;
    }

    SimOutput out{std::move(trace), std::move(events), std::move(planned), derived, {}, cfg.dt, cfg.T_final,
                  l2_norm(cfg.plant.u0), disturbed};
    out.violations = check_trace(out.trace, out.events, out.planned_dwells, limits_of(out));
    return out;
}

InvariantLimits limits_of(const SimOutput& out) {
    const DerivedParams& p = out.derived;
    const double V0 = out.trace.empty() ? 0.0 : out.trace.front().V;
    return InvariantLimits{p.kind, p.b_star, V0, p.M, p.tau, p.user.h, out.dt, p.user.m0, p.user.gamma, out.norm_u0};
}

std::vector<Violation> check_trace(const std::vector<TraceRow>& trace, const std::vector<double>& events,
                                   const std::vector<double>& planned, const InvariantLimits& lim) {
    std::vector<Violation> v;
    const double decay_scale = lim.M * std::sqrt(lim.norm_u0 * lim.norm_u0 + lim.m0);

    for (std::size_t i = 0; i < trace.size(); ++i) {
        const TraceRow& r = trace[i];
        const double barrier = std::exp(-lim.b_star * r.t) * lim.V0 * (1.0 + 1e-6);
        if (r.V > barrier) v.push_back({"barrier", i, r.t, r.V, barrier});
        if (!(r.m > 0.0)) v.push_back({"m_positive", i, r.t, r.m, 0.0});
        const double decay = decay_scale * std::exp(-0.5 * lim.b_star * r.t);
        if (r.norm_u > decay * (1.0 + 1e-12)) v.push_back({"decay", i, r.t, r.norm_u, decay});
        if (i > 0 && !r.fired && r.U != trace[i - 1].U) v.push_back({"hold", i, r.t, r.U, trace[i - 1].U});
        // Before the t = 0 event the held input is not yet the control law, so
        // the trigger function carries no guarantee there.
        if (lim.kind != TriggerKind::CETC && r.t > 0.0) {
            const double slack = 1e-6 * lim.gamma * r.m;
            if (r.Gamma > slack) v.push_back({"gamma_sound", i, r.t, r.Gamma, slack});
        }
    }

    if (events.empty() || events.front() != 0.0)
        v.push_back({"events_start", 0, events.empty() ? 0.0 : events.front(), events.empty() ? 0.0 : events.front(), 0.0});
    for (std::size_t j = 0; j < events.size(); ++j) {
        const double t = events[j];
        if (lim.kind == TriggerKind::PETC) {
            const double n = std::round(t / lim.h);
            if (std::abs(t - n * lim.h) > 1e-9 * std::max(1.0, t)) v.push_back({"petc_grid", j, t, t, n * lim.h});
        }
        if (j == 0) continue;
        const double gap = t - events[j - 1];
        if (!(gap > 0.0)) {
            v.push_back({"events_monotone", j, t, gap, 0.0});
            continue;
        }
        double floor = 0.0;
        switch (lim.kind) {
            case TriggerKind::CETC: floor = lim.tau - 2.0 * lim.dt; break;
            case TriggerKind::PETC: floor = lim.h * (1.0 - 1e-9); break;
            case TriggerKind::STC: floor = lim.tau * (1.0 - 1e-12); break;
        }
        if (gap < floor) v.push_back({"dwell", j, t, gap, floor});
        if (lim.kind == TriggerKind::STC && j - 1 < planned.size()) {
            const double plan = planned[j - 1];
            if (std::abs(gap - plan) > 1e-12 * std::max(1.0, t)) v.push_back({"stc_plan", j, t, gap, plan});
        }
    }
    return v;
}

InvariantReport verify_invariants(const SimOutput& out) {
    auto v = check_trace(out.trace, out.events, out.planned_dwells, limits_of(out));
    const bool ok = v.empty();
    return {ok, std::move(v)};
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace) {
    os << "t,norm_u,V,W,Gamma,m,U,u1,fired\r\n";
    for (const TraceRow& r : trace) {
        os << format_double(r.t) << ',' << format_double(r.norm_u) << ',' << format_double(r.V) << ','
           << format_double(r.W) << ',' << format_double(r.Gamma) << ',' << format_double(r.m) << ','
           << format_double(r.U) << ',' << format_double(r.u1) << ',' << (r.fired ? 1 : 0) << "\r\n";
    }
}

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream ss(line);
    while (std::getline(ss, cur, sep)) out.push_back(cur);
    if (!line.empty() && line.back() == sep) out.emplace_back();
    return out;
}

double to_double(const std::string& s, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line) + ": not a number: '" + s + "'");
    }
}

void chomp(std::string& s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n')) s.pop_back();
}

}  // namespace

std::vector<TraceRow> read_trace_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorCode::ParseError, "empty trace");
    chomp(line);
    if (line != "t,norm_u,V,W,Gamma,m,U,u1,fired") throw Error(ErrorCode::ParseError, "line 1: unexpected header");
    std::vector<TraceRow> rows;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t ln = 2; std::getline(is, line); ++ln) {
        chomp(line);
        if (line.empty()) continue;
        const auto f = split(line, ',');
        if (f.size() != 9) throw Error(ErrorCode::ParseError, "line " + std::to_string(ln) + ": expected 9 fields");
        double x[8];
        for (int k = 0; k < 8; ++k) x[k] = to_double(f[k], ln);
        if (f[8] != "0" && f[8] != "1") throw Error(ErrorCode::ParseError, "line " + std::to_string(ln) + ": fired must be 0 or 1");
        rows.push_back(TraceRow{x[0], x[1], x[2], x[3], x[4], x[5], x[6], x[7], f[8] == "1", nan, nan});
    }
    return rows;
}

void write_events_csv(std::ostream& os, const std::vector<double>& events) {
    os << "j,t_event,dwell\r\n";
    for (std::size_t j = 0; j < events.size(); ++j) {
        os << j << ',' << format_double(events[j]) << ',';
        if (j > 0) os << format_double(events[j] - events[j - 1]);
        os << "\r\n";
    }
}

std::vector<double> events_from_trace(const std::vector<TraceRow>& trace) {
    std::vector<double> ev;
    for (const TraceRow& r : trace)
        if (r.fired) ev.push_back(r.t);
    return ev;
}

void write_summary(std::ostream& os, const Summary& summary) {
    for (const auto& [k, v] : summary) os << k << '=' << v << '\n';
}

Summary read_summary(std::istream& is) {
    Summary s;
    std::string line;
    for (std::size_t ln = 1; std::getline(is, line); ++ln) {
        chomp(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::ParseError, "summary line " + std::to_string(ln) + ": missing '='");
        s[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return s;
}

InvariantLimits limits_from_summary(const Summary& s) {
    auto get = [&](const std::string& key) {
        const auto it = s.find(key);
        if (it == s.end()) throw Error(ErrorCode::ValidationError, "summary lacks " + key);
        return it->second;
    };
    auto num = [&](const std::string& key) { return to_double(get(key), 0); };
    const auto kind = parse_trigger_kind(get("kind"));
    if (!kind) throw Error(ErrorCode::ValidationError, "summary kind must be CETC, PETC or STC");
    return InvariantLimits{*kind,      num("b_star"), num("V0"),    num("M"),      num("tau"),
                           num("h"),   num("dt"),     num("m0"),    num("gamma"),  num("norm_u0")};
}

}  // namespace pbetc
