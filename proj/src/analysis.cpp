#include "pbetc/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <thread>

#include "pbetc/config.hpp"

namespace pbetc {

DwellStats dwell_stats(const std::vector<double>& events, double horizon) {
    std::vector<double> ev;
    for (double t : events)
        if (t < horizon) ev.push_back(t);
    if (ev.size() < 2) throw Error(ErrorCode::EmptyLog, "need at least two events before the horizon");
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t j = 1; j < ev.size(); ++j) {
        const double g = ev[j] - ev[j - 1];
        lo = std::min(lo, g);
        hi = std::max(hi, g);
    }
    const double mean = (ev.back() - ev.front()) / static_cast<double>(ev.size() - 1);
    return DwellStats{ev.size(), mean, lo, hi, horizon};
}

std::optional<double> table1_reference(TriggerKind kind, double c) {
    static constexpr std::array<double, 7> cetc{0.6104, 6.8585, 9.596, 11.9984, 10.3245, 10.3261, 10.3422};
    static constexpr std::array<double, 7> petc{0.6178, 7.077, 9.7182, 12.391, 10.3325, 10.3258, 10.3387};
    static constexpr std::array<double, 7> stc{0.1037, 0.1433, 0.2369, 0.4269, 0.3682, 0.1366, 0.05};
    const auto it = std::find(kTable1C.begin(), kTable1C.end(), c);
    if (it == kTable1C.end()) return std::nullopt;
    const auto i = static_cast<std::size_t>(it - kTable1C.begin());
    switch (kind) {
        case TriggerKind::CETC: return cetc[i];
        case TriggerKind::PETC: return petc[i];
        case TriggerKind::STC: return stc[i];
    }
    return std::nullopt;
}

bool SweepRow::within_band() const {
    if (!stats || !reference) return false;
    return std::abs(stats->mean_dwell / *reference - 1.0) <= kTable1Band;
}

SimConfig sweep_config(const SimConfig& base, TriggerKind kind, double c) {
    SimConfig cfg = base;
    cfg.kind = kind;
    cfg.user.c = c;
    cfg.user.family = c == 0.0 ? TriggerFamily::Regular : TriggerFamily::PerformanceBarrier;
    return cfg;
}

std::vector<SweepRow> sweep(const SimConfig& base, const std::vector<TriggerKind>& kinds,
                            const std::vector<double>& c_values, unsigned threads, const SweepInspector& inspect) {
    std::vector<SimConfig> cfgs;
    std::vector<SweepRow> rows;
    for (TriggerKind kind : kinds) {
        for (double c : c_values) {
            cfgs.push_back(sweep_config(base, kind, c));
            rows.push_back(SweepRow{kind, c, cfgs.back().user.family, std::nullopt, 0, table1_reference(kind, c), {}});
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < cfgs.size(); i = next++) {
            try {
                const SimOutput out = run(cfgs[i]);
                rows[i].violations = out.violations.size();
                if (inspect) inspect(i, cfgs[i], out);
                rows[i].stats = dwell_stats(out.events, cfgs[i].T_final);
            } catch (const std::exception& e) {
                rows[i].error = e.what();
            }
        }
    };
    const unsigned n_workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(cfgs.size())));
    std::vector<std::thread> pool;
    for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    return rows;
}

std::vector<SweepRow> table1_sweep(const SimConfig& base, const std::vector<double>& c_values, unsigned threads,
                                   const SweepInspector& inspect) {
    return sweep(base, {TriggerKind::CETC, TriggerKind::PETC, TriggerKind::STC}, c_values, threads, inspect);
}

unsigned threads_from_env() {
    if (const char* env = std::getenv("PBETC_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 1) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << "kind,family,c,count,mean_dwell,min_dwell,max_dwell,reference,rel_error,within_band,violations,error\r\n";
    for (const SweepRow& r : rows) {
        os << to_string(r.kind) << ',' << to_string(r.family) << ',' << format_double(r.c) << ',';
        if (r.stats) {
            os << r.stats->count << ',' << format_double(r.stats->mean_dwell) << ','
               << format_double(r.stats->min_dwell) << ',' << format_double(r.stats->max_dwell) << ',';
        } else {
            os << ",,,,";
        }
        if (r.reference) {
            os << format_double(*r.reference) << ',';
            if (r.stats) os << format_double(r.stats->mean_dwell / *r.reference - 1.0);
            os << ',' << (r.within_band() ? "yes" : "no");
        } else {
            os << ",,";
        }
        os << ',' << r.violations << ',';
        if (!r.error.empty()) {
            std::string e = r.error;
            std::replace(e.begin(), e.end(), '"', '\'');
            os << '"' << e << '"';
        }
        os << "\r\n";
    }
}

void write_table1_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    std::vector<double> cs;
    for (const SweepRow& r : rows)
        if (std::find(cs.begin(), cs.end(), r.c) == cs.end()) cs.push_back(r.c);
    os << "method";
    for (double c : cs) os << ",c=" << format_double(c);
    os << ",within_15pct\r\n";
    for (TriggerKind kind : {TriggerKind::CETC, TriggerKind::PETC, TriggerKind::STC}) {
        bool any = false;
        bool all_ok = true;
        std::string line(to_string(kind));
        for (double c : cs) {
            line += ',';
            for (const SweepRow& r : rows) {
                if (r.kind != kind || r.c != c) continue;
                any = true;
                if (r.stats) line += format_double(r.stats->mean_dwell);
                all_ok = all_ok && r.within_band();
            }
        }
        if (!any) continue;
        os << line << ',' << (all_ok ? "yes" : "no") << "\r\n";
    }
}

Summary summarize(const SimOutput& out, const SimConfig& config) {
    const DerivedParams& p = out.derived;
    Summary s;
    s["kind"] = std::string(to_string(p.kind));
    s["family"] = std::string(to_string(p.user.family));
    s["config_hash"] = config_hash(config);
    s["c"] = format_double(p.user.c);
    s["gamma"] = format_double(p.user.gamma);
    s["eta"] = format_double(p.user.eta);
    s["h"] = format_double(p.user.h);
    s["dt"] = format_double(out.dt);
    s["T_final"] = format_double(out.T_final);
    s["m0"] = format_double(p.user.m0);
    s["B"] = format_double(p.B);
    s["b"] = format_double(p.b);
    s["b_star"] = format_double(p.b_star);
    s["tau"] = format_double(p.tau);
    s["M"] = format_double(p.M);
    s["rho"] = format_double(p.rho);
    s["V0"] = format_double(out.trace.empty() ? 0.0 : out.trace.front().V);
    s["norm_u0"] = format_double(out.norm_u0);
    s["norm_u_final"] = format_double(out.trace.empty() ? 0.0 : out.trace.back().norm_u);
    s["event_count"] = std::to_string(out.events.size());
    s["violations"] = std::to_string(out.violations.size());
    s["averaging"] = kAveragingConvention;
    if (out.events.size() >= 2) {
        const DwellStats d = dwell_stats(out.events, out.T_final);
        s["mean_dwell"] = format_double(d.mean_dwell);
        s["min_dwell"] = format_double(d.min_dwell);
        s["max_dwell"] = format_double(d.max_dwell);
    }
    return s;
}

}  // namespace pbetc
