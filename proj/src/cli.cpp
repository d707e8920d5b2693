#include "pbetc/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "pbetc/analysis.hpp"
#include "pbetc/config.hpp"

#ifndef PBETC_GIT_HASH
#define PBETC_GIT_HASH "unknown"
#endif

namespace pbetc {

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    return f;
}

/// Write through `body` to a file, or to `out` when no path was given.
template <typename F>
void emit(const std::string& path, std::ostream& out, F&& body) {
    if (path.empty()) {
        body(out);
    } else {
        auto f = open_out(path);
        body(f);
    }
}

std::vector<double> parse_c_list(const std::string& text) {
    std::vector<double> cs;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(item, &pos);
            if (pos != item.size() || !(v >= 0.0)) throw std::invalid_argument(item);
            cs.push_back(v);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ValidationError, "c-list entries must be numbers >= 0, got '" + item + "'");
        }
    }
    if (cs.empty()) throw Error(ErrorCode::ValidationError, "c-list is empty");
    return cs;
}

std::vector<TriggerKind> parse_kinds(const std::string& text) {
    std::vector<TriggerKind> kinds;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto k = parse_trigger_kind(item);
        if (!k) throw Error(ErrorCode::ValidationError, "kinds must be CETC, PETC or STC, got '" + item + "'");
        kinds.push_back(*k);
    }
    return kinds;
}

void print_violations(std::ostream& os, const std::vector<Violation>& v) {
    for (const Violation& x : v) {
        os << "violation " << x.check << " at index " << x.index << " (t=" << format_double(x.t)
           << "): value " << format_double(x.value) << " vs limit " << format_double(x.limit) << '\n';
    }
}

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::BarrierBreach:
        case ErrorCode::NonPositiveM: return kExitViolation;
        default: return kExitValidation;
    }
}

struct Options {
    std::string config;
    std::string out;
    std::string out_dir;
    std::string details;
    std::string c_list;
    std::string kinds;
    std::string trace;
    std::string summary;
    std::optional<double> t_final;
};

SimConfig load(const Options& o) {
    SimConfig cfg = parse_config(o.config);
    if (o.t_final) {
        cfg.T_final = *o.t_final;
        cfg.validate();
    }
    return cfg;
}

int cmd_kernel(const Options& o, std::ostream& out) {
    const SimConfig cfg = load(o);
    const Grid& grid = cfg.plant.grid();
    const Grid fine = grid.refined(cfg.user.kernel_refinement);
    const KernelField K = restrict_kernel(solve_kernel_forward(cfg.plant, fine), grid);
    const KernelField L = restrict_kernel(solve_kernel_inverse(cfg.plant, fine), grid);
    emit(o.out, out, [&](std::ostream& os) {
        os << "x,y,K,L\r\n";
        for (Index i = 0; i < grid.size(); ++i)
            for (Index j = 0; j <= i; ++j)
                os << format_double(grid.node(i)) << ',' << format_double(grid.node(j)) << ','
                   << format_double(K(i, j)) << ',' << format_double(L(i, j)) << "\r\n";
    });
    return kExitOk;
}

std::vector<std::pair<std::string, double>> param_table(const DerivedParams& p) {
    return {{"wp", p.wp},       {"k_at_1", p.gain.k_at_1}, {"kprime_at_1", p.gain.kprime_at_1},
            {"alpha1", p.alpha1}, {"alpha2", p.alpha2},   {"beta1", p.beta1},
            {"beta2", p.beta2}, {"B", p.B},               {"kappa", p.user.kappa},
            {"margin", p.margin}, {"rho", p.rho},         {"rho1", p.rho1},
            {"a", p.a},         {"tau", p.tau},           {"L_tilde", p.L_tilde},
            {"K_tilde", p.K_tilde}, {"int_L1_sq", p.L_last_row_sq}, {"k_norm_sq", p.k_norm_sq},
            {"b", p.b},         {"two_b_over_B", 2.0 * p.b / p.B}, {"b_star", p.b_star},
            {"M", p.M},         {"lambda_max", p.lambda_max}};
}

int cmd_params(const Options& o, std::ostream& out) {
    const SimConfig cfg = load(o);
    const DerivedParams p = derive_all(cfg.plant, cfg.user, cfg.kind);
    const auto table = param_table(p);
    for (const auto& [k, v] : table) out << k << '=' << format_double(v) << '\n';
    if (!o.out.empty()) {
        auto f = open_out(o.out);
        f << "name,value\r\n";
        for (const auto& [k, v] : table) f << k << ',' << format_double(v) << "\r\n";
    }
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
    const SimConfig cfg = load(o);
    const std::filesystem::path dir = o.out_dir.empty() ? std::filesystem::path("pbetc_out") : std::filesystem::path(o.out_dir);
    std::filesystem::create_directories(dir);
    const SimOutput res = run(cfg);
    {
        auto f = open_out(dir / "trace.csv");
        write_trace_csv(f, res.trace);
    }
    {
        auto f = open_out(dir / "events.csv");
        write_events_csv(f, res.events);
    }
    const Summary summary = summarize(res, cfg);
    {
        auto f = open_out(dir / "summary.txt");
        write_summary(f, summary);
    }
    write_manifest({o.config, dir, PBETC_GIT_HASH, utc_timestamp(), "simulate"});
    write_summary(out, summary);
    if (!res.violations.empty()) {
        print_violations(err, res.violations);
        return kExitViolation;
    }
    return kExitOk;
}

int finish_sweep(const std::vector<SweepRow>& rows, std::ostream& err) {
    bool failed = false;
    bool violated = false;
    for (const SweepRow& r : rows) {
        if (!r.error.empty()) {
            err << to_string(r.kind) << " c=" << format_double(r.c) << ": " << r.error << '\n';
            failed = true;
        }
        violated = violated || r.violations > 0;
    }
    return failed ? kExitValidation : violated ? kExitViolation : kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out, std::ostream& err) {
    const SimConfig cfg = load(o);
    const auto cs = parse_c_list(o.c_list);
    const auto kinds = o.kinds.empty() ? std::vector<TriggerKind>{cfg.kind} : parse_kinds(o.kinds);
    const auto rows = sweep(cfg, kinds, cs, threads_from_env());
    emit(o.out, out, [&](std::ostream& os) { write_sweep_csv(os, rows); });
    return finish_sweep(rows, err);
}

int cmd_table1(const Options& o, std::ostream& out, std::ostream& err) {
    const SimConfig cfg = load(o);
    const std::vector<double> cs =
        o.c_list.empty() ? std::vector<double>(kTable1C.begin(), kTable1C.end()) : parse_c_list(o.c_list);
    const auto rows = table1_sweep(cfg, cs, threads_from_env());
    emit(o.out, out, [&](std::ostream& os) { write_table1_csv(os, rows); });
    if (!o.details.empty()) {
        auto f = open_out(o.details);
        write_sweep_csv(f, rows);
    }
    return finish_sweep(rows, err);
}

int cmd_verify(const Options& o, std::ostream& out, std::ostream& err) {
    std::ifstream tin(o.trace);
    if (!tin) throw Error(ErrorCode::IoError, "cannot open " + o.trace);
    const auto trace = read_trace_csv(tin);
    const std::filesystem::path spath =
        o.summary.empty() ? std::filesystem::path(o.trace).parent_path() / "summary.txt" : std::filesystem::path(o.summary);
    std::ifstream sin(spath);
    if (!sin) throw Error(ErrorCode::IoError, "cannot open " + spath.string() + " (pass --summary)");
    const InvariantLimits lim = limits_from_summary(read_summary(sin));
    const auto v = check_trace(trace, events_from_trace(trace), {}, lim);
    if (v.empty()) {
        out << "verify: " << trace.size() << " rows, no violations\n";
        return kExitOk;
    }
    print_violations(err, v);
    out << "verify: " << v.size() << " violation(s)\n";
    return kExitViolation;
}

}  // namespace

void write_manifest(const RunManifest& m) {
    std::filesystem::create_directories(m.output_dir);
    auto f = open_out(m.output_dir / "manifest.txt");
    f << "subcommand=" << m.subcommand << '\n'
      << "config=" << m.config_path.string() << '\n'
      << "output_dir=" << m.output_dir.string() << '\n'
      << "git_hash=" << m.git_hash << '\n'
      << "timestamp=" << m.timestamp << '\n';
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Event-triggered backstepping boundary control of reaction-diffusion PDEs", "pbetc"};
    app.require_subcommand(1, 1);
    Options o;

    auto with_config = [&](CLI::App* sub) {
        sub->add_option("config", o.config, "Configuration file")->required()->check(CLI::ExistingFile);
        sub->add_option("--T-final", o.t_final, "Override the simulated horizon in seconds");
    };

    auto* kernel = app.add_subcommand("kernel", "Export K and L on the triangle as CSV (x,y,K,L)");
    with_config(kernel);
    kernel->add_option("--out", o.out, "Output CSV (default: stdout)");

    auto* params = app.add_subcommand("params", "Print every derived trigger constant");
    with_config(params);
    params->add_option("--out", o.out, "Also write the constants as CSV");

    auto* simulate = app.add_subcommand("simulate", "Run one closed-loop simulation");
    with_config(simulate);
    simulate->add_option("--out-dir", o.out_dir, "Directory for trace.csv, events.csv, summary.txt, manifest.txt");

    auto* sweep_cmd = app.add_subcommand("sweep", "Mean dwell times over a list of c values");
    with_config(sweep_cmd);
    sweep_cmd->add_option("--c-list", o.c_list, "Comma-separated c values")->required();
    sweep_cmd->add_option("--kinds", o.kinds, "Comma-separated kinds (default: the config's kind)");
    sweep_cmd->add_option("--out", o.out, "Output CSV (default: stdout)");

    auto* table1 = app.add_subcommand("table1", "Average dwell-time table for all three kinds");
    with_config(table1);
    table1->add_option("--c-list", o.c_list, "Comma-separated c values (default: the published columns)");
    table1->add_option("--out", o.out, "Output CSV (default: stdout)");
    table1->add_option("--details", o.details, "Per-run CSV with min/max dwell and band check");

    auto* verify = app.add_subcommand("verify", "Check a trace CSV against the closed-loop invariants");
    verify->add_option("trace", o.trace, "trace.csv written by simulate")->required()->check(CLI::ExistingFile);
    verify->add_option("--summary", o.summary, "summary.txt (default: next to the trace)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n\n" << app.help();
        return kExitValidation;
    }

    try {
        if (kernel->parsed()) return cmd_kernel(o, out);
        if (params->parsed()) return cmd_params(o, out);
        if (simulate->parsed()) return cmd_simulate(o, out, err);
        if (sweep_cmd->parsed()) return cmd_sweep(o, out, err);
        if (table1->parsed()) return cmd_table1(o, out, err);
        if (verify->parsed()) return cmd_verify(o, out, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitValidation;
    }
    err << app.help();
    return kExitValidation;
}

}  // namespace pbetc
