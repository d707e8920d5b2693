#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pbetc/plant.hpp"
#include "pbetc/triggers.hpp"

namespace pbetc {

/// Square pulse added to the Robin boundary data.
struct Disturbance {
    double amplitude = 0.0;
    double start = 0.0;
    double duration = 0.0;

    bool active(double t) const noexcept { return t >= start && t < start + duration; }
    bool operator==(const Disturbance&) const = default;
};

struct SimConfig {
    PlantConfig plant;
    UserParams user;
    TriggerKind kind = TriggerKind::CETC;
    double dt = 1e-3;
    double T_final = 1.0;
    int record_stride = 1;
    std::optional<Disturbance> disturbance;

    void validate() const;
    bool operator==(const SimConfig&) const = default;
};

struct TraceRow {
    double t;
    double norm_u;
    double V;
    double W;      ///< raw residual
    double Gamma;  ///< continuous trigger function before any event at this instant
    double m;
    double U;      ///< held input after any event at this instant
    double u1;
    bool fired;
    double d;      ///< holding error after any event at this instant
    double W_eff;  ///< residual as used by the trigger
};

struct Violation {
    std::string check;
    std::size_t index;  ///< trace row, or event index for dwell/event checks
    double t;
    double value;
    double limit;
};

struct SimOutput {
    std::vector<TraceRow> trace;
    std::vector<double> events;
    std::vector<double> planned_dwells;  ///< self-trigger only: dwell planned at each event
    DerivedParams derived;
    std::vector<Violation> violations;
    double dt;
    double T_final;
    double norm_u0;
    bool disturbed;
};

/// Run the closed loop. Throws BarrierBreach when the barrier is crossed and no
/// disturbance is configured.
SimOutput run(const SimConfig& config);

/// Constants the invariant checks need, so traces can be verified without a run.
struct InvariantLimits {
    TriggerKind kind;
    double b_star;
    double V0;
    double M;
    double tau;
    double h;
    double dt;
    double m0;
    double gamma;
    double norm_u0;
};

InvariantLimits limits_of(const SimOutput& out);

/// Barrier, positivity, dwell floors, decay estimate, event ordering, input
/// holding and (PETC/STC) trigger soundness. Violations are reported, never thrown.
std::vector<Violation> check_trace(const std::vector<TraceRow>& trace, const std::vector<double>& events,
                                   const std::vector<double>& planned_dwells, const InvariantLimits& limits);

struct InvariantReport {
    bool passed;
    std::vector<Violation> violations;
};

InvariantReport verify_invariants(const SimOutput& out);

// CSV and summary I/O.

std::string format_double(double v);
void write_trace_csv(std::ostream& os, const std::vector<TraceRow>& trace);
std::vector<TraceRow> read_trace_csv(std::istream& is);
void write_events_csv(std::ostream& os, const std::vector<double>& events);
std::vector<double> events_from_trace(const std::vector<TraceRow>& trace);

using Summary = std::map<std::string, std::string>;
void write_summary(std::ostream& os, const Summary& summary);
Summary read_summary(std::istream& is);
InvariantLimits limits_from_summary(const Summary& summary);

}  // namespace pbetc
