#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "pbetc/simulator.hpp"

namespace pbetc {

struct DwellStats {
    std::size_t count;  ///< events with t < horizon
    double mean_dwell;
    double min_dwell;
    double max_dwell;
    double horizon;
};

/// Gaps between consecutive events with t < horizon; the final partial
/// interval up to the horizon is not counted. Throws EmptyLog for < 2 events.
DwellStats dwell_stats(const std::vector<double>& events, double horizon);

inline constexpr const char* kAveragingConvention =
    "mean of consecutive inter-event gaps over events with t_event < horizon; final partial interval excluded";

/// c values of the published average dwell-time table.
inline constexpr std::array<double, 7> kTable1C{0.0, 0.001, 0.01, 0.1, 1.0, 10.0, 100.0};

/// Published average dwell time for (kind, c), if c is one of kTable1C.
std::optional<double> table1_reference(TriggerKind kind, double c);

inline constexpr double kTable1Band = 0.15;

struct SweepRow {
    TriggerKind kind;
    double c;
    TriggerFamily family;
    std::optional<DwellStats> stats;
    std::size_t violations = 0;
    std::optional<double> reference;
    std::string error;  ///< non-empty when the run threw

    bool within_band() const;
};

/// Called once per finished run from the worker thread that produced it; the
/// index identifies the row, so writing to a preallocated slot is safe.
using SweepInspector = std::function<void(std::size_t, const SimConfig&, const SimOutput&)>;

/// Configuration for one sweep cell: kind and c substituted into the base.
/// c = 0 runs the regular family.
SimConfig sweep_config(const SimConfig& base, TriggerKind kind, double c);

/// One run per (kind, c), rows ordered kind-major. Runs execute on up to
/// `threads` workers; output order does not depend on scheduling.
std::vector<SweepRow> sweep(const SimConfig& base, const std::vector<TriggerKind>& kinds,
                            const std::vector<double>& c_values, unsigned threads,
                            const SweepInspector& inspect = {});

/// The three kinds against the given c values.
std::vector<SweepRow> table1_sweep(const SimConfig& base, const std::vector<double>& c_values, unsigned threads,
                                   const SweepInspector& inspect = {});

/// Worker count from PBETC_THREADS, else hardware concurrency (at least 1).
unsigned threads_from_env();

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
/// One line per kind, one column per c, plus whether every cell is within the band.
void write_table1_csv(std::ostream& os, const std::vector<SweepRow>& rows);

/// key=value run metadata, including the constants `verify` needs.
Summary summarize(const SimOutput& out, const SimConfig& config);

}  // namespace pbetc
