#pragma once

#include <optional>
#include <string>
#include <string_view>

namespace pbetc {

/// How the controller decides when to resample: continuous supervision,
/// periodic checks every h, or a self-computed next event time.
enum class TriggerKind { CETC, PETC, STC };

/// Regular triggers enforce a strict Lyapunov decrease and ignore the
/// performance residual; performance-barrier triggers add the c*W slack.
enum class TriggerFamily { Regular, PerformanceBarrier };

std::string_view to_string(TriggerKind kind) noexcept;
std::string_view to_string(TriggerFamily family) noexcept;
std::optional<TriggerKind> parse_trigger_kind(std::string_view text) noexcept;
std::optional<TriggerFamily> parse_trigger_family(std::string_view text) noexcept;

}  // namespace pbetc
