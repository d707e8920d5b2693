#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pbetc/simulator.hpp"

namespace pbetc {

/// Parse a flat key=value file with [plant], [trigger] and [sim] sections.
/// Syntax problems and unknown keys raise ParseError with the line number;
/// missing or inadmissible values raise ValidationError naming the constraint.
SimConfig parse_config(const std::filesystem::path& path);

/// As parse_config; relative csv: paths resolve against base_dir.
SimConfig parse_config_text(std::string_view text, const std::filesystem::path& base_dir = {});

/// Profile from a preset: constant:<v>, affine:<a>,<b>, quartic:<A>
/// (A x^2 (x-1)^2), zero, values:<v0>,<v1>,..., or csv:<path> with two columns x,value.
SpatialProfile parse_profile(std::string_view spec, const Grid& grid, const std::filesystem::path& base_dir = {});

/// Text that parse_config_text maps back to an equal SimConfig.
std::string serialize_config(const SimConfig& config);

/// Short stable hash of the serialized configuration.
std::string config_hash(const SimConfig& config);

/// Built-in copy of configs/paper_sec4.cfg (P-CETC, c = 1).
SimConfig example_config();

}  // namespace pbetc
