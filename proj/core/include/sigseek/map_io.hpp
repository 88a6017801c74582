#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "sigseek/grid.hpp"

namespace sigseek {

/// A world layout: occupancy, source and robot start.
struct MapSpec {
  std::string name;
  OccupancyGrid grid;
  Location source;
  GridCell start;
  std::string description;
};

/// Character grid, one row per line, first line is the top (largest y).
/// '.' free, '#' occupied, 'S' robot start, 'X' source (free). Exactly one
/// 'S' and one 'X' are required. Blank lines and lines starting with ';'
/// are ignored. Throws std::invalid_argument on malformed input.
MapSpec parse_text_map(std::istream& in, double pitch = 1.0, std::string name = "text");

/// Binary (P5) or ASCII (P2) PGM: pixel value 0 is occupied, the maximum
/// value is free, intermediate values map linearly to p_occ = 1 - v/max.
/// The first image row is the top of the map.
OccupancyGrid parse_pgm(std::istream& in, double pitch);

/// Loads `path`. A `.pgm` file needs a sidecar `<path>.meta` with
/// `key = value` lines for pitch, source_col, source_row, start_col and
/// start_row (rows counted from the top of the image). Any other extension
/// is read as a text map; its optional sidecar may set `pitch`.
MapSpec load_map(const std::filesystem::path& path);

/// Names accepted by bundled_map().
std::vector<std::string> bundled_map_names();
/// Throws std::invalid_argument for an unknown name.
MapSpec bundled_map(std::string_view name);

/// A bundled name, or else a file path.
MapSpec resolve_map(const std::string& name_or_path);

}  // namespace sigseek
