#include "sigseek/map_io.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace sigseek {
namespace {

// Locations A and B share one parking-level layout. 'a' is the source of
// map A (inside the walled room, visible only through its one-cell door),
// 'b' the source of map B (open floor between pillars).
constexpr std::string_view kGarageLayout = R"(################################
#.................#............#
#.................#............#
#..##.....##......#.......a....#
#..##.....##......#............#
#.................#............#
#.................#............#
#.................######.#######
#..............................#
#..##.....##.........##........#
#..##.....##.........##........#
#..............................#
#..............................#
#..........................b...#
#..##.....##.........##........#
#..##.....##.........##........#
#..............................#
#.S............................#
#..............................#
################################
)";

constexpr std::string_view kOpenLayout = R"(############
#..........#
#..........#
#..........#
#.......X..#
#..........#
#..........#
#..........#
#..........#
#..S.......#
#..........#
############
)";

struct BundledEntry {
  std::string_view name;
  std::string_view layout;
  char source_marker;
  std::string_view description;
};

constexpr std::array<BundledEntry, 3> kBundled{{
    {"map_a", kGarageLayout, 'a', "source occluded inside a walled room with a narrow door"},
    {"map_b", kGarageLayout, 'b', "source in open view between pillars"},
    {"open", kOpenLayout, 'X', "small obstacle-free room"},
}};

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::map<std::string, std::string> read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open map sidecar " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("sidecar line without '=': " + line);
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

double sidecar_number(const std::map<std::string, std::string>& kv, const std::string& key) {
  const auto it = kv.find(key);
  if (it == kv.end()) throw std::invalid_argument("map sidecar is missing '" + key + "'");
  try {
    std::size_t used = 0;
    const double v = std::stod(it->second, &used);
    if (used != it->second.size()) throw std::invalid_argument(key);
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("map sidecar '" + key + "' is not a number");
  }
}

// Next whitespace-separated PGM header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string token;
  while (in) {
    const int c = in.get();
    if (c == EOF) break;
    if (c == '#') {
      std::string skip;
      std::getline(in, skip);
      continue;
    }
    if (std::isspace(c)) {
      if (!token.empty()) break;
      continue;
    }
    token.push_back(static_cast<char>(c));
  }
  if (token.empty()) throw std::invalid_argument("truncated PGM header");
  return token;
}

}  // namespace

MapSpec parse_text_map(std::istream& in, double pitch, std::string name) {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == ';') continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw std::invalid_argument("text map is empty");
  const int width = static_cast<int>(rows.front().size());
  const int height = static_cast<int>(rows.size());

  std::vector<double> p_occ(static_cast<std::size_t>(width) * height, 0.0);
  std::optional<GridCell> start, source;
  for (int r = 0; r < height; ++r) {
    if (static_cast<int>(rows[r].size()) != width) {
      throw std::invalid_argument("text map row " + std::to_string(r) + " has length " +
                                  std::to_string(rows[r].size()) + ", expected " +
                                  std::to_string(width));
    }
    const int iy = height - 1 - r;
    for (int ix = 0; ix < width; ++ix) {
      const char ch = rows[r][ix];
      const std::size_t idx = static_cast<std::size_t>(iy) * width + ix;
      switch (ch) {
        case '.': break;
        case '#': p_occ[idx] = 1.0; break;
        case 'S':
          if (start) throw std::invalid_argument("text map has more than one 'S'");
          start = GridCell{ix, iy};
          break;
        case 'X':
          if (source) throw std::invalid_argument("text map has more than one 'X'");
          source = GridCell{ix, iy};
          break;
        default:
          throw std::invalid_argument(std::string("text map has unknown character '") + ch + "'");
      }
    }
  }
  if (!start) throw std::invalid_argument("text map has no start 'S'");
  if (!source) throw std::invalid_argument("text map has no source 'X'");
  OccupancyGrid grid(width, height, pitch, std::move(p_occ));
  const Location src = grid.center(*source);
  return {std::move(name), std::move(grid), src, *start, {}};
}

OccupancyGrid parse_pgm(std::istream& in, double pitch) {
  const std::string magic = pgm_token(in);
  if (magic != "P5" && magic != "P2") throw std::invalid_argument("not a PGM file");
  const int width = std::stoi(pgm_token(in));
  const int height = std::stoi(pgm_token(in));
  const int maxval = std::stoi(pgm_token(in));
  if (width <= 0 || height <= 0 || maxval <= 0 || maxval > 65535) {
    throw std::invalid_argument("invalid PGM header");
  }

  std::vector<double> p_occ(static_cast<std::size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    for (int ix = 0; ix < width; ++ix) {
      int v = 0;
      if (magic == "P2") {
        v = std::stoi(pgm_token(in));
      } else if (maxval < 256) {
        v = in.get();
      } else {
        const int hi = in.get();
        v = (hi << 8) | in.get();
      }
      if (!in || v < 0 || v > maxval) throw std::invalid_argument("truncated PGM raster");
      const int iy = height - 1 - r;
      p_occ[static_cast<std::size_t>(iy) * width + ix] = 1.0 - static_cast<double>(v) / maxval;
    }
  }
  return OccupancyGrid(width, height, pitch, std::move(p_occ));
}

MapSpec load_map(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot open map " + path.string());
  std::filesystem::path sidecar = path;
  sidecar += ".meta";

  if (path.extension() == ".pgm") {
    const auto kv = read_sidecar(sidecar);
    OccupancyGrid grid = parse_pgm(in, sidecar_number(kv, "pitch"));
    const auto to_cell = [&](const std::string& prefix) {
      const int col = static_cast<int>(sidecar_number(kv, prefix + "_col"));
      const int row = static_cast<int>(sidecar_number(kv, prefix + "_row"));
      return GridCell{col, grid.height() - 1 - row};
    };
    const GridCell source = to_cell("source");
    const GridCell start = to_cell("start");
    if (!grid.in_bounds(source)) throw std::invalid_argument("map source outside the image");
    const Location src = grid.center(source);
    return {path.stem().string(), std::move(grid), src, start, {}};
  }

  double pitch = 1.0;
  if (std::filesystem::exists(sidecar)) {
    const auto kv = read_sidecar(sidecar);
    if (kv.count("pitch")) pitch = sidecar_number(kv, "pitch");
  }
  return parse_text_map(in, pitch, path.stem().string());
}

std::vector<std::string> bundled_map_names() {
  std::vector<std::string> names;
  for (const auto& entry : kBundled) names.emplace_back(entry.name);
  return names;
}

MapSpec bundled_map(std::string_view name) {
  const auto it = std::find_if(kBundled.begin(), kBundled.end(),
                               [&](const BundledEntry& e) { return e.name == name; });
  if (it == kBundled.end()) throw std::invalid_argument("unknown bundled map '" + std::string(name) + "'");

  std::string layout(it->layout);
  for (char& ch : layout) {
    if (ch == it->source_marker) {
      ch = 'X';
    } else if (ch == 'a' || ch == 'b') {
      ch = '.';
    }
  }
  std::istringstream in(layout);
  MapSpec spec = parse_text_map(in, 1.0, std::string(it->name));
  spec.description = std::string(it->description);
  return spec;
}

MapSpec resolve_map(const std::string& name_or_path) {
  const auto names = bundled_map_names();
  if (std::find(names.begin(), names.end(), name_or_path) != names.end()) {
    return bundled_map(name_or_path);
  }
  return load_map(name_or_path);
}

}  // namespace sigseek
