#include "sigseek/harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace sigseek {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(key, "expected a number, got '" + text + "'");
  }
  return v;
}

std::uint64_t parse_unsigned(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  std::uint64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(key, "expected a non-negative integer, got '" + text + "'");
  }
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ConfigError(key, "expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(key, "expected true or false, got '" + text + "'");
}

template <typename Member>
ConfigKey double_key(std::string name, std::string help, Member member) {
  return {name, std::move(help),
          [name, member](RunConfig& c, const std::string& v) { member(c) = parse_double(name, v); },
          [member](const RunConfig& c) {
            return format_double(member(const_cast<RunConfig&>(c)));
          }};
}

template <typename Member>
ConfigKey size_key(std::string name, std::string help, Member member) {
  return {name, std::move(help),
          [name, member](RunConfig& c, const std::string& v) {
            member(c) = static_cast<std::size_t>(parse_unsigned(name, v));
          },
          [member](const RunConfig& c) {
            return std::to_string(member(const_cast<RunConfig&>(c)));
          }};
}

std::vector<ConfigKey> build_config_keys() {
  std::vector<ConfigKey> keys;
  keys.push_back({"map", "bundled map name or map file path",
                  [](RunConfig& c, const std::string& v) { c.map = trim(v); },
                  [](const RunConfig& c) { return c.map; }});
  keys.push_back({"model", "factor_graph | gp | gp_limited",
                  [](RunConfig& c, const std::string& v) {
                    try {
                      c.model = parse_model_kind(trim(v));
                    } catch (const std::invalid_argument& e) {
                      throw ConfigError("model", e.what());
                    }
                  },
                  [](const RunConfig& c) { return std::string(to_string(c.model)); }});
  keys.push_back({"seed", "random seed",
                  [](RunConfig& c, const std::string& v) { c.seed = parse_unsigned("seed", v); },
                  [](const RunConfig& c) { return std::to_string(c.seed); }});
  keys.push_back({"budget", "mission seconds, or 'auto' for two traversals of the map",
                  [](RunConfig& c, const std::string& v) {
                    if (trim(v) == "auto") {
                      c.budget.reset();
                    } else {
                      c.budget = parse_double("budget", v);
                    }
                  },
                  [](const RunConfig& c) {
                    return c.budget ? format_double(*c.budget) : std::string("auto");
                  }});
  keys.push_back({"output_dir", "directory for CSV and plot output",
                  [](RunConfig& c, const std::string& v) { c.output_dir = trim(v); },
                  [](const RunConfig& c) { return c.output_dir; }});
  keys.push_back({"irm_width", "local IRM window width in cells",
                  [](RunConfig& c, const std::string& v) { c.irm_width = parse_int("irm_width", v); },
                  [](const RunConfig& c) { return std::to_string(c.irm_width); }});
  keys.push_back({"irm_height", "local IRM window height in cells",
                  [](RunConfig& c, const std::string& v) {
                    c.irm_height = parse_int("irm_height", v);
                  },
                  [](const RunConfig& c) { return std::to_string(c.irm_height); }});

  keys.push_back({"d_min", "minimum spacing of global nodes and GP training points (m)",
                  [](RunConfig& c, const std::string& v) {
                    c.signal.d_min = c.gp.d_min = parse_double("d_min", v);
                  },
                  [](const RunConfig& c) { return format_double(c.signal.d_min); }});
  keys.push_back(double_key("epsilon", "link variance floor",
                            [](RunConfig& c) -> double& { return c.signal.epsilon; }));
  keys.push_back(double_key("alpha_dist", "link variance per meter",
                            [](RunConfig& c) -> double& { return c.signal.alpha_dist; }));
  keys.push_back(double_key("alpha_occ", "link variance per unit occupancy",
                            [](RunConfig& c) -> double& { return c.signal.alpha_occ; }));
  keys.push_back(double_key("sigma2_meas", "factor-graph measurement variance",
                            [](RunConfig& c) -> double& { return c.signal.sigma2_meas; }));
  keys.push_back(size_key("k_g", "global nodes linked into each local graph",
                          [](RunConfig& c) -> std::size_t& { return c.signal.k_g; }));

  keys.push_back(double_key("length_scale", "GP kernel length scale (m)",
                            [](RunConfig& c) -> double& { return c.gp.length_scale; }));
  keys.push_back(double_key("sigma2_obs", "GP observation variance",
                            [](RunConfig& c) -> double& { return c.gp.sigma2_obs; }));
  keys.push_back(size_key("gp_limit", "training points used by gp_limited",
                          [](RunConfig& c) -> std::size_t& { return c.gp_limit; }));

  keys.push_back(double_key("beta", "UCB exploration weight",
                            [](RunConfig& c) -> double& { return c.objective.beta; }));
  keys.push_back(double_key("xi", "EI exploration offset",
                            [](RunConfig& c) -> double& { return c.objective.xi; }));
  keys.push_back(double_key("lambda_front", "front-loading decay per second",
                            [](RunConfig& c) -> double& { return c.objective.lambda_front; }));
  keys.push_back(double_key("gamma", "local-plan discount per step",
                            [](RunConfig& c) -> double& { return c.objective.gamma; }));
  keys.push_back({"standard_ei", "divide EI improvement by sigma instead of variance",
                  [](RunConfig& c, const std::string& v) {
                    c.objective.standard_ei = parse_bool("standard_ei", v);
                  },
                  [](const RunConfig& c) {
                    return std::string(c.objective.standard_ei ? "true" : "false");
                  }});

  keys.push_back({"local_horizon", "local plan depth in lattice steps",
                  [](RunConfig& c, const std::string& v) {
                    c.planner.local_horizon = parse_int("local_horizon", v);
                  },
                  [](const RunConfig& c) { return std::to_string(c.planner.local_horizon); }});
  keys.push_back(size_key("local_beam_width", "partial local paths kept per depth (0 = all)",
                          [](RunConfig& c) -> std::size_t& { return c.planner.local_beam_width; }));
  keys.push_back(double_key("speed", "robot speed (m/s)",
                            [](RunConfig& c) -> double& { return c.planner.speed; }));
  keys.push_back(size_key("max_frontier_sequence", "longest frontier sequence considered",
                          [](RunConfig& c) -> std::size_t& {
                            return c.planner.max_frontier_sequence;
                          }));
  keys.push_back(size_key("exhaustive_frontier_limit",
                          "frontier count up to which sequences are enumerated exhaustively",
                          [](RunConfig& c) -> std::size_t& {
                            return c.planner.exhaustive_frontier_limit;
                          }));
  keys.push_back(double_key("p_hat_local", "success estimate of local policies",
                            [](RunConfig& c) -> double& { return c.planner.p_hat_local; }));
  keys.push_back(double_key("p_hat_global", "success estimate of global policies",
                            [](RunConfig& c) -> double& { return c.planner.p_hat_global; }));
  keys.push_back(double_key("cost_weight", "utility cost per second of travel",
                            [](RunConfig& c) -> double& { return c.planner.cost_weight; }));
  keys.push_back(double_key("surprise_sigmas", "replan when a reading deviates this many sigmas",
                            [](RunConfig& c) -> double& { return c.planner.surprise_sigmas; }));
  keys.push_back(double_key("irm_refresh_distance", "replan after moving this far (m)",
                            [](RunConfig& c) -> double& {
                              return c.planner.irm_refresh_distance;
                            }));

  keys.push_back(double_key("p0_db", "field SNR at the reference distance (dB)",
                            [](RunConfig& c) -> double& { return c.field.p0_db; }));
  keys.push_back(double_key("path_loss_exponent", "path-loss exponent",
                            [](RunConfig& c) -> double& { return c.field.path_loss_exponent; }));
  keys.push_back(double_key("reference_distance", "path-loss reference distance (m)",
                            [](RunConfig& c) -> double& { return c.field.reference_distance; }));
  keys.push_back(double_key("wall_attenuation_db", "attenuation per occupied cell crossed (dB)",
                            [](RunConfig& c) -> double& { return c.field.wall_attenuation_db; }));
  keys.push_back(double_key("noise_std_db", "measurement noise standard deviation (dB)",
                            [](RunConfig& c) -> double& { return c.field.noise_std_db; }));
  return keys;
}

// Parameter validators report "<field> must ..."; the field is the first word.
template <typename F>
void validate_group(F&& check) {
  try {
    check();
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    throw ConfigError(msg.substr(0, msg.find(' ')), msg);
  }
}

double scale_value(double db, double lo, double hi) {
  const double range = hi - lo;
  if (!(range > 0.0)) return 1.0;
  return std::clamp((db - lo) / range, 0.0, 1.0);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

constexpr std::string_view kTraceHeader =
    "step,time,x,y,snr_db,scaled,max_snr_db,cumulative_snr_db,cumulative_scaled,inference_ms,"
    "cache_hits,cache_misses,policy";

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::factor_graph: return "factor_graph";
    case ModelKind::gp: return "gp";
    case ModelKind::gp_limited: return "gp_limited";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "factor_graph") return ModelKind::factor_graph;
  if (name == "gp") return ModelKind::gp;
  if (name == "gp_limited") return ModelKind::gp_limited;
  throw std::invalid_argument("unknown model '" + std::string(name) +
                              "' (expected factor_graph, gp or gp_limited)");
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_config_keys();
  return keys;
}

void apply_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  const auto& keys = config_keys();
  const auto it = std::find_if(keys.begin(), keys.end(),
                               [&](const ConfigKey& k) { return k.name == key; });
  if (it == keys.end()) throw ConfigError(key, "unknown configuration key");
  it->set(config, value);
}

void apply_config_stream(RunConfig& config, std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    apply_config_value(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void apply_config_file(RunConfig& config, const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open " + path.string());
  apply_config_stream(config, in);
}

void RunConfig::validate() const {
  if (map.empty()) throw ConfigError("map", "must not be empty");
  if (irm_width < 1) throw ConfigError("irm_width", "must be >= 1");
  if (irm_height < 1) throw ConfigError("irm_height", "must be >= 1");
  if (budget && !(std::isfinite(*budget) && *budget >= 0.0)) {
    throw ConfigError("budget", "must be finite and >= 0");
  }
  if (gp_limit < 1) throw ConfigError("gp_limit", "must be >= 1");
  validate_group([&] { signal.validate(); });
  validate_group([&] { gp.validate(); });
  validate_group([&] { objective.validate(); });
  validate_group([&] { planner.validate(); });
  validate_group([&] { field.validate(); });
}

std::unique_ptr<SignalModel> make_model(const RunConfig& config) {
  switch (config.model) {
    case ModelKind::factor_graph:
      return std::make_unique<SignalBelief>(config.signal);
    case ModelKind::gp: {
      GPParams p = config.gp;
      p.limit_k.reset();
      return std::make_unique<GpSignalModel>(p);
    }
    case ModelKind::gp_limited: {
      GPParams p = config.gp;
      p.limit_k = config.gp_limit;
      return std::make_unique<GpSignalModel>(p);
    }
  }
  throw std::logic_error("make_model: unhandled model kind");
}

double default_budget(const MapSpec& map, double speed) {
  std::size_t free_cells = 0;
  for (std::size_t i = 0; i < map.grid.cell_count(); ++i) {
    if (!map.grid.occupied(map.grid.cell(i))) ++free_cells;
  }
  return 2.0 * static_cast<double>(free_cells) * map.grid.pitch() / speed;
}

SimulatedWorld::SimulatedWorld(Environment& env, int irm_width, int irm_height, double speed)
    : env_(env), irm_width_(irm_width), irm_height_(irm_height), speed_(speed) {}

LocalIRM SimulatedWorld::local_irm(const Location& robot) {
  return extract_local_irm(env_, robot, irm_width_, irm_height_, next_irm_id_++);
}

FrontierSet SimulatedWorld::frontiers(const Location& robot) {
  return extract_frontiers(env_, robot, speed_).frontiers;
}

std::vector<Location> SimulatedWorld::route(const Location& from, const Location& to) {
  const OccupancyGrid& g = env_.grid();
  std::vector<Location> out;
  for (const GridCell& c : shortest_path(env_, g.cell_at(from), g.cell_at(to), true)) {
    out.push_back(g.center(c));
  }
  return out;
}

double SimulatedWorld::step_time() const { return env_.grid().pitch() / speed_; }

double MetricTrace::final_max_snr_db() const {
  if (rows.empty()) throw std::logic_error("empty trace");
  return rows.back().max_snr_db;
}

double MetricTrace::final_cumulative_scaled() const {
  if (rows.empty()) throw std::logic_error("empty trace");
  return rows.back().cumulative_scaled;
}

void write_trace_csv(std::ostream& out, const MetricTrace& trace) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << kTraceHeader << '\n';
  for (const MetricRow& r : trace.rows) {
    out << r.step << ',' << r.time << ',' << r.x << ',' << r.y << ',' << r.snr_db << ','
        << r.scaled << ',' << r.max_snr_db << ',' << r.cumulative_snr_db << ','
        << r.cumulative_scaled << ',' << r.inference_ms << ',' << r.cache_hits << ','
        << r.cache_misses << ',' << r.policy << '\n';
  }
  out.precision(old);
}

MetricTrace read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != kTraceHeader) {
    throw std::invalid_argument("trace CSV: unexpected header");
  }
  MetricTrace trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 13) {
      throw std::invalid_argument("trace CSV line " + std::to_string(line_no) +
                                  ": expected 13 fields");
    }
    auto num = [&](std::size_t i) {
      double v = 0.0;
      const auto res = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
      if (res.ec != std::errc() || res.ptr != f[i].data() + f[i].size()) {
        throw std::invalid_argument("trace CSV line " + std::to_string(line_no) +
                                    ": bad number '" + f[i] + "'");
      }
      return v;
    };
    auto count = [&](std::size_t i) {
      std::uint64_t v = 0;
      const auto res = std::from_chars(f[i].data(), f[i].data() + f[i].size(), v);
      if (res.ec != std::errc() || res.ptr != f[i].data() + f[i].size()) {
        throw std::invalid_argument("trace CSV line " + std::to_string(line_no) +
                                    ": bad integer '" + f[i] + "'");
      }
      return v;
    };
    MetricRow r;
    r.step = count(0);
    r.time = num(1);
    r.x = num(2);
    r.y = num(3);
    r.snr_db = num(4);
    r.scaled = num(5);
    r.max_snr_db = num(6);
    r.cumulative_snr_db = num(7);
    r.cumulative_scaled = num(8);
    r.inference_ms = num(9);
    r.cache_hits = count(10);
    r.cache_misses = count(11);
    r.policy = f[12];
    trace.rows.push_back(std::move(r));
  }
  return trace;
}

MissionResult run_mission(const RunConfig& config) {
  config.validate();
  const MapSpec spec = [&] {
    try {
      return resolve_map(config.map);
    } catch (const std::exception& e) {
      throw ConfigError("map", e.what());
    }
  }();
  return run_mission(config, spec);
}

MissionResult run_mission(const RunConfig& config, const MapSpec& spec) {
  config.validate();
  const auto started = Clock::now();

  std::optional<Environment> env_storage;
  try {
    env_storage.emplace(spec.grid, spec.source, spec.start, config.field, config.seed);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("map", e.what());
  }
  Environment& env = *env_storage;

  MissionResult result;
  result.map = spec.name;
  result.model = config.model;
  result.seed = config.seed;
  result.budget = config.budget.value_or(default_budget(spec, config.planner.speed));
  result.ground_truth_max_db = ground_truth_max(env);
  result.ground_truth_min_db = ground_truth_min(env);
  const double lo = result.ground_truth_min_db;
  const double hi = result.ground_truth_max_db;

  std::unique_ptr<SignalModel> model = make_model(config);
  SimulatedWorld world(env, config.irm_width, config.irm_height, config.planner.speed);
  ReplanController controller(config.objective, config.planner);
  MissionClock clock(result.budget);
  std::mt19937_64 rng(config.seed);

  Location robot = env.start();
  auto record = [&](const Measurement& m, double inference_ms, CacheStats cache,
                    std::string policy) {
    const double scaled = scale_value(m.value, lo, hi);
    MetricRow next;
    next.step = result.trace.rows.size();
    next.time = clock.elapsed();
    next.x = m.location.x;
    next.y = m.location.y;
    next.snr_db = m.value;
    next.scaled = scaled;
    if (result.trace.rows.empty()) {
      next.max_snr_db = m.value;
      next.cumulative_snr_db = m.value;
      next.cumulative_scaled = scaled;
    } else {
      const MetricRow& prev = result.trace.rows.back();
      next.max_snr_db = std::max(prev.max_snr_db, m.value);
      next.cumulative_snr_db = prev.cumulative_snr_db + m.value;
      next.cumulative_scaled = prev.cumulative_scaled + scaled;
    }
    next.inference_ms = inference_ms;
    next.cache_hits = cache.hits;
    next.cache_misses = cache.misses;
    next.policy = std::move(policy);
    result.trace.rows.push_back(std::move(next));
    return Measurement{m.location, scaled, m.time_index};
  };

  {
    const Measurement m0 = sample_measurement(env, robot, rng, 0);
    const auto t0 = Clock::now();
    model->add_measurement(record(m0, 0.0, {}, "init"));
    result.trace.rows.back().inference_ms = 1e3 * seconds_since(t0);
  }

  const double step_time = world.step_time();
  for (std::uint64_t step = 1;; ++step) {
    const auto t0 = Clock::now();
    const std::size_t episodes_before = controller.episodes().size();
    const std::optional<Location> waypoint = controller.replan_step(*model, world, robot, clock);
    double inference_ms = 1e3 * seconds_since(t0);
    if (!waypoint) break;

    const MoveResult move = move_robot(env, robot, *waypoint, config.planner.speed);
    // Waiting in place still occupies one lattice step.
    const double elapsed = std::max(move.elapsed, step_time);
    if (elapsed > clock.remaining() + 1e-9) break;
    clock.advance(std::min(elapsed, clock.remaining()));
    robot = move.location;

    CacheStats cache;
    if (controller.episodes().size() > episodes_before) cache = controller.episodes().back().cache;
    const Measurement m = sample_measurement(env, robot, rng, step);
    const Measurement scaled =
        record(m, 0.0, cache, std::string(to_string(controller.current_policy().kind)));
    const auto t1 = Clock::now();
    controller.observe(*model, scaled);
    inference_ms += 1e3 * seconds_since(t1);
    result.trace.rows.back().inference_ms = inference_ms;
  }

  result.episodes = controller.episodes();
  std::ostringstream snapshot;
  model->write_snapshot_csv(snapshot);
  result.belief_snapshot_csv = snapshot.str();
  result.wall_seconds = seconds_since(started);
  return result;
}

void write_mission_outputs(const MissionResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "trace.csv");
    write_trace_csv(out, result.trace);
  }
  {
    std::ofstream out(dir / "belief_snapshot.csv");
    out << result.belief_snapshot_csv;
  }
  std::ofstream out(dir / "policies.csv");
  out.precision(std::numeric_limits<double>::max_digits10);
  out << "time,kind,predicted_reward,predicted_duration,cache_hits,cache_misses,wall_seconds,"
         "trigger\n";
  for (const PlanningEpisode& e : result.episodes) {
    out << e.time << ',' << to_string(e.kind) << ',' << e.predicted_reward << ','
        << e.predicted_duration << ',' << e.cache.hits << ',' << e.cache.misses << ','
        << e.wall_seconds << ',' << e.trigger << '\n';
  }
}

SummaryRow summarize(const MissionResult& result) {
  SummaryRow row;
  row.map = result.map;
  row.model = result.model;
  row.seed = result.seed;
  row.budget = result.budget;
  row.final_max_snr_db = result.trace.final_max_snr_db();
  row.ground_truth_max_db = result.ground_truth_max_db;
  row.gap_db = result.ground_truth_max_db - row.final_max_snr_db;
  row.cumulative_snr_db = result.trace.rows.back().cumulative_snr_db;
  row.cumulative_scaled = result.trace.final_cumulative_scaled();
  row.steps = result.trace.rows.size() - 1;
  row.replans = result.episodes.size();
  row.wall_seconds = result.wall_seconds;
  return row;
}

std::vector<SummaryRow> compare_models(const std::vector<RunConfig>& configs,
                                       const std::vector<std::uint64_t>& seeds,
                                       std::size_t jobs) {
  if (configs.empty() || seeds.empty()) return {};
  for (const RunConfig& c : configs) {
    for (const ConfigKey& key : config_keys()) {
      if (key.name == "map" || key.name == "model" || key.name == "seed" ||
          key.name == "output_dir") {
        continue;
      }
      if (key.get(c) != key.get(configs.front())) {
        throw ConfigError(key.name, "compared configurations differ in more than map and model");
      }
    }
    c.validate();
  }

  struct Task {
    RunConfig config;
  };
  std::vector<Task> tasks;
  for (const RunConfig& c : configs) {
    for (const std::uint64_t seed : seeds) {
      Task t{c};
      t.config.seed = seed;
      tasks.push_back(std::move(t));
    }
  }

  std::vector<SummaryRow> rows(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        rows[i] = summarize(run_mission(tasks[i].config));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::clamp<std::size_t>(jobs, 1, tasks.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "map,model,seed,budget,final_max_snr_db,ground_truth_max_db,gap_db,cumulative_snr_db,"
         "cumulative_scaled,steps,replans,wall_seconds\n";
  for (const SummaryRow& r : rows) {
    out << r.map << ',' << to_string(r.model) << ',' << r.seed << ',' << r.budget << ','
        << r.final_max_snr_db << ',' << r.ground_truth_max_db << ',' << r.gap_db << ','
        << r.cumulative_snr_db << ',' << r.cumulative_scaled << ',' << r.steps << ','
        << r.replans << ',' << r.wall_seconds << '\n';
  }
  out.precision(old);
}

void write_summary_aggregate_csv(std::ostream& out, const std::vector<SummaryRow>& rows,
                                 double gap_threshold_db) {
  std::vector<std::pair<std::string, ModelKind>> groups;
  for (const SummaryRow& r : rows) {
    const auto key = std::make_pair(r.map, r.model);
    if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
  }
  auto mean_std = [](const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    const double sd = v.size() > 1 ? std::sqrt(ss / static_cast<double>(v.size() - 1)) : 0.0;
    return std::make_pair(mean, sd);
  };

  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "map,model,trials,mean_final_max_snr_db,std_final_max_snr_db,mean_cumulative_scaled,"
         "std_cumulative_scaled,within_gap,gap_threshold_db\n";
  for (const auto& [map, model] : groups) {
    std::vector<double> max_snr, cumulative;
    std::size_t within = 0;
    for (const SummaryRow& r : rows) {
      if (r.map != map || r.model != model) continue;
      max_snr.push_back(r.final_max_snr_db);
      cumulative.push_back(r.cumulative_scaled);
      if (r.gap_db <= gap_threshold_db) ++within;
    }
    const auto [m_mean, m_sd] = mean_std(max_snr);
    const auto [c_mean, c_sd] = mean_std(cumulative);
    out << map << ',' << to_string(model) << ',' << max_snr.size() << ',' << m_mean << ','
        << m_sd << ',' << c_mean << ',' << c_sd << ',' << within << ',' << gap_threshold_db
        << '\n';
  }
  out.precision(old);
}

std::vector<Location> lawnmower_path(const OccupancyGrid& grid) {
  std::vector<Location> path;
  for (int iy = 0; iy < grid.height(); ++iy) {
    for (int k = 0; k < grid.width(); ++k) {
      const int ix = iy % 2 == 0 ? k : grid.width() - 1 - k;
      if (!grid.occupied({ix, iy})) path.push_back(grid.center({ix, iy}));
    }
  }
  return path;
}

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  if (xs.size() != ys.size() || xs.size() < 2) {
    throw std::invalid_argument("loglog_slope: need at least two paired points");
  }
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!(xs[i] > 0.0) || !(ys[i] > 0.0)) throw std::invalid_argument("loglog_slope: non-positive");
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(xs[i]) - mx;
    sxy += dx * (std::log(ys[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::invalid_argument("loglog_slope: all x equal");
  return sxy / sxx;
}

ScalingResult run_scaling_benchmark(const RunConfig& config, const ScalingConfig& scaling) {
  config.validate();
  if (!std::is_sorted(scaling.counts.begin(), scaling.counts.end())) {
    throw ConfigError("counts", "must be ascending");
  }
  if (std::find(scaling.counts.begin(), scaling.counts.end(), 0) != scaling.counts.end()) {
    throw ConfigError("counts", "must be >= 1");
  }
  if (scaling.calls == 0) throw ConfigError("calls", "must be >= 1");
  if (scaling.hypothesis_pool == 0) throw ConfigError("hypothesis_pool", "must be >= 1");

  MapSpec spec = [&] {
    try {
      return resolve_map(config.map);
    } catch (const std::exception& e) {
      throw ConfigError("map", e.what());
    }
  }();
  Environment env(spec.grid, spec.source, spec.start, config.field, config.seed);
  const double lo = ground_truth_min(env);
  const double hi = ground_truth_max(env);
  const std::vector<Location> sweep = lawnmower_path(env.grid());

  ScalingResult result;
  for (const std::size_t count : scaling.counts) {
    std::mt19937_64 rng(config.seed ^ (0x9e3779b97f4a7c15ULL * (count + 1)));
    std::vector<Measurement> trace;
    trace.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
      Measurement m = sample_measurement(env, sweep[i % sweep.size()], rng, i);
      m.value = scale_value(m.value, lo, hi);
      trace.push_back(m);
    }
    const Location robot = trace.back().location;
    const LocalIRM irm = extract_local_irm(env, robot, config.irm_width, config.irm_height);

    std::vector<std::size_t> free_nodes;
    for (std::size_t n = 0; n < irm.size(); ++n) {
      if (irm.traversable(n)) free_nodes.push_back(n);
    }
    std::uniform_int_distribution<std::size_t> pick_node(0, free_nodes.size() - 1);
    std::uniform_real_distribution<double> pick_value(0.0, 1.0);
    std::uniform_int_distribution<std::size_t> pick_size(1, std::max<std::size_t>(1, scaling.max_hypothesis_size));

    // Pool entry 0 is the empty hypothesis; the rest are planner-like sets.
    std::vector<HypotheticalSet> pool(scaling.hypothesis_pool);
    for (std::size_t p = 1; p < pool.size(); ++p) {
      const std::size_t size = pick_size(rng);
      for (std::size_t k = 0; k < size; ++k) {
        pool[p].push_back({irm.location(free_nodes[pick_node(rng)]), pick_value(rng)});
      }
    }
    std::uniform_int_distribution<std::size_t> pick_hypo(0, pool.size() - 1);
    std::vector<std::pair<Location, std::size_t>> calls;
    for (std::size_t c = 0; c < scaling.calls; ++c) {
      calls.emplace_back(irm.location(free_nodes[pick_node(rng)]), pick_hypo(rng));
    }

    for (const ModelKind kind : scaling.models) {
      RunConfig model_config = config;
      model_config.model = kind;
      std::unique_ptr<SignalModel> model = make_model(model_config);
      for (const Measurement& m : trace) model->add_measurement(m);
      model->update_local(irm, robot);

      std::vector<double> seconds;
      for (std::size_t c = 0; c < calls.size(); ++c) {
        const std::uint64_t hits_before = model->cache_stats().hits;
        const auto t0 = Clock::now();
        const GaussianBelief b = model->infer(calls[c].first, pool[calls[c].second]);
        const double s = seconds_since(t0);
        if (!std::isfinite(b.mean())) throw std::runtime_error("scaling: non-finite belief");
        result.samples.push_back({kind, count, c, s, model->cache_stats().hits > hits_before});
        seconds.push_back(s);
      }
      const double mean =
          std::accumulate(seconds.begin(), seconds.end(), 0.0) / static_cast<double>(seconds.size());
      double ss = 0.0;
      for (const double s : seconds) ss += (s - mean) * (s - mean);
      const double sd =
          seconds.size() > 1 ? std::sqrt(ss / static_cast<double>(seconds.size() - 1)) : 0.0;
      result.bins.push_back({kind, count, mean, sd, seconds.size()});
    }
  }

  if (scaling.counts.size() >= 2) {
    for (const ModelKind kind : scaling.models) {
      std::vector<double> xs, ys;
      for (const TimingBin& b : result.bins) {
        if (b.model != kind) continue;
        xs.push_back(static_cast<double>(b.count));
        ys.push_back(b.mean_seconds);
      }
      if (xs.front() != xs.back()) result.slopes[kind] = loglog_slope(xs, ys);
    }
  }
  return result;
}

void write_timings_csv(std::ostream& out, const ScalingResult& result) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "model,measurements,call,seconds,cache_hit\n";
  for (const TimingSample& s : result.samples) {
    out << to_string(s.model) << ',' << s.count << ',' << s.call << ',' << s.seconds << ','
        << (s.cache_hit ? 1 : 0) << '\n';
  }
  out.precision(old);
}

void write_timings_binned_csv(std::ostream& out, const ScalingResult& result) {
  const auto old = out.precision(std::numeric_limits<double>::max_digits10);
  out << "model,measurements,mean_seconds,std_seconds,calls\n";
  for (const TimingBin& b : result.bins) {
    out << to_string(b.model) << ',' << b.count << ',' << b.mean_seconds << ',' << b.std_seconds
        << ',' << b.calls << '\n';
  }
  out.precision(old);
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

}  // namespace

void write_svg_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series,
                    bool log_axes) {
  constexpr double kWidth = 720, kHeight = 440;
  constexpr double kLeft = 70, kRight = 160, kTop = 40, kBottom = 50;
  constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c",
                                               "#9467bd", "#ff7f0e", "#8c564b"};
  auto tx = [&](double v) { return log_axes ? std::log10(v) : v; };

  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const PlotSeries& s : series) {
    for (std::size_t i = 0; i < std::min(s.xs.size(), s.ys.size()); ++i) {
      if (log_axes && (s.xs[i] <= 0.0 || s.ys[i] <= 0.0)) continue;
      x0 = std::min(x0, tx(s.xs[i]));
      x1 = std::max(x1, tx(s.xs[i]));
      y0 = std::min(y0, tx(s.ys[i]));
      y1 = std::max(y1, tx(s.ys[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double v) { return kLeft + (tx(v) - x0) / (x1 - x0) * pw; };
  auto py = [&](double v) { return kTop + ph - (tx(v) - y0) / (y1 - y0) * ph; };
  auto untx = [&](double v) { return log_axes ? std::pow(10.0, v) : v; };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
  out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fx = x0 + (x1 - x0) * k / 4.0, fy = y0 + (y1 - y0) * k / 4.0;
    const double sx = kLeft + pw * k / 4.0, sy = kTop + ph - ph * k / 4.0;
    out << "<text x=\"" << sx << "\" y=\"" << kTop + ph + 16 << "\" text-anchor=\"middle\">"
        << tick_label(untx(fx)) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << sy + 4 << "\" text-anchor=\"end\">"
        << tick_label(untx(fy)) << "</text>\n";
  }
  out << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">" << xml_escape(x_label) << "</text>\n";
  out << "<text transform=\"translate(16," << kTop + ph / 2
      << ") rotate(-90)\" text-anchor=\"middle\">" << xml_escape(y_label) << "</text>\n";

  for (std::size_t si = 0; si < series.size(); ++si) {
    const PlotSeries& s = series[si];
    const char* color = kColors[si % kColors.size()];
    std::ostringstream points;
    for (std::size_t i = 0; i < std::min(s.xs.size(), s.ys.size()); ++i) {
      if (log_axes && (s.xs[i] <= 0.0 || s.ys[i] <= 0.0)) continue;
      if (s.markers_only) {
        out << "<circle cx=\"" << px(s.xs[i]) << "\" cy=\"" << py(s.ys[i])
            << "\" r=\"2\" fill=\"" << color << "\" fill-opacity=\"0.5\"/>\n";
      } else {
        points << px(s.xs[i]) << ',' << py(s.ys[i]) << ' ';
      }
    }
    if (!s.markers_only) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\""
          << points.str() << "\"/>\n";
    }
    const double ly = kTop + 14 + 18.0 * static_cast<double>(si);
    out << "<rect x=\"" << kLeft + pw + 12 << "\" y=\"" << ly - 9 << "\" width=\"12\" height=\""
        << "10\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << kLeft + pw + 30 << "\" y=\"" << ly << "\">" << xml_escape(s.name)
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace sigseek
