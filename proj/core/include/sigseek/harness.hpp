#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "sigseek/gp_baseline.hpp"
#include "sigseek/map_io.hpp"
#include "sigseek/objectives.hpp"
#include "sigseek/planner.hpp"
#include "sigseek/signal_belief.hpp"
#include "sigseek/simulator.hpp"

namespace sigseek {

enum class ModelKind { factor_graph, gp, gp_limited };

std::string_view to_string(ModelKind kind);
/// Throws std::invalid_argument for an unknown name.
ModelKind parse_model_kind(std::string_view name);

/// Invalid configuration. `field()` names the offending key.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  std::string map = "map_a";  // bundled name or file path
  ModelKind model = ModelKind::factor_graph;
  SignalParams signal;
  GPParams gp;
  std::size_t gp_limit = 200;  // neighbours used by gp_limited
  ObjectiveParams objective;
  PlannerParams planner;
  SignalFieldParams field;
  int irm_width = 21;
  int irm_height = 21;
  /// Mission seconds; unset means two full traversals of the free space.
  std::optional<double> budget;
  std::uint64_t seed = 0;
  std::string output_dir = "out";

  /// Throws ConfigError naming the first invalid field.
  void validate() const;
};

/// One configurable key. The same table backs config files, CLI flags and
/// configuration echo.
struct ConfigKey {
  std::string name;
  std::string help;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

const std::vector<ConfigKey>& config_keys();

/// Sets `key` from its textual value; throws ConfigError.
void apply_config_value(RunConfig& config, const std::string& key, const std::string& value);

/// `key = value` lines; '#' starts a comment. Unknown keys and malformed
/// values throw ConfigError.
void apply_config_stream(RunConfig& config, std::istream& in);
void apply_config_file(RunConfig& config, const std::filesystem::path& path);

std::unique_ptr<SignalModel> make_model(const RunConfig& config);

/// Two traversals of every free cell at the configured speed.
double default_budget(const MapSpec& map, double speed);

/// PlanningWorld over a simulated Environment.
class SimulatedWorld final : public PlanningWorld {
 public:
  SimulatedWorld(Environment& env, int irm_width, int irm_height, double speed);

  LocalIRM local_irm(const Location& robot) override;
  FrontierSet frontiers(const Location& robot) override;
  std::vector<Location> route(const Location& from, const Location& to) override;
  double step_time() const override;

 private:
  Environment& env_;
  int irm_width_;
  int irm_height_;
  double speed_;
  std::uint64_t next_irm_id_ = 0;
};

struct MetricRow {
  std::uint64_t step = 0;
  double time = 0.0;
  double x = 0.0;
  double y = 0.0;
  double snr_db = 0.0;
  double scaled = 0.0;
  double max_snr_db = 0.0;
  double cumulative_snr_db = 0.0;
  double cumulative_scaled = 0.0;
  double inference_ms = 0.0;  // wall clock; excluded from determinism checks
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::string policy;  // "init", "local" or "global"

  friend bool operator==(const MetricRow&, const MetricRow&) = default;
};

struct MetricTrace {
  std::vector<MetricRow> rows;

  double final_max_snr_db() const;
  double final_cumulative_scaled() const;
};

void write_trace_csv(std::ostream& out, const MetricTrace& trace);
/// Inverse of write_trace_csv. Throws std::invalid_argument.
MetricTrace read_trace_csv(std::istream& in);

struct MissionResult {
  std::string map;
  ModelKind model = ModelKind::factor_graph;
  std::uint64_t seed = 0;
  double budget = 0.0;
  double ground_truth_max_db = 0.0;
  double ground_truth_min_db = 0.0;
  MetricTrace trace;
  std::vector<PlanningEpisode> episodes;
  std::string belief_snapshot_csv;
  double wall_seconds = 0.0;
};

/// Runs the replan/execute loop until the budget cannot pay for another
/// step. Measurements are min-max scaled to [0,1] with the ground-truth
/// extremes before they reach the model.
MissionResult run_mission(const RunConfig& config);
/// Same, on an explicit map; `config.map` is ignored.
MissionResult run_mission(const RunConfig& config, const MapSpec& map);

/// trace.csv, belief_snapshot.csv and policies.csv under `dir`.
void write_mission_outputs(const MissionResult& result, const std::filesystem::path& dir);

struct SummaryRow {
  std::string map;
  ModelKind model = ModelKind::factor_graph;
  std::uint64_t seed = 0;
  double budget = 0.0;
  double final_max_snr_db = 0.0;
  double ground_truth_max_db = 0.0;
  double gap_db = 0.0;
  double cumulative_snr_db = 0.0;
  double cumulative_scaled = 0.0;
  std::size_t steps = 0;
  std::size_t replans = 0;
  double wall_seconds = 0.0;
};

SummaryRow summarize(const MissionResult& result);

/// Runs every config once per seed. Configs may differ only in map and
/// model; anything else throws ConfigError. Up to `jobs` missions run
/// concurrently.
std::vector<SummaryRow> compare_models(const std::vector<RunConfig>& configs,
                                       const std::vector<std::uint64_t>& seeds,
                                       std::size_t jobs = 1);

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);
/// Per (map, model): trial count, mean/std of final max-SNR and cumulative
/// scaled SNR, and the number of trials within `gap_threshold_db` of the
/// field maximum.
void write_summary_aggregate_csv(std::ostream& out, const std::vector<SummaryRow>& rows,
                                 double gap_threshold_db = 3.0);

struct ScalingConfig {
  std::vector<std::size_t> counts{100, 500, 1000, 2000, 4000};
  std::vector<ModelKind> models{ModelKind::factor_graph, ModelKind::gp, ModelKind::gp_limited};
  std::size_t calls = 100;
  std::size_t hypothesis_pool = 10;
  std::size_t max_hypothesis_size = 3;
};

struct TimingSample {
  ModelKind model = ModelKind::factor_graph;
  std::size_t count = 0;
  std::size_t call = 0;
  double seconds = 0.0;
  bool cache_hit = false;
};

struct TimingBin {
  ModelKind model = ModelKind::factor_graph;
  std::size_t count = 0;
  double mean_seconds = 0.0;
  double std_seconds = 0.0;
  std::size_t calls = 0;
};

struct ScalingResult {
  std::vector<TimingSample> samples;
  std::vector<TimingBin> bins;
  /// Least-squares slope of log(mean time) against log(count).
  std::map<ModelKind, double> slopes;
};

/// Lawnmower sweep over the free cells of the configured map, looped until
/// `count` measurements exist, followed by `calls` timed inference calls at
/// random in-window queries with hypothetical sets drawn from a small pool.
ScalingResult run_scaling_benchmark(const RunConfig& config, const ScalingConfig& scaling);

/// Boustrophedon order over free cells: row by row, alternating direction.
std::vector<Location> lawnmower_path(const OccupancyGrid& grid);

double loglog_slope(const std::vector<double>& xs, const std::vector<double>& ys);

void write_timings_csv(std::ostream& out, const ScalingResult& result);
void write_timings_binned_csv(std::ostream& out, const ScalingResult& result);

struct PlotSeries {
  std::string name;
  std::vector<double> xs;
  std::vector<double> ys;
  bool markers_only = false;
};

/// Minimal SVG line/scatter chart.
void write_svg_plot(std::ostream& out, const std::string& title, const std::string& x_label,
                    const std::string& y_label, const std::vector<PlotSeries>& series,
                    bool log_axes = false);

}  // namespace sigseek
