// Command-line front end: single missions, model comparisons, the inference
// scaling benchmark and the bundled map listing.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "sigseek/harness.hpp"

namespace fs = std::filesystem;
using namespace sigseek;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// String-valued mirror of every RunConfig key, filled by CLI11.
struct FlagValues {
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
};

void add_config_flags(CLI::App& app, FlagValues& flags) {
  for (const ConfigKey& key : config_keys()) {
    flags.options[key.name] = app.add_option("--" + key.name, flags.values[key.name], key.help)
                                  ->default_str(key.get(RunConfig{}))
                                  ->group("Configuration");
  }
}

RunConfig build_config(const std::string& config_file, const FlagValues& flags) {
  RunConfig config;
  if (!config_file.empty()) apply_config_file(config, config_file);
  for (const auto& [name, option] : flags.options) {
    if (option->count() > 0) apply_config_value(config, name, flags.values.at(name));
  }
  config.validate();
  return config;
}

template <typename Writer>
void write_file(const fs::path& path, Writer&& writer) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  writer(out);
}

void plot_mission(const MissionResult& result, const fs::path& dir) {
  PlotSeries max_snr{"max SNR", {}, {}}, truth{"field maximum", {}, {}}, cumulative{"cumulative", {}, {}};
  for (const MetricRow& r : result.trace.rows) {
    max_snr.xs.push_back(r.time);
    max_snr.ys.push_back(r.max_snr_db);
    cumulative.xs.push_back(r.time);
    cumulative.ys.push_back(r.cumulative_scaled);
  }
  truth.xs = {0.0, result.trace.rows.back().time};
  truth.ys = {result.ground_truth_max_db, result.ground_truth_max_db};
  write_file(dir / "max_snr.svg", [&](std::ostream& out) {
    write_svg_plot(out, "Max SNR by time", "mission time (s)", "SNR (dB)", {max_snr, truth});
  });
  write_file(dir / "cumulative_snr.svg", [&](std::ostream& out) {
    write_svg_plot(out, "Cumulative SNR", "mission time (s)", "cumulative scaled SNR",
                   {cumulative});
  });
}

void print_summary(const std::vector<SummaryRow>& rows) {
  std::cout << "map        model         seed  max_snr_db  gap_db  cumulative_scaled  steps\n";
  for (const SummaryRow& r : rows) {
    std::printf("%-10s %-12s %5llu  %10.2f  %6.2f  %17.2f  %5zu\n", r.map.c_str(),
                std::string(to_string(r.model)).c_str(), static_cast<unsigned long long>(r.seed),
                r.final_max_snr_db, r.gap_db, r.cumulative_scaled, r.steps);
  }
}

int cmd_run(const RunConfig& config, bool plot) {
  const MissionResult result = run_mission(config);
  const fs::path dir = config.output_dir;
  write_mission_outputs(result, dir);
  const std::vector<SummaryRow> rows{summarize(result)};
  write_file(dir / "summary.csv", [&](std::ostream& out) { write_summary_csv(out, rows); });
  if (plot) plot_mission(result, dir);
  print_summary(rows);
  std::cout << "outputs written to " << dir.string() << "\n";
  return 0;
}

int cmd_compare(const RunConfig& base, const std::vector<std::string>& models,
                const std::vector<std::string>& maps, const std::vector<std::uint64_t>& seeds,
                std::size_t jobs, bool plot) {
  std::vector<RunConfig> configs;
  for (const std::string& map : maps) {
    for (const std::string& model : models) {
      RunConfig c = base;
      apply_config_value(c, "map", map);
      apply_config_value(c, "model", model);
      configs.push_back(c);
    }
  }
  const std::vector<SummaryRow> rows = compare_models(configs, seeds, jobs);
  const fs::path dir = base.output_dir;
  fs::create_directories(dir);
  write_file(dir / "summary.csv", [&](std::ostream& out) { write_summary_csv(out, rows); });
  write_file(dir / "summary_aggregate.csv",
             [&](std::ostream& out) { write_summary_aggregate_csv(out, rows); });
  if (plot) {
    std::map<std::string, PlotSeries> by_group;
    for (const SummaryRow& r : rows) {
      const std::string name = r.map + "/" + std::string(to_string(r.model));
      PlotSeries& s = by_group[name];
      s.name = name;
      s.markers_only = true;
      s.xs.push_back(static_cast<double>(r.seed));
      s.ys.push_back(r.cumulative_scaled);
    }
    std::vector<PlotSeries> series;
    for (auto& [name, s] : by_group) series.push_back(std::move(s));
    write_file(dir / "compare_cumulative.svg", [&](std::ostream& out) {
      write_svg_plot(out, "Cumulative SNR per trial", "seed", "cumulative scaled SNR", series);
    });
  }
  print_summary(rows);
  std::cout << "outputs written to " << dir.string() << "\n";
  return 0;
}

int cmd_scaling(const RunConfig& config, const std::vector<std::size_t>& counts,
                const std::vector<std::string>& models, std::size_t calls, bool plot) {
  ScalingConfig scaling;
  scaling.counts = counts;
  scaling.calls = calls;
  scaling.models.clear();
  for (const std::string& m : models) {
    try {
      scaling.models.push_back(parse_model_kind(m));
    } catch (const std::invalid_argument& e) {
      throw ConfigError("models", e.what());
    }
  }
  const ScalingResult result = run_scaling_benchmark(config, scaling);
  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  write_file(dir / "timings.csv", [&](std::ostream& out) { write_timings_csv(out, result); });
  write_file(dir / "timings_binned.csv",
             [&](std::ostream& out) { write_timings_binned_csv(out, result); });
  if (plot) {
    std::vector<PlotSeries> raw, binned;
    for (const ModelKind kind : scaling.models) {
      PlotSeries r{std::string(to_string(kind)), {}, {}, true};
      PlotSeries b{std::string(to_string(kind)), {}, {}};
      for (const TimingSample& s : result.samples) {
        if (s.model != kind) continue;
        r.xs.push_back(static_cast<double>(s.count));
        r.ys.push_back(s.seconds * 1e3);
      }
      for (const TimingBin& t : result.bins) {
        if (t.model != kind) continue;
        b.xs.push_back(static_cast<double>(t.count));
        b.ys.push_back(t.mean_seconds * 1e3);
      }
      raw.push_back(std::move(r));
      binned.push_back(std::move(b));
    }
    write_file(dir / "timings.svg", [&](std::ostream& out) {
      write_svg_plot(out, "Inference time per call", "measurements", "time (ms)", raw, true);
    });
    write_file(dir / "timings_binned.svg", [&](std::ostream& out) {
      write_svg_plot(out, "Mean inference time", "measurements", "time (ms)", binned, true);
    });
  }
  std::cout << "model         measurements  mean_ms     std_ms\n";
  for (const TimingBin& b : result.bins) {
    std::printf("%-13s %12zu  %9.4f  %9.4f\n", std::string(to_string(b.model)).c_str(), b.count,
                b.mean_seconds * 1e3, b.std_seconds * 1e3);
  }
  for (const auto& [kind, slope] : result.slopes) {
    std::printf("log-log slope %-12s %.3f\n", std::string(to_string(kind)).c_str(), slope);
  }
  std::cout << "outputs written to " << dir.string() << "\n";
  return 0;
}

int cmd_maps(const std::string& show) {
  if (!show.empty()) {
    const MapSpec spec = [&] {
      try {
        return resolve_map(show);
      } catch (const std::exception& e) {
        throw ConfigError("show", e.what());
      }
    }();
    const GridCell source = spec.grid.cell_at(spec.source);
    for (int iy = spec.grid.height() - 1; iy >= 0; --iy) {
      for (int ix = 0; ix < spec.grid.width(); ++ix) {
        const GridCell c{ix, iy};
        char ch = spec.grid.occupied(c) ? '#' : '.';
        if (c == spec.start) ch = 'S';
        if (c == source) ch = 'X';
        std::cout << ch;
      }
      std::cout << '\n';
    }
    return 0;
  }
  for (const std::string& name : bundled_map_names()) {
    const MapSpec spec = bundled_map(name);
    std::printf("%-8s %3dx%-3d pitch %.2f m  %s\n", name.c_str(), spec.grid.width(),
                spec.grid.height(), spec.grid.pitch(), spec.description.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Signal source seeking with factor-graph and Gaussian-process beliefs"};
  app.require_subcommand(1);
  std::string config_file;
  app.add_option("-c,--config", config_file, "key = value configuration file")
      ->check(CLI::ExistingFile);
  bool plot = false;

  FlagValues run_flags, compare_flags, scaling_flags;

  CLI::App* run = app.add_subcommand("run", "run a single mission");
  add_config_flags(*run, run_flags);
  run->add_flag("--plot", plot, "also write SVG plots");

  CLI::App* compare = app.add_subcommand("compare", "run a model sweep over maps and seeds");
  add_config_flags(*compare, compare_flags);
  std::vector<std::string> models{"factor_graph", "gp", "gp_limited"};
  std::vector<std::string> maps{"map_a", "map_b"};
  std::vector<std::uint64_t> seeds{0, 1, 2};
  std::size_t jobs = 1;
  compare->add_option("--models", models, "models to compare")->capture_default_str();
  compare->add_option("--maps", maps, "maps to run")->capture_default_str();
  compare->add_option("--seeds", seeds, "trial seeds")->capture_default_str();
  compare->add_option("--jobs", jobs, "missions run concurrently")->capture_default_str();
  compare->add_flag("--plot", plot, "also write SVG plots");

  CLI::App* scaling = app.add_subcommand("scaling", "time inference against measurement count");
  add_config_flags(*scaling, scaling_flags);
  std::vector<std::size_t> counts{100, 500, 1000, 2000, 4000};
  std::vector<std::string> scaling_models{"factor_graph", "gp", "gp_limited"};
  std::size_t calls = 100;
  scaling->add_option("--counts", counts, "ascending measurement counts")->capture_default_str();
  scaling->add_option("--models", scaling_models, "models to time")->capture_default_str();
  scaling->add_option("--calls", calls, "timed inference calls per count")->capture_default_str();
  scaling->add_flag("--plot", plot, "also write SVG plots");

  CLI::App* maps_cmd = app.add_subcommand("maps", "list bundled maps");
  std::string show;
  maps_cmd->add_option("--show", show, "print a map as text");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(build_config(config_file, run_flags), plot);
    if (*compare) {
      return cmd_compare(build_config(config_file, compare_flags), models, maps, seeds, jobs,
                         plot);
    }
    if (*scaling) {
      return cmd_scaling(build_config(config_file, scaling_flags), counts, scaling_models, calls,
                         plot);
    }
    return cmd_maps(show);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
