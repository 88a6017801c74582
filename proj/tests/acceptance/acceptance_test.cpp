// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Extra detail goes to stdout below each verdict line.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "properties.hpp"
#include "sigseek/harness.hpp"

namespace {

using Clock = std::chrono::steady_clock;

int g_failed = 0;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void verdict(int id, bool ok, const std::string& summary) {
  std::printf("criterion %d: %s  %s\n", id, ok ? "PASS" : "FAIL", summary.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

std::string describe(const props::Result& r) {
  std::string s = std::to_string(r.cases) + " cases, " + std::to_string(r.failures) + " failures";
  if (!r.first_failure.empty()) s += " (first: " + r.first_failure + ")";
  return s;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

void factor_graph_exactness() {
  const auto t0 = Clock::now();
  const auto r = props::factor_graph_exactness(500, props::kDefaultSeed, 200);
  const double secs = seconds_since(t0);
  verdict(1, r.ok() && r.cases == 500 && secs < 30.0,
          "factor graph vs dense oracle: " + describe(r) + ", " + fmt("%.2f s", secs));
}

void gp_exactness() {
  const auto t0 = Clock::now();
  const auto r = props::gp_exactness(200, props::kDefaultSeed + 1, 50);
  const double secs = seconds_since(t0);
  verdict(2, r.ok() && r.cases == 200 && secs < 10.0,
          "GP vs dense oracle: " + describe(r) + ", " + fmt("%.2f s", secs));
}

void replay() {
  const auto r = props::replay_check(100, props::kDefaultSeed + 2, 0.25);
  verdict(3, r.ok() && r.cases == 100, "d_min replay (0.25 m): " + describe(r));
}

void scaling() {
  using sigseek::ModelKind;
  const auto t0 = Clock::now();
  sigseek::RunConfig config;
  config.map = "map_b";
  config.signal.k_g = 100;
  const sigseek::ScalingResult result = sigseek::run_scaling_benchmark(config, {});
  const double secs = seconds_since(t0);

  std::printf("  %-12s %6s %14s %14s\n", "model", "count", "mean_s", "std_s");
  for (const auto& bin : result.bins) {
    std::printf("  %-12s %6zu %14.6g %14.6g\n", std::string(to_string(bin.model)).c_str(), bin.count,
                bin.mean_seconds, bin.std_seconds);
  }
  const double gp_slope = result.slopes.at(ModelKind::gp);
  const double fg_slope = result.slopes.at(ModelKind::factor_graph);
  std::printf("  slopes: gp %.3f, gp_limited %.3f, factor_graph %.3f\n", gp_slope,
              result.slopes.at(ModelKind::gp_limited), fg_slope);

  std::vector<double> miss_times, all_fg;
  for (const auto& s : result.samples) {
    if (s.model != ModelKind::factor_graph) continue;
    all_fg.push_back(s.seconds);
    if (!s.cache_hit) miss_times.push_back(s.seconds);
  }
  double fast_fraction = 0.0;
  if (!miss_times.empty()) {
    std::nth_element(miss_times.begin(), miss_times.begin() + miss_times.size() / 2, miss_times.end());
    const double median_miss = miss_times[miss_times.size() / 2];
    const auto fast = std::count_if(all_fg.begin(), all_fg.end(),
                                    [&](double s) { return s * 10.0 <= median_miss; });
    fast_fraction = static_cast<double>(fast) / static_cast<double>(all_fg.size());
    std::printf("  factor graph: %zu calls, median miss %.3g s, %.1f%% at least 10x faster\n",
                all_fg.size(), median_miss, 100.0 * fast_fraction);
  }

  // Slope thresholds carry the ±0.3 tolerance on fitted slopes.
  const bool ok = gp_slope > 1.5 - 0.3 && fg_slope < 0.5 + 0.3 && fast_fraction >= 0.5 &&
                  secs < 600.0;
  verdict(4, ok,
          "scaling: gp slope " + fmt("%.3f", gp_slope) + " (> 1.2), factor graph slope " +
              fmt("%.3f", fg_slope) + " (< 0.8), fast calls " + fmt("%.1f%%", 100.0 * fast_fraction) +
              " (>= 50%), " + fmt("%.1f s", secs));
}

void planners() {
  const auto local = props::local_planner_exactness(50, props::kDefaultSeed + 3, 4, 3);
  const auto global = props::global_planner_exactness(50, props::kDefaultSeed + 4, 5);
  verdict(5, local.ok() && global.ok() && local.cases == 50 && global.cases == 50,
          "planner vs brute force: local 4x4 t_l=3 " + describe(local) + "; global 5 frontiers " +
              describe(global));
}

void end_to_end() {
  using sigseek::ModelKind;
  std::vector<sigseek::RunConfig> configs;
  for (const char* map : {"map_a", "map_b"}) {
    for (ModelKind m : {ModelKind::factor_graph, ModelKind::gp, ModelKind::gp_limited}) {
      sigseek::RunConfig c;
      c.map = map;
      c.model = m;
      configs.push_back(c);
    }
  }
  const auto rows = sigseek::compare_models(configs, {0, 1, 2, 3, 4});

  std::printf("  %-6s %-12s %4s %8s %10s %9s %12s %12s\n", "map", "model", "seed", "budget",
              "max_snr", "gap_db", "cum_snr_db", "cum_scaled");
  for (const auto& r : rows) {
    std::printf("  %-6s %-12s %4llu %8.1f %10.2f %9.2f %12.1f %12.2f\n", r.map.c_str(),
                std::string(to_string(r.model)).c_str(), static_cast<unsigned long long>(r.seed),
                r.budget, r.final_max_snr_db, r.gap_db, r.cumulative_snr_db, r.cumulative_scaled);
  }
  std::printf("  %-6s %-12s %8s %16s\n", "map", "model", "within3", "mean_cum_scaled");
  int within_a = 0, within_b = 0;
  for (const char* map : {"map_a", "map_b"}) {
    for (ModelKind m : {ModelKind::factor_graph, ModelKind::gp, ModelKind::gp_limited}) {
      int within = 0, n = 0;
      double cumulative = 0.0;
      for (const auto& r : rows) {
        if (r.map != map || r.model != m) continue;
        ++n;
        cumulative += r.cumulative_scaled;
        if (r.gap_db <= 3.0) ++within;
      }
      std::printf("  %-6s %-12s %5d/%-2d %16.2f\n", map, std::string(to_string(m)).c_str(), within, n,
                  cumulative / n);
      if (m == ModelKind::factor_graph) (std::string(map) == "map_a" ? within_a : within_b) = within;
    }
  }
  verdict(6, within_a >= 3 && within_b >= 4,
          "end-to-end factor graph within 3 dB: map_a " + std::to_string(within_a) + "/5 (>= 3), map_b " +
              std::to_string(within_b) + "/5 (>= 4)");
}

void invariants() {
  std::size_t passed = 0, total = 0;
  std::string failures;
  for (const auto& check : props::all_checks()) {
    const auto r = check.run(props::kDefaultCases, props::kDefaultSeed);
    ++total;
    if (r.ok() && r.cases >= 100) {
      ++passed;
    } else {
      failures += " " + std::string(check.name) + " [" + describe(r) + "]";
    }
  }
  verdict(7, passed == total,
          "invariant suites: " + std::to_string(passed) + "/" + std::to_string(total) +
              " properties at >= 100 cases" + failures);
}

}  // namespace

int main() {
  factor_graph_exactness();
  gp_exactness();
  replay();
  scaling();
  planners();
  end_to_end();
  invariants();
  std::printf("%s: %d criteria failed\n", g_failed ? "FAIL" : "PASS", g_failed);
  return g_failed ? 1 : 0;
}
