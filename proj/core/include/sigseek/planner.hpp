#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <optional>
#include <utility>
#include <string_view>
#include <vector>

#include "sigseek/grid.hpp"
#include "sigseek/objectives.hpp"
#include "sigseek/signal_model.hpp"

namespace sigseek {

enum class PolicyKind { local, global };

std::string_view to_string(PolicyKind kind);

struct Policy {
  PolicyKind kind = PolicyKind::local;
  std::vector<Location> waypoints;
  /// Utility: discounted/front-loaded reward minus the travel-time cost.
  double predicted_reward = 0.0;
  double predicted_duration = 0.0;
  /// Frontier indices visited, in order (global policies only).
  std::vector<std::size_t> frontier_order;
};

struct Frontier {
  Location location;
  double path_time_from_robot = 0.0;
};

/// Frontiers plus pairwise traversal times (row-major n×n).
struct FrontierSet {
  std::vector<Frontier> frontiers;
  std::vector<double> travel_times;

  std::size_t size() const { return frontiers.size(); }
  double travel_time(std::size_t from, std::size_t to) const {
    return travel_times[from * frontiers.size() + to];
  }
};

struct PlannerParams {
  int local_horizon = 3;              // t_l, lattice steps
  std::size_t local_beam_width = 0;   // partial paths kept per depth; 0 = exhaustive
  double speed = 1.0;                 // m/s
  std::size_t max_frontier_sequence = 8;
  std::size_t exhaustive_frontier_limit = 8;
  double p_hat_local = 0.95;
  double p_hat_global = 0.8;
  double cost_weight = 0.01;          // utility per second of travel
  double surprise_sigmas = 2.0;
  double irm_refresh_distance = 5.0;  // meters from the IRM center

  void validate() const;
};

/// Receding-horizon lattice plan maximizing
///   Σ_k γ^k · (UCB(infer(c_k | c_1..c_{k-1})) − cost),
/// where earlier cells of the path are hypothetical measurements valued at
/// their current posterior means. Moves are wait, +x, −x, +y, −y over
/// traversable cells; ties keep the first path in that order. The horizon is
/// shortened so the policy fits in `remaining_budget`.
Policy plan_local(const SignalModel& model, const LocalIRM& irm, const Location& robot,
                  const ObjectiveParams& objective, const PlannerParams& params,
                  double remaining_budget);

/// Frontier sequence maximizing Σ F(t_p(n))·EI(n) − cost_weight·duration
/// within the remaining budget; the empty sequence scores 0. Exhaustive over ordered subsets for up to
/// `exhaustive_frontier_limit` frontiers (ties: lexicographically smallest
/// index sequence), greedy insertion plus 2-opt beyond.
Policy plan_global(const SignalModel& model, const FrontierSet& frontiers,
                   const MissionClock& clock, const ObjectiveParams& objective,
                   const PlannerParams& params);

/// Front-loaded EI score of visiting `order` and its total duration, or
/// nullopt when it overruns `budget`.
std::optional<std::pair<double, double>> frontier_sequence_score(
    const FrontierSet& frontiers, const std::vector<double>& ei,
    const std::vector<std::size_t>& order, double lambda_front, double budget);

/// argmax P̂(kind)·utility; ties go to the local policy.
const Policy& select_policy(const Policy& local, const Policy& global, const PlannerParams& params);

/// What the mission loop offers the planner.
class PlanningWorld {
 public:
  virtual ~PlanningWorld() = default;
  virtual LocalIRM local_irm(const Location& robot) = 0;
  virtual FrontierSet frontiers(const Location& robot) = 0;
  /// Cell-by-cell route (excluding `from`) between two locations.
  virtual std::vector<Location> route(const Location& from, const Location& to) = 0;
  /// Duration of one lattice step.
  virtual double step_time() const = 0;
};

struct PlanningEpisode {
  double time = 0.0;
  PolicyKind kind = PolicyKind::local;
  double predicted_reward = 0.0;
  double predicted_duration = 0.0;
  CacheStats cache;
  double wall_seconds = 0.0;
  const char* trigger = "";
};

/// Executes policies one waypoint at a time and replans when the policy is
/// exhausted, the robot has drifted irm_refresh_distance from the current
/// IRM center, or the last measurement deviated from its prediction by more
/// than surprise_sigmas standard deviations.
class ReplanController {
 public:
  ReplanController(ObjectiveParams objective, PlannerParams params);

  /// Next waypoint, or nullopt when the remaining budget cannot pay for
  /// another step.
  std::optional<Location> replan_step(SignalModel& model, PlanningWorld& world,
                                      const Location& robot, const MissionClock& clock);

  /// Records the measurement taken at the last waypoint into `model` and
  /// evaluates the surprise trigger against the prediction made for it.
  void observe(SignalModel& model, const Measurement& m);

  /// Forces a replan at the next step.
  void invalidate() { pending_.clear(); }

  const std::vector<PlanningEpisode>& episodes() const { return episodes_; }
  const Policy& current_policy() const { return policy_; }
  std::size_t pending_steps() const { return pending_.size(); }
  bool surprise_flag() const { return surprised_; }

 private:
  void replan(SignalModel& model, PlanningWorld& world, const Location& robot,
              const MissionClock& clock, const char* trigger);

  ObjectiveParams objective_;
  PlannerParams params_;
  Policy policy_;
  std::deque<Location> pending_;
  std::optional<Location> irm_center_;
  std::optional<GaussianBelief> prediction_;
  bool surprised_ = false;
  std::vector<PlanningEpisode> episodes_;
};

}  // namespace sigseek
