#include "sigseek/planner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace sigseek {

std::string_view to_string(PolicyKind kind) {
  return kind == PolicyKind::local ? "local" : "global";
}

void PlannerParams::validate() const {
  if (local_horizon < 1) throw std::invalid_argument("local_horizon must be >= 1");
  if (!(speed > 0.0)) throw std::invalid_argument("speed must be > 0");
  if (max_frontier_sequence < 1) throw std::invalid_argument("max_frontier_sequence must be >= 1");
  if (!(p_hat_local >= 0.0 && p_hat_local <= 1.0)) {
    throw std::invalid_argument("p_hat_local must be in [0, 1]");
  }
  if (!(p_hat_global >= 0.0 && p_hat_global <= 1.0)) {
    throw std::invalid_argument("p_hat_global must be in [0, 1]");
  }
  if (!(cost_weight >= 0.0)) throw std::invalid_argument("cost_weight must be >= 0");
  if (!(surprise_sigmas > 0.0)) throw std::invalid_argument("surprise_sigmas must be > 0");
  if (!(irm_refresh_distance > 0.0)) throw std::invalid_argument("irm_refresh_distance must be > 0");
}

// ---------------------------------------------------------------------------
// Local planning

namespace {

struct LocalSearch {
  const SignalModel& model;
  const LocalIRM& irm;
  const ObjectiveParams& objective;
  double step_cost;
  int depth;

  std::unordered_map<std::size_t, double> prior_means;

  double prior_mean(std::size_t node) {
    auto it = prior_means.find(node);
    if (it == prior_means.end()) {
      it = prior_means.emplace(node, model.infer(irm.location(node), {}).mean()).first;
    }
    return it->second;
  }

  std::vector<std::size_t> moves(std::size_t node) const {
    std::vector<std::size_t> out{node};
    const auto next = irm.traversable_neighbors(node);
    out.insert(out.end(), next.begin(), next.end());
    return out;
  }

  // Reward of stepping into `node` at step k, conditioned on `hypo`.
  double step_reward(std::size_t node, int k, const HypotheticalSet& hypo) const {
    const GaussianBelief b = model.infer(irm.location(node), hypo);
    return std::pow(objective.gamma, k) * (ucb(b, objective.beta) - step_cost);
  }
};

struct Partial {
  std::vector<std::size_t> path;
  HypotheticalSet hypo;
  double value = 0.0;
};

}  // namespace

Policy plan_local(const SignalModel& model, const LocalIRM& irm, const Location& robot,
                  const ObjectiveParams& objective, const PlannerParams& params,
                  double remaining_budget) {
  const auto start = irm.node_at(robot);
  if (!start || !irm.traversable(*start)) {
    throw std::invalid_argument("plan_local: robot cell is not a traversable IRM node");
  }
  const double step_time = irm.pitch() / params.speed;
  const double affordable = std::floor(remaining_budget / step_time + 1e-9);
  const int depth = static_cast<int>(
      std::clamp(affordable, 0.0, static_cast<double>(params.local_horizon)));

  Policy policy;
  policy.kind = PolicyKind::local;
  if (depth == 0) return policy;

  LocalSearch search{model, irm, objective, params.cost_weight * step_time, depth, {}};

  std::vector<std::size_t> best_path;
  double best_value = -std::numeric_limits<double>::infinity();

  if (params.local_beam_width == 0) {
    std::vector<std::size_t> path;
    HypotheticalSet hypo;
    std::function<void(std::size_t, int, double)> expand = [&](std::size_t node, int k,
                                                               double value) {
      if (k == depth) {
        if (value > best_value) {
          best_value = value;
          best_path = path;
        }
        return;
      }
      for (std::size_t next : search.moves(node)) {
        const double v = value + search.step_reward(next, k, hypo);
        path.push_back(next);
        hypo.push_back({irm.location(next), search.prior_mean(next)});
        expand(next, k + 1, v);
        hypo.pop_back();
        path.pop_back();
      }
    };
    expand(*start, 0, 0.0);
  } else {
    std::vector<Partial> frontier{Partial{}};
    for (int k = 0; k < depth; ++k) {
      std::vector<Partial> grown;
      for (const Partial& p : frontier) {
        const std::size_t node = p.path.empty() ? *start : p.path.back();
        for (std::size_t next : search.moves(node)) {
          Partial child = p;
          child.value += search.step_reward(next, k, p.hypo);
          child.path.push_back(next);
          child.hypo.push_back({irm.location(next), search.prior_mean(next)});
          grown.push_back(std::move(child));
        }
      }
      std::stable_sort(grown.begin(), grown.end(),
                       [](const Partial& a, const Partial& b) { return a.value > b.value; });
      if (grown.size() > params.local_beam_width) grown.resize(params.local_beam_width);
      frontier = std::move(grown);
    }
    best_value = frontier.front().value;
    best_path = frontier.front().path;
  }

  for (std::size_t node : best_path) policy.waypoints.push_back(irm.location(node));
  policy.predicted_reward = best_value;
  policy.predicted_duration = depth * step_time;
  return policy;
}

// ---------------------------------------------------------------------------
// Global planning

std::optional<std::pair<double, double>> frontier_sequence_score(
    const FrontierSet& frontiers, const std::vector<double>& ei,
    const std::vector<std::size_t>& order, double lambda_front, double budget) {
  double t = 0.0;
  double score = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const std::size_t n = order[k];
    t = k == 0 ? frontiers.frontiers[n].path_time_from_robot
               : t + frontiers.travel_time(order[k - 1], n);
    if (t > budget) return std::nullopt;
    score += front_load(t, lambda_front) * ei[n];
  }
  return std::make_pair(score, t);
}

namespace {

struct SequenceChoice {
  std::vector<std::size_t> order;
  double score = 0.0;
  double duration = 0.0;
  double utility = 0.0;  // score - cost_weight * duration
};

SequenceChoice exhaustive_sequence(const FrontierSet& fs, const std::vector<double>& ei,
                                   double lambda_front, double cost_weight, double budget,
                                   std::size_t max_len) {
  const std::size_t n = fs.size();
  SequenceChoice best;
  std::vector<std::size_t> seq;
  std::vector<char> used(n, 0);

  // Preorder DFS with ascending indices visits sequences in lexicographic
  // order, so a strict comparison keeps the lexicographically smallest tie.
  std::function<void(double, double)> dfs = [&](double t, double score) {
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      const double ti = seq.empty() ? fs.frontiers[i].path_time_from_robot
                                    : t + fs.travel_time(seq.back(), i);
      if (ti > budget) continue;
      const double si = score + front_load(ti, lambda_front) * ei[i];
      seq.push_back(i);
      used[i] = 1;
      if (const double ui = si - cost_weight * ti; ui > best.utility) best = {seq, si, ti, ui};
      if (seq.size() < max_len) dfs(ti, si);
      used[i] = 0;
      seq.pop_back();
    }
  };
  dfs(0.0, 0.0);
  return best;
}

SequenceChoice heuristic_sequence(const FrontierSet& fs, const std::vector<double>& ei,
                                  double lambda_front, double cost_weight, double budget,
                                  std::size_t max_len) {
  const std::size_t n = fs.size();
  SequenceChoice best;
  auto evaluate = [&](const std::vector<std::size_t>& order) -> std::optional<SequenceChoice> {
    const auto r = frontier_sequence_score(fs, ei, order, lambda_front, budget);
    if (!r) return std::nullopt;
    return SequenceChoice{order, r->first, r->second, r->first - cost_weight * r->second};
  };

  // Cheapest-insertion style greedy on the score.
  std::vector<char> used(n, 0);
  while (best.order.size() < max_len) {
    SequenceChoice step = best;
    bool improved = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (used[i]) continue;
      for (std::size_t pos = 0; pos <= best.order.size(); ++pos) {
        auto candidate = best.order;
        candidate.insert(candidate.begin() + static_cast<std::ptrdiff_t>(pos), i);
        if (auto r = evaluate(candidate); r && r->utility > step.utility) {
          step = std::move(*r);
          improved = true;
        }
      }
    }
    if (!improved) break;
    for (std::size_t i : step.order) used[i] = 1;
    best = std::move(step);
  }

  // 2-opt segment reversals.
  for (bool improved = true; improved;) {
    improved = false;
    for (std::size_t i = 0; i + 1 < best.order.size(); ++i) {
      for (std::size_t j = i + 1; j < best.order.size(); ++j) {
        auto candidate = best.order;
        std::reverse(candidate.begin() + static_cast<std::ptrdiff_t>(i),
                     candidate.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        if (auto r = evaluate(candidate); r && r->utility > best.utility) {
          best = std::move(*r);
          improved = true;
        }
      }
    }
  }
  return best;
}

}  // namespace

Policy plan_global(const SignalModel& model, const FrontierSet& frontiers,
                   const MissionClock& clock, const ObjectiveParams& objective,
                   const PlannerParams& params) {
  Policy policy;
  policy.kind = PolicyKind::global;
  if (frontiers.size() == 0) return policy;

  const double best_mu = model.best_measured_mean();
  std::vector<double> ei(frontiers.size());
  for (std::size_t i = 0; i < frontiers.size(); ++i) {
    ei[i] = expected_improvement(model.infer_global(frontiers.frontiers[i].location), best_mu,
                                 objective.xi, objective.standard_ei);
  }

  const double budget = clock.remaining();
  const SequenceChoice choice =
      frontiers.size() <= params.exhaustive_frontier_limit
          ? exhaustive_sequence(frontiers, ei, objective.lambda_front, params.cost_weight,
                                budget, params.max_frontier_sequence)
          : heuristic_sequence(frontiers, ei, objective.lambda_front, params.cost_weight,
                               budget, params.max_frontier_sequence);

  policy.frontier_order = choice.order;
  for (std::size_t i : choice.order) policy.waypoints.push_back(frontiers.frontiers[i].location);
  policy.predicted_duration = choice.duration;
  policy.predicted_reward = choice.utility;
  return policy;
}

const Policy& select_policy(const Policy& local, const Policy& global,
                            const PlannerParams& params) {
  const double local_value = params.p_hat_local * local.predicted_reward;
  const double global_value = params.p_hat_global * global.predicted_reward;
  return global_value > local_value ? global : local;
}

// ---------------------------------------------------------------------------
// Receding-horizon execution

ReplanController::ReplanController(ObjectiveParams objective, PlannerParams params)
    : objective_(objective), params_(params) {
  objective_.validate();
  params_.validate();
}

void ReplanController::replan(SignalModel& model, PlanningWorld& world, const Location& robot,
                              const MissionClock& clock, const char* trigger) {
  const auto started = std::chrono::steady_clock::now();

  const LocalIRM irm = world.local_irm(robot);
  model.update_local(irm, robot);
  irm_center_ = robot;

  const Policy local = plan_local(model, irm, robot, objective_, params_, clock.remaining());
  const Policy global = plan_global(model, world.frontiers(robot), clock, objective_, params_);
  const Policy* chosen = &select_policy(local, global, params_);
  if (chosen->waypoints.empty()) chosen = chosen == &local ? &global : &local;
  policy_ = *chosen;

  pending_.clear();
  if (policy_.kind == PolicyKind::local) {
    pending_.assign(policy_.waypoints.begin(), policy_.waypoints.end());
  } else {
    Location from = robot;
    for (const Location& wp : policy_.waypoints) {
      for (const Location& step : world.route(from, wp)) pending_.push_back(step);
      from = wp;
    }
  }
  surprised_ = false;

  PlanningEpisode episode;
  episode.time = clock.elapsed();
  episode.kind = policy_.kind;
  episode.predicted_reward = policy_.predicted_reward;
  episode.predicted_duration = policy_.predicted_duration;
  episode.cache = model.cache_stats();
  episode.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  episode.trigger = trigger;
  episodes_.push_back(episode);
}

std::optional<Location> ReplanController::replan_step(SignalModel& model, PlanningWorld& world,
                                                      const Location& robot,
                                                      const MissionClock& clock) {
  if (clock.remaining() + 1e-9 < world.step_time()) return std::nullopt;

  const char* trigger = nullptr;
  if (pending_.empty()) {
    trigger = "exhausted";
  } else if (surprised_) {
    trigger = "surprise";
  } else if (irm_center_ &&
             euclidean_distance(robot, *irm_center_) > params_.irm_refresh_distance) {
    trigger = "new_irm";
  }
  if (trigger) replan(model, world, robot, clock, trigger);
  if (pending_.empty()) return std::nullopt;

  const Location next = pending_.front();
  pending_.pop_front();
  prediction_ = model.predict(next);
  return next;
}

void ReplanController::observe(SignalModel& model, const Measurement& m) {
  if (prediction_ &&
      std::abs(m.value - prediction_->mean()) > params_.surprise_sigmas * prediction_->stddev()) {
    surprised_ = true;
  }
  prediction_.reset();
  model.add_measurement(m);
}

}  // namespace sigseek
