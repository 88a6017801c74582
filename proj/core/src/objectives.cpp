#include "sigseek/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sigseek {

void ObjectiveParams::validate() const {
  if (!(beta >= 0.0)) throw std::invalid_argument("beta must be >= 0");
  if (!(xi >= 0.0)) throw std::invalid_argument("xi must be >= 0");
  if (!(lambda_front > 0.0 && lambda_front <= 1.0)) {
    throw std::invalid_argument("lambda_front must be in (0, 1]");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in (0, 1]");
}

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double ucb(const GaussianBelief& belief, double beta) {
  return belief.mean() + beta * belief.variance();
}

double expected_improvement(const GaussianBelief& belief, double best_mu, double xi,
                            bool standard_ei) {
  const double improvement = belief.mean() - best_mu - xi;
  const double sigma = belief.stddev();
  const double denom = standard_ei ? sigma : belief.variance();
  if (denom == 0.0) return std::max(improvement, 0.0);
  const double z = improvement / denom;
  const double ei = improvement * normal_cdf(z) + sigma * normal_pdf(z);
  return ei > 0.0 ? ei : 0.0;
}

double front_load(double t_reach, double lambda_front) {
  if (t_reach < 0.0) throw std::invalid_argument("front_load: negative reach time");
  return std::pow(lambda_front, t_reach);
}

}  // namespace sigseek
