#pragma once

#include "sigseek/geometry.hpp"

namespace sigseek {

struct ObjectiveParams {
  double beta = 3.0;           // UCB weight on the variance
  double xi = 0.01;            // EI exploration offset
  double lambda_front = 0.95;  // front-loading decay per second
  double gamma = 0.95;         // per-step discount of the local objective
  bool standard_ei = false;    // Z = I/σ instead of Z = I/σ²

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

double normal_pdf(double z);
double normal_cdf(double z);

/// μ + β·σ². The bonus multiplies the variance, not the standard deviation.
double ucb(const GaussianBelief& belief, double beta);

/// Expected improvement of `belief` over `best_mu`:
///   I = μ - best_mu - ξ,  Z = I / σ²  (or I / σ with `standard_ei`),
///   EI = I·Φ(Z) + σ·φ(Z), clamped at 0.
double expected_improvement(const GaussianBelief& belief, double best_mu, double xi,
                            bool standard_ei = false);

/// Front-loading weight λ^t. F(0) = 1, strictly decreasing for λ < 1 and
/// multiplicative: F(a + b) = F(a)·F(b).
double front_load(double t_reach, double lambda_front);

}  // namespace sigseek
