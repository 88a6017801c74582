#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "sigseek/geometry.hpp"

namespace sigseek {

/// Dense index of a scalar value inside one FactorGraph.
enum class ValueId : std::uint32_t {};

constexpr std::size_t to_index(ValueId id) { return static_cast<std::size_t>(id); }
constexpr ValueId value_id(std::size_t index) { return static_cast<ValueId>(index); }

/// N(target | observed, variance).
struct UnaryFactor {
  ValueId target;
  double observed = 0.0;
  double variance = 1.0;
};

/// N(a - b | 0, variance).
struct LinkFactor {
  ValueId a;
  ValueId b;
  double variance = 1.0;
};

/// Raised when a connected component carries no unary factor, so its
/// absolute level is unobservable.
class UnderconstrainedError : public std::runtime_error {
 public:
  UnderconstrainedError(ValueId first_value, std::size_t component_size);

  /// Lowest ValueId of the offending component.
  ValueId first_value() const { return first_value_; }
  std::size_t component_size() const { return component_size_; }

 private:
  ValueId first_value_;
  std::size_t component_size_;
};

class SingularSystemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Solved means for every value plus the marginal variances that were asked
/// for. Immutable once returned.
class GraphSolution {
 public:
  GraphSolution() = default;

  std::size_t size() const { return means_.size(); }
  double mean(ValueId id) const;
  bool has_variance(ValueId id) const;
  /// Throws std::logic_error if the variance of `id` was not computed.
  double variance(ValueId id) const;
  GaussianBelief belief(ValueId id) const;

  /// Graph revision this solution was computed from.
  std::uint64_t revision() const { return revision_; }

 private:
  friend class Posterior;

  std::vector<double> means_;
  std::vector<double> variances_;  // NaN where not requested
  std::uint64_t revision_ = 0;
};

/// Factorized information system of a solved graph. Means are available
/// immediately; marginal variances are extracted on demand (one triangular
/// solve each) and memoized. Safe for concurrent readers.
class Posterior {
 public:
  Posterior(Posterior&&) noexcept;
  Posterior& operator=(Posterior&&) noexcept;
  ~Posterior();

  std::size_t size() const;
  std::uint64_t revision() const;

  double mean(ValueId id) const;
  double variance(ValueId id) const;
  GaussianBelief belief(ValueId id) const { return {mean(id), variance(id)}; }

  GraphSolution to_solution() const;
  GraphSolution to_solution(std::span<const ValueId> variances_for) const;

 private:
  friend class FactorGraph;
  struct Impl;
  explicit Posterior(std::unique_ptr<Impl> impl);
  std::unique_ptr<Impl> impl_;
};

/// Scalar linear-Gaussian factor graph: unary measurement factors and
/// zero-mean pairwise link factors. Solving is exact (sparse LDLT of the
/// information matrix JᵀWJ).
class FactorGraph {
 public:
  /// Pivots of the LDLT below this fraction of the largest information
  /// diagonal are treated as singular.
  static constexpr double kRelativePivotFloor = 1e-12;

  ValueId add_value();
  void add_unary(const UnaryFactor& factor);
  void add_link(const LinkFactor& factor);

  std::size_t num_values() const { return num_values_; }
  std::span<const UnaryFactor> unary_factors() const { return unaries_; }
  std::span<const LinkFactor> link_factors() const { return links_; }

  /// Incremented by every mutation.
  std::uint64_t revision() const { return revision_; }

  /// Throws UnderconstrainedError / SingularSystemError.
  Posterior factorize() const;

  /// Means and the full variance diagonal.
  GraphSolution solve() const;
  /// Means for all values, variances only for `variances_for`.
  GraphSolution solve(std::span<const ValueId> variances_for) const;

  /// Reuses `previous` when no factor was added since it was computed,
  /// otherwise re-solves and fills the same variance set as `previous`.
  GraphSolution solve_incremental(const GraphSolution& previous) const;

  /// One line per value/factor: `values <n>`, `unary <id> <observed> <var>`,
  /// `link <a> <b> <var>`.
  void write_edge_list(std::ostream& out) const;

 private:
  void check_value(ValueId id, const char* what) const;
  void check_constrained() const;

  std::size_t num_values_ = 0;
  std::vector<UnaryFactor> unaries_;
  std::vector<LinkFactor> links_;
  std::uint64_t revision_ = 0;
};

}  // namespace sigseek
