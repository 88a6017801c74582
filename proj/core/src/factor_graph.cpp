#include "sigseek/factor_graph.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>

namespace sigseek {

namespace {

constexpr double kUnset = std::numeric_limits<double>::quiet_NaN();

bool valid_variance(double v) { return std::isfinite(v) && v > 0.0; }

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }
  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[std::max(a, b)] = std::min(a, b);
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace

UnderconstrainedError::UnderconstrainedError(ValueId first_value, std::size_t component_size)
    : std::runtime_error("factor graph underconstrained: component containing value " +
                         std::to_string(to_index(first_value)) + " (" +
                         std::to_string(component_size) + " values) has no unary factor"),
      first_value_(first_value),
      component_size_(component_size) {}

// ---------------------------------------------------------------------------
// GraphSolution

double GraphSolution::mean(ValueId id) const { return means_.at(to_index(id)); }

bool GraphSolution::has_variance(ValueId id) const {
  return to_index(id) < variances_.size() && !std::isnan(variances_[to_index(id)]);
}

double GraphSolution::variance(ValueId id) const {
  const double v = variances_.at(to_index(id));
  if (std::isnan(v)) {
    throw std::logic_error("GraphSolution: variance of value " + std::to_string(to_index(id)) +
                           " was not computed");
  }
  return v;
}

GaussianBelief GraphSolution::belief(ValueId id) const { return {mean(id), variance(id)}; }

// ---------------------------------------------------------------------------
// Posterior

struct Posterior::Impl {
  using SparseMatrix = Eigen::SparseMatrix<double>;

  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
  Eigen::VectorXd means;
  std::uint64_t revision = 0;

  mutable std::mutex memo_mutex;
  mutable std::vector<double> variances;

  // var_i = e_iᵀ H⁻¹ e_i with H = Pᵀ L D Lᵀ P, so var_i = Σ_k (L⁻¹ P e_i)_k² / D_k.
  double compute_variance(std::size_t i) const {
    const auto n = means.size();
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(n);
    unit[static_cast<Eigen::Index>(i)] = 1.0;
    Eigen::VectorXd work = ldlt.permutationP() * unit;
    ldlt.matrixL().solveInPlace(work);
    return (work.array().square() / ldlt.vectorD().array()).sum();
  }
};

Posterior::Posterior(std::unique_ptr<Impl> impl) : impl_(std::move(impl)) {}
Posterior::Posterior(Posterior&&) noexcept = default;
Posterior& Posterior::operator=(Posterior&&) noexcept = default;
Posterior::~Posterior() = default;

std::size_t Posterior::size() const { return static_cast<std::size_t>(impl_->means.size()); }
std::uint64_t Posterior::revision() const { return impl_->revision; }

double Posterior::mean(ValueId id) const {
  const auto i = to_index(id);
  if (i >= size()) throw std::out_of_range("Posterior: unknown value id");
  return impl_->means[static_cast<Eigen::Index>(i)];
}

double Posterior::variance(ValueId id) const {
  const auto i = to_index(id);
  if (i >= size()) throw std::out_of_range("Posterior: unknown value id");
  std::lock_guard lock(impl_->memo_mutex);
  double& slot = impl_->variances[i];
  if (std::isnan(slot)) slot = impl_->compute_variance(i);
  return slot;
}

GraphSolution Posterior::to_solution() const {
  std::vector<ValueId> all(size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = value_id(i);
  return to_solution(all);
}

GraphSolution Posterior::to_solution(std::span<const ValueId> variances_for) const {
  GraphSolution out;
  out.means_.assign(impl_->means.data(), impl_->means.data() + impl_->means.size());
  out.variances_.assign(size(), kUnset);
  for (ValueId id : variances_for) out.variances_.at(to_index(id)) = variance(id);
  out.revision_ = impl_->revision;
  return out;
}

// ---------------------------------------------------------------------------
// FactorGraph

ValueId FactorGraph::add_value() {
  ++revision_;
  return value_id(num_values_++);
}

void FactorGraph::check_value(ValueId id, const char* what) const {
  if (to_index(id) >= num_values_) {
    throw std::out_of_range(std::string(what) + ": unknown value id " +
                            std::to_string(to_index(id)));
  }
}

void FactorGraph::add_unary(const UnaryFactor& factor) {
  check_value(factor.target, "add_unary");
  if (!valid_variance(factor.variance)) {
    throw std::invalid_argument("add_unary: variance must be finite and > 0");
  }
  if (!std::isfinite(factor.observed)) {
    throw std::invalid_argument("add_unary: observed value must be finite");
  }
  unaries_.push_back(factor);
  ++revision_;
}

void FactorGraph::add_link(const LinkFactor& factor) {
  check_value(factor.a, "add_link");
  check_value(factor.b, "add_link");
  if (factor.a == factor.b) throw std::invalid_argument("add_link: endpoints must differ");
  if (!valid_variance(factor.variance)) {
    throw std::invalid_argument("add_link: variance must be finite and > 0");
  }
  links_.push_back(factor);
  ++revision_;
}

void FactorGraph::check_constrained() const {
  UnionFind components(num_values_);
  for (const auto& link : links_) components.unite(to_index(link.a), to_index(link.b));

  std::vector<char> anchored(num_values_, 0);
  for (const auto& unary : unaries_) anchored[components.find(to_index(unary.target))] = 1;

  for (std::size_t i = 0; i < num_values_; ++i) {
    const auto root = components.find(i);
    if (!anchored[root]) {
      std::size_t size = 0;
      for (std::size_t j = 0; j < num_values_; ++j) size += components.find(j) == root;
      throw UnderconstrainedError(value_id(root), size);
    }
  }
}

Posterior FactorGraph::factorize() const {
  check_constrained();

  const auto n = static_cast<Eigen::Index>(num_values_);
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(unaries_.size() + 4 * links_.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);

  for (const auto& f : unaries_) {
    const auto i = static_cast<Eigen::Index>(to_index(f.target));
    const double w = 1.0 / f.variance;
    triplets.emplace_back(i, i, w);
    rhs[i] += w * f.observed;
  }
  for (const auto& f : links_) {
    const auto a = static_cast<Eigen::Index>(to_index(f.a));
    const auto b = static_cast<Eigen::Index>(to_index(f.b));
    const double w = 1.0 / f.variance;
    triplets.emplace_back(a, a, w);
    triplets.emplace_back(b, b, w);
    triplets.emplace_back(a, b, -w);
    triplets.emplace_back(b, a, -w);
  }

  Eigen::SparseMatrix<double> information(n, n);
  information.setFromTriplets(triplets.begin(), triplets.end());

  auto impl = std::make_unique<Posterior::Impl>();
  impl->ldlt.compute(information);
  if (impl->ldlt.info() != Eigen::Success) {
    throw SingularSystemError("factor graph: LDLT factorization failed");
  }
  const double scale = information.diagonal().cwiseAbs().maxCoeff();
  const double min_pivot = impl->ldlt.vectorD().minCoeff();
  if (!(min_pivot > kRelativePivotFloor * scale)) {
    throw SingularSystemError("factor graph: pivot " + std::to_string(min_pivot) +
                              " below relative floor");
  }
  impl->means = impl->ldlt.solve(rhs);
  impl->revision = revision_;
  impl->variances.assign(num_values_, kUnset);
  return Posterior(std::move(impl));
}

GraphSolution FactorGraph::solve() const { return factorize().to_solution(); }

GraphSolution FactorGraph::solve(std::span<const ValueId> variances_for) const {
  for (ValueId id : variances_for) check_value(id, "solve");
  return factorize().to_solution(variances_for);
}

GraphSolution FactorGraph::solve_incremental(const GraphSolution& previous) const {
  if (previous.revision() > revision_ || previous.size() > num_values_) {
    throw std::invalid_argument("solve_incremental: solution does not come from this graph");
  }
  if (previous.revision() == revision_ && previous.size() == num_values_) return previous;

  std::vector<ValueId> wanted;
  for (std::size_t i = 0; i < previous.size(); ++i) {
    if (previous.has_variance(value_id(i))) wanted.push_back(value_id(i));
  }
  for (std::size_t i = previous.size(); i < num_values_; ++i) wanted.push_back(value_id(i));
  return solve(wanted);
}

void FactorGraph::write_edge_list(std::ostream& out) const {
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  out << "values " << num_values_ << '\n';
  for (const auto& f : unaries_) {
    out << "unary " << to_index(f.target) << ' ' << f.observed << ' ' << f.variance << '\n';
  }
  for (const auto& f : links_) {
    out << "link " << to_index(f.a) << ' ' << to_index(f.b) << ' ' << f.variance << '\n';
  }
  out.precision(old_precision);
}

}  // namespace sigseek
