#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace split {

/// Binary decision vector x in {0,1}^n.
using Assignment = std::vector<std::uint8_t>;

inline long long popcount(const Assignment& x) {
  long long c = 0;
  for (auto b : x) c += (b != 0);
  return c;
}

enum class ConstraintKind { CardinalityEq, CardinalityLe, LinearEq, LinearLe };

inline bool is_cardinality(ConstraintKind k) {
  return k == ConstraintKind::CardinalityEq ||
         k == ConstraintKind::CardinalityLe;
}

inline bool is_equality(ConstraintKind k) {
  return k == ConstraintKind::CardinalityEq || k == ConstraintKind::LinearEq;
}

/// A linear constraint over a subset of the decision variables.
/// Cardinality kinds require unit coefficients and an integer bound >= 0.
struct Constraint {
  ConstraintKind kind = ConstraintKind::LinearLe;
  std::vector<int> support;
  std::vector<double> coefficients;
  double bound = 0.0;

  static Constraint cardinality_eq(std::vector<int> support, long long v) {
    Constraint c;
    c.kind = ConstraintKind::CardinalityEq;
    c.coefficients.assign(support.size(), 1.0);
    c.support = std::move(support);
    c.bound = static_cast<double>(v);
    return c;
  }

  static Constraint cardinality_le(std::vector<int> support, long long v) {
    Constraint c = cardinality_eq(std::move(support), v);
    c.kind = ConstraintKind::CardinalityLe;
    return c;
  }

  static Constraint linear_eq(std::vector<int> support,
                              std::vector<double> coefficients, double bound) {
    return Constraint{ConstraintKind::LinearEq, std::move(support),
                      std::move(coefficients), bound};
  }

  static Constraint linear_le(std::vector<int> support,
                              std::vector<double> coefficients, double bound) {
    return Constraint{ConstraintKind::LinearLe, std::move(support),
                      std::move(coefficients), bound};
  }
};

/// One off-diagonal coefficient, stored once per unordered pair with i < j.
struct QuadTerm {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

struct Neighbor {
  int node = 0;
  double weight = 0.0;
};

namespace detail {
inline std::uint64_t pair_key(int i, int j) {
  const auto a = static_cast<std::uint32_t>(std::min(i, j));
  const auto b = static_cast<std::uint32_t>(std::max(i, j));
  return (static_cast<std::uint64_t>(a) << 32) | b;
}
}  // namespace detail

/// A binary quadratic program: minimize
///   sum over stored pairs of Q_ij x_i x_j  +  sum_i Q_ii x_i
/// subject to the attached constraints. The coefficient matrix is symmetric
/// and each unordered pair is stored exactly once (canonical i < j); explicit
/// zeros are dropped. Immutable after construction, safe to share across
/// threads.
class QuadraticProgram {
 public:
  QuadraticProgram() = default;

  QuadraticProgram(int n, std::vector<QuadTerm> quadratic,
                   std::vector<double> linear,
                   std::vector<Constraint> constraints = {})
      : n_(n),
        linear_(std::move(linear)),
        constraints_(std::move(constraints)) {
    if (n_ < 0) throw std::invalid_argument("variable count must be >= 0");
    if (static_cast<int>(linear_.size()) != n_)
      throw std::invalid_argument("linear vector length must equal n");
    terms_.reserve(quadratic.size());
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(quadratic.size() * 2);
    for (const auto& t : quadratic) {
      if (t.i < 0 || t.i >= n_ || t.j < 0 || t.j >= n_)
        throw std::out_of_range("quadratic index out of range");
      if (t.i == t.j)
        throw std::invalid_argument(
            "diagonal coefficients belong in the linear vector");
      if (!seen.insert(detail::pair_key(t.i, t.j)).second)
        throw std::invalid_argument("duplicate quadratic pair (" +
                                    std::to_string(t.i) + "," +
                                    std::to_string(t.j) + ")");
      if (t.value == 0.0) continue;
      terms_.push_back({std::min(t.i, t.j), std::max(t.i, t.j), t.value});
    }
    std::sort(terms_.begin(), terms_.end(),
              [](const QuadTerm& a, const QuadTerm& b) {
                return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
    build_adjacency();
    validate_constraints();
  }

  int size() const { return n_; }
  const std::vector<double>& linear() const { return linear_; }
  const std::vector<QuadTerm>& quad_terms() const { return terms_; }
  const std::vector<Constraint>& constraints() const { return constraints_; }

  /// Coefficient of the unordered pair {i,j}; 0 when no edge is stored.
  double quad_coeff(int i, int j) const {
    const auto it = lookup_.find(detail::pair_key(i, j));
    return it == lookup_.end() ? 0.0 : it->second;
  }

  /// Neighbors of i with their signed coefficients Q_ij, ascending by node.
  std::span<const Neighbor> neighbors(int i) const {
    return {adj_.data() + adj_offset_[i],
            adj_.data() + adj_offset_[i + 1]};
  }

  int degree(int i) const { return adj_offset_[i + 1] - adj_offset_[i]; }

 private:
  void build_adjacency() {
    adj_offset_.assign(n_ + 1, 0);
    lookup_.reserve(terms_.size() * 2);
    for (const auto& t : terms_) {
      ++adj_offset_[t.i + 1];
      ++adj_offset_[t.j + 1];
      lookup_.emplace(detail::pair_key(t.i, t.j), t.value);
    }
    for (int i = 0; i < n_; ++i) adj_offset_[i + 1] += adj_offset_[i];
    adj_.resize(adj_offset_[n_]);
    std::vector<int> cursor(adj_offset_.begin(), adj_offset_.end() - 1);
    for (const auto& t : terms_) {
      adj_[cursor[t.i]++] = {t.j, t.value};
      adj_[cursor[t.j]++] = {t.i, t.value};
    }
    for (int i = 0; i < n_; ++i)
      std::sort(adj_.begin() + adj_offset_[i], adj_.begin() + adj_offset_[i + 1],
                [](const Neighbor& a, const Neighbor& b) {
                  return a.node < b.node;
                });
  }

  void validate_constraints() const {
    for (const auto& c : constraints_) {
      if (c.coefficients.size() != c.support.size())
        throw std::invalid_argument(
            "constraint coefficients must align with support");
      std::unordered_set<int> uniq;
      for (int s : c.support) {
        if (s < 0 || s >= n_)
          throw std::out_of_range("constraint support index out of range");
        if (!uniq.insert(s).second)
          throw std::invalid_argument("constraint support has duplicates");
      }
      if (is_cardinality(c.kind)) {
        if (c.bound < 0.0 || c.bound != std::floor(c.bound))
          throw std::invalid_argument(
              "cardinality bound must be a non-negative integer");
        for (double a : c.coefficients)
          if (a != 1.0)
            throw std::invalid_argument(
                "cardinality constraints require unit coefficients");
      }
    }
  }

  int n_ = 0;
  std::vector<double> linear_;
  std::vector<QuadTerm> terms_;
  std::vector<Constraint> constraints_;
  std::vector<int> adj_offset_{0};
  std::vector<Neighbor> adj_;
  std::unordered_map<std::uint64_t, double> lookup_;
};

namespace detail {
inline void require_length(const QuadraticProgram& qp, const Assignment& x) {
  if (static_cast<int>(x.size()) != qp.size())
    throw std::invalid_argument("assignment length " +
                                std::to_string(x.size()) +
                                " does not match problem size " +
                                std::to_string(qp.size()));
}
}  // namespace detail

/// Exact objective value of x. Constraints are not checked here.
inline double evaluate_cost(const QuadraticProgram& qp, const Assignment& x) {
  detail::require_length(qp, x);
  double acc = 0.0;
  for (const auto& t : qp.quad_terms())
    if (x[t.i] && x[t.j]) acc += t.value;
  const auto& lin = qp.linear();
  for (int i = 0; i < qp.size(); ++i)
    if (x[i]) acc += lin[i];
  return acc;
}

/// Absolute tolerance for real-coefficient constraint comparisons.
inline constexpr double kFeasibilityTol = 1e-9;

/// Does x satisfy constraint c (support indices interpreted against x)?
inline bool constraint_satisfied(const Constraint& c, const Assignment& x) {
  if (is_cardinality(c.kind)) {
    long long count = 0;
    for (int s : c.support) count += (x[s] != 0);
    const auto bound = static_cast<long long>(c.bound);
    return c.kind == ConstraintKind::CardinalityEq ? count == bound
                                                   : count <= bound;
  }
  double sum = 0.0;
  for (std::size_t t = 0; t < c.support.size(); ++t)
    if (x[c.support[t]]) sum += c.coefficients[t];
  return c.kind == ConstraintKind::LinearEq
             ? std::abs(sum - c.bound) <= kFeasibilityTol
             : sum <= c.bound + kFeasibilityTol;
}

/// Indices of violated constraints; empty means feasible.
inline std::vector<int> check_feasibility(const QuadraticProgram& qp,
                                          const Assignment& x) {
  detail::require_length(qp, x);
  std::vector<int> violated;
  const auto& cons = qp.constraints();
  for (std::size_t c = 0; c < cons.size(); ++c)
    if (!constraint_satisfied(cons[c], x)) violated.push_back(static_cast<int>(c));
  return violated;
}

/// Cost change from flipping bit i, computed in O(degree(i)).
inline double flip_delta(const QuadraticProgram& qp, const Assignment& x,
                         int i) {
  detail::require_length(qp, x);
  if (i < 0 || i >= qp.size())
    throw std::out_of_range("flip index out of range");
  double sum = qp.linear()[i];
  for (const auto& nb : qp.neighbors(i))
    if (x[nb.node]) sum += nb.weight;
  return x[i] ? -sum : sum;
}

}  // namespace split
