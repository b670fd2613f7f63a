#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "split/core.hpp"
#include "split/graph.hpp"

namespace split {

/// Per-node lists of couplings that leave the node's part: entry (alpha,
/// Q_i_alpha) for every edge (i, alpha) whose endpoints live in different
/// parts. Each cross edge appears from both of its endpoints; internal edges
/// never appear.
struct CrossEdges {
  std::vector<std::vector<Neighbor>> foreign;
  long long pair_count = 0;  // unordered cross pairs

  bool empty() const { return pair_count == 0; }
  int size() const { return static_cast<int>(foreign.size()); }
};

inline CrossEdges build_cross_edges(const QuadraticProgram& qp,
                                    const Partition& p) {
  if (p.size() != qp.size())
    throw std::invalid_argument("partition does not cover the problem");
  CrossEdges ce;
  ce.foreign.resize(qp.size());
  for (const auto& t : qp.quad_terms()) {
    if (p.assignment[t.i] == p.assignment[t.j]) continue;
    ce.foreign[t.i].push_back({t.j, t.value});
    ce.foreign[t.j].push_back({t.i, t.value});
    ++ce.pair_count;
  }
  return ce;
}

/// The external-interaction weights d_i: for node i in part k, the sum of
/// Q_i_alpha * x_alpha over neighbors alpha outside part k. Nodes without
/// cross edges carry exactly 0.
struct LocalFields {
  std::vector<double> d;

  double norm() const {
    double s = 0.0;
    for (double v : d) s += v * v;
    return std::sqrt(s);
  }
};

inline LocalFields compute_fields(const Assignment& x, const CrossEdges& ce) {
  if (static_cast<int>(x.size()) != ce.size())
    throw std::invalid_argument("assignment length does not match cross edges");
  LocalFields f;
  f.d.assign(x.size(), 0.0);
  for (int i = 0; i < ce.size(); ++i) {
    double acc = 0.0;
    for (const auto& nb : ce.foreign[i])
      if (x[nb.node]) acc += nb.weight;
    f.d[i] = acc;
  }
  return f;
}

/// A part's restricted problem: internal couplings re-indexed locally and
/// the field-augmented linear terms Q_ii + d_i, plus any constraints whose
/// support lies inside the part (quota shares included).
struct Subproblem {
  int part_index = 0;
  std::vector<int> nodes;  // global ids, ascending
  std::vector<QuadTerm> internal_quadratic;
  std::vector<double> effective_linear;
  std::vector<Constraint> constraint_share;  // local-index support

  // local CSR mirror of internal_quadratic, for solver hot loops
  std::vector<int> adj_offset{0};
  std::vector<Neighbor> adj;

  int size() const { return static_cast<int>(nodes.size()); }

  std::span<const Neighbor> neighbors(int local) const {
    return {adj.data() + adj_offset[local], adj.data() + adj_offset[local + 1]};
  }

  double value(const Assignment& x_local) const {
    if (x_local.size() != nodes.size())
      throw std::invalid_argument("local assignment length mismatch");
    double acc = 0.0;
    for (const auto& t : internal_quadratic)
      if (x_local[t.i] && x_local[t.j]) acc += t.value;
    for (int i = 0; i < size(); ++i)
      if (x_local[i]) acc += effective_linear[i];
    return acc;
  }

  bool share_satisfied(const Assignment& x_local) const {
    for (const auto& c : constraint_share)
      if (!constraint_satisfied(c, x_local)) return false;
    return true;
  }

  /// The subproblem as a standalone program (debugging / serialization).
  QuadraticProgram to_quadratic_program() const {
    return QuadraticProgram(size(), internal_quadratic, effective_linear,
                            constraint_share);
  }

  void rebuild_adjacency() {
    const int m = size();
    adj_offset.assign(m + 1, 0);
    for (const auto& t : internal_quadratic) {
      ++adj_offset[t.i + 1];
      ++adj_offset[t.j + 1];
    }
    for (int i = 0; i < m; ++i) adj_offset[i + 1] += adj_offset[i];
    adj.resize(adj_offset[m]);
    std::vector<int> cursor(adj_offset.begin(), adj_offset.end() - 1);
    for (const auto& t : internal_quadratic) {
      adj[cursor[t.i]++] = {t.j, t.value};
      adj[cursor[t.j]++] = {t.i, t.value};
    }
  }
};

/// Builds part k's subproblem for the given fields. `shares` are constraints
/// in global indexing whose support must lie inside the part; they are
/// re-indexed locally and attached.
inline Subproblem build_subproblem(const QuadraticProgram& qp,
                                   const Partition& p, int k,
                                   const LocalFields& fields,
                                   std::span<const Constraint> shares = {}) {
  if (k < 0 || k >= p.k) throw std::out_of_range("invalid part index");
  if (p.size() != qp.size())
    throw std::invalid_argument("partition does not cover the problem");
  Subproblem sp;
  sp.part_index = k;
  sp.nodes = p.members[k];
  const int m = sp.size();

  std::unordered_map<int, int> local_of;
  local_of.reserve(m * 2);
  for (int l = 0; l < m; ++l) local_of.emplace(sp.nodes[l], l);

  sp.effective_linear.resize(m);
  for (int l = 0; l < m; ++l) {
    const int gi = sp.nodes[l];
    sp.effective_linear[l] = qp.linear()[gi] + fields.d[gi];
  }

  for (const auto& t : qp.quad_terms()) {
    const auto a = local_of.find(t.i);
    if (a == local_of.end()) continue;
    const auto b = local_of.find(t.j);
    if (b == local_of.end()) continue;
    const int li = std::min(a->second, b->second);
    const int lj = std::max(a->second, b->second);
    sp.internal_quadratic.push_back({li, lj, t.value});
  }
  std::sort(sp.internal_quadratic.begin(), sp.internal_quadratic.end(),
            [](const QuadTerm& a, const QuadTerm& b) {
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });

  for (const auto& c : shares) {
    Constraint local = c;
    for (auto& s : local.support) {
      const auto it = local_of.find(s);
      if (it == local_of.end())
        throw std::invalid_argument(
            "constraint share references node " + std::to_string(s) +
            " outside part " + std::to_string(k));
      s = it->second;
    }
    sp.constraint_share.push_back(std::move(local));
  }

  sp.rebuild_adjacency();
  return sp;
}

/// Half the inner product of the field slice and the local assignment; the
/// per-part double-counting correction.
inline double correction_delta(const Subproblem& sp, const Assignment& x_local,
                               std::span<const double> d_local) {
  if (x_local.size() != sp.nodes.size() || d_local.size() != sp.nodes.size())
    throw std::invalid_argument("correction inputs must match the part size");
  double acc = 0.0;
  for (std::size_t i = 0; i < x_local.size(); ++i)
    if (x_local[i]) acc += d_local[i];
  return 0.5 * acc;
}

/// Recomputes the global cost through the decomposition route: fields from
/// x, then the sum over parts of (restricted cost - correction). Must agree
/// with evaluate_cost to within 1e-9*(1+|H|); this identity is the main
/// correctness oracle of the whole reformulation.
inline double reconstruct_cost(const QuadraticProgram& qp, const Partition& p,
                               const Assignment& x) {
  detail::require_length(qp, x);
  if (p.size() != qp.size())
    throw std::invalid_argument("partition does not cover the problem");
  const CrossEdges ce = build_cross_edges(qp, p);
  const LocalFields fields = compute_fields(x, ce);

  std::vector<double> part_sum(p.k, 0.0);
  for (const auto& t : qp.quad_terms()) {
    const int pi = p.assignment[t.i];
    if (pi != p.assignment[t.j]) continue;  // cross terms enter via fields
    if (x[t.i] && x[t.j]) part_sum[pi] += t.value;
  }
  for (int i = 0; i < qp.size(); ++i) {
    if (!x[i]) continue;
    // (Q_ii + d_i) from the restricted cost, minus d_i/2 from the correction.
    part_sum[p.assignment[i]] += qp.linear()[i] + 0.5 * fields.d[i];
  }
  double total = 0.0;
  for (double s : part_sum) total += s;
  return total;
}

/// Splits a global cardinality bound V into per-part integer quotas
/// floor(V*|S_k|/N) plus remainder units handed out by largest fractional
/// part (ties to the lower part index). Quotas always sum to V and never
/// exceed a part's size; any overflow unit spills to the next part in the
/// same ordering.
inline std::vector<long long> distribute_capacity(long long v,
                                                  const Partition& p) {
  const long long n = p.size();
  if (v < 0 || v > n)
    throw std::invalid_argument("capacity must lie in [0, n]");
  const int k = p.k;
  std::vector<long long> quota(k);
  std::vector<long long> frac(k);  // numerator of the fractional part, / n
  long long assigned = 0;
  for (int part = 0; part < k; ++part) {
    const long long sz = static_cast<long long>(p.members[part].size());
    quota[part] = (v * sz) / n;
    frac[part] = (v * sz) % n;
    assigned += quota[part];
  }
  std::vector<int> order(k);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return frac[a] != frac[b] ? frac[a] > frac[b] : a < b;
  });
  long long remainder = v - assigned;
  for (int idx = 0; idx < k && remainder > 0; ++idx) {
    ++quota[order[idx]];
    --remainder;
  }
  // Spill any overflow onto later parts in the same ordering.
  long long carry = 0;
  for (int round = 0; round < 2 && (carry > 0 || round == 0); ++round) {
    for (int idx = 0; idx < k; ++idx) {
      const int part = order[idx];
      const long long sz = static_cast<long long>(p.members[part].size());
      quota[part] += carry;
      carry = 0;
      if (quota[part] > sz) {
        carry = quota[part] - sz;
        quota[part] = sz;
      }
    }
  }
  if (carry > 0) throw std::logic_error("quota spill failed");
  return quota;
}

/// Routing result for non-cardinality constraints: per-part lists (global
/// indexing) for constraints fully contained in one part, and the indices of
/// constraints that span parts and cannot be attached anywhere.
struct LocalConstraintAssignment {
  std::vector<std::vector<Constraint>> per_part;
  std::vector<int> unassignable;
};

inline LocalConstraintAssignment assign_local_constraints(
    const QuadraticProgram& qp, const Partition& p) {
  if (p.size() != qp.size())
    throw std::invalid_argument("partition does not cover the problem");
  LocalConstraintAssignment out;
  out.per_part.resize(p.k);
  const auto& cons = qp.constraints();
  for (std::size_t c = 0; c < cons.size(); ++c) {
    if (is_cardinality(cons[c].kind)) continue;  // quota machinery handles these
    if (cons[c].support.empty()) continue;
    const int part = p.assignment[cons[c].support.front()];
    bool contained = true;
    for (int s : cons[c].support)
      if (p.assignment[s] != part) {
        contained = false;
        break;
      }
    if (contained)
      out.per_part[part].push_back(cons[c]);
    else
      out.unassignable.push_back(static_cast<int>(c));
  }
  return out;
}

}  // namespace split
