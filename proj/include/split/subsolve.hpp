#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "split/decompose.hpp"

namespace split {

/// Search limits for a single subproblem solve. node_budget is deterministic;
/// wall_limit_s is not and is meant for benchmark-style runs. With both
/// unset the solver runs until done.
struct SolverBudget {
  static constexpr long long kUnlimited = -1;
  long long node_budget = kUnlimited;
  std::optional<double> wall_limit_s;
};

enum class SolveStatus { Optimal, BudgetExhausted, Infeasible };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Optimal: return "optimal";
    case SolveStatus::BudgetExhausted: return "budget_exhausted";
    case SolveStatus::Infeasible: return "infeasible";
  }
  return "?";
}

struct SubSolution {
  Assignment x;
  double cost = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  long long nodes_explored = 0;
};

/// Enumerates every feasible local assignment in lexicographic order and
/// returns the first true minimizer found (hence the lexicographically
/// smallest one among ties). Only for small parts.
inline SubSolution solve_exhaustive(const Subproblem& sp, int max_vars = 26) {
  const int m = sp.size();
  if (m > max_vars)
    throw std::invalid_argument("subproblem too large for exhaustive search (" +
                                std::to_string(m) + " > " +
                                std::to_string(max_vars) + " variables)");
  SubSolution out;
  out.x.assign(m, 0);
  Assignment x(m, 0);
  bool found = false;
  const std::uint64_t states = 1ULL << m;
  for (std::uint64_t code = 0; code < states; ++code) {
    for (int i = 0; i < m; ++i)
      x[i] = static_cast<std::uint8_t>((code >> (m - 1 - i)) & 1ULL);
    if (!sp.share_satisfied(x)) continue;
    const double c = sp.value(x);
    if (!found || c < out.cost) {
      found = true;
      out.cost = c;
      out.x = x;
    }
  }
  out.nodes_explored = static_cast<long long>(states);
  out.status = found ? SolveStatus::Optimal : SolveStatus::Infeasible;
  if (!found) out.cost = 0.0;
  return out;
}

/// Greedy local descent: quota-feasible start, then best-improvement single
/// flips (plus pair swaps whenever an exact-cardinality share is present, so
/// the quota is never left). Never claims optimality.
inline SubSolution solve_greedy(const Subproblem& sp,
                                [[maybe_unused]] std::uint64_t seed = 0) {
  const int m = sp.size();
  const auto& shares = sp.constraint_share;

  // Locate a full-part exact quota, if any, to pick the starting point.
  const Constraint* full_quota = nullptr;
  bool any_card_eq = false;
  for (const auto& c : shares) {
    if (c.kind != ConstraintKind::CardinalityEq) continue;
    any_card_eq = true;
    if (static_cast<int>(c.support.size()) == m) full_quota = &c;
  }

  SubSolution out;
  Assignment x(m, 0);
  if (full_quota != nullptr) {
    const auto q = static_cast<long long>(full_quota->bound);
    if (q > m) {
      out.x.assign(m, 0);
      return out;  // Infeasible
    }
    std::vector<int> idx(m);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
      return sp.effective_linear[a] != sp.effective_linear[b]
                 ? sp.effective_linear[a] < sp.effective_linear[b]
                 : a < b;
    });
    for (long long t = 0; t < q; ++t) x[idx[t]] = 1;
  }
  if (!sp.share_satisfied(x)) {
    out.x.assign(m, 0);
    return out;  // Infeasible: no feasible starting point for this share mix
  }

  std::vector<double> act(m, 0.0);
  for (const auto& t : sp.internal_quadratic) {
    if (x[t.j]) act[t.i] += t.value;
    if (x[t.i]) act[t.j] += t.value;
  }
  const auto flip_delta_local = [&](int i) {
    const double s = x[i] ? -1.0 : 1.0;
    return s * (sp.effective_linear[i] + act[i]);
  };
  const auto admissible = [&](int i, int j /* -1 for single flip */) {
    x[i] ^= 1;
    if (j >= 0) x[j] ^= 1;
    const bool ok = sp.share_satisfied(x);
    x[i] ^= 1;
    if (j >= 0) x[j] ^= 1;
    return ok;
  };

  while (true) {
    int best_i = -1, best_j = -1;
    double best_delta = -1e-12;
    for (int i = 0; i < m; ++i) {
      const double d = flip_delta_local(i);
      if (d < best_delta && admissible(i, -1)) {
        best_delta = d;
        best_i = i;
        best_j = -1;
      }
    }
    if (any_card_eq) {
      for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j) {
          if (x[i] == x[j]) continue;
          const double si = x[i] ? -1.0 : 1.0;
          const double sj = x[j] ? -1.0 : 1.0;
          double d = flip_delta_local(i) + flip_delta_local(j);
          const double q = [&] {
            for (const auto& nb : sp.neighbors(i))
              if (nb.node == j) return nb.weight;
            return 0.0;
          }();
          d += q * si * sj;
          if (d < best_delta && admissible(i, j)) {
            best_delta = d;
            best_i = i;
            best_j = j;
          }
        }
      }
    }
    if (best_i < 0) break;
    for (int b : {best_i, best_j}) {
      if (b < 0) continue;
      x[b] ^= 1;
      const double s = x[b] ? 1.0 : -1.0;
      for (const auto& nb : sp.neighbors(b)) act[nb.node] += s * nb.weight;
    }
  }

  out.x = std::move(x);
  out.cost = sp.value(out.x);
  out.status = SolveStatus::BudgetExhausted;
  return out;
}

namespace detail {

struct BbShare {
  std::vector<double> coeff;  // aligned with var ids below
  std::vector<int> vars;      // local ids
  double bound = 0.0;
  bool eq = false;
  double cur = 0.0;
  double min_add = 0.0;
  double max_add = 0.0;

  bool prunable() const {
    if (cur + min_add > bound + kFeasibilityTol) return true;
    if (eq && cur + max_add < bound - kFeasibilityTol) return true;
    return false;
  }
};

}  // namespace detail

/// Depth-first branch and bound over the part's binary variables.
///
/// The bound adds, per undecided variable, min(0, adjusted linear term plus
/// the negative part of its undecided couplings) to the cost of the decided
/// prefix. Constraint shares are pruned by partial-sum feasibility. The
/// incumbent starts from solve_greedy. Status is Optimal only when the
/// search ran to completion within budget.
inline SubSolution solve_branch_bound(const Subproblem& sp,
                                      const SolverBudget& budget = {}) {
  const int m = sp.size();
  SubSolution inc = solve_greedy(sp, 0);
  bool have_inc = inc.status != SolveStatus::Infeasible;

  // Static variable order: strongest terms first.
  std::vector<int> ord(m);
  {
    std::vector<double> key(m);
    for (int i = 0; i < m; ++i) {
      key[i] = std::abs(sp.effective_linear[i]);
      for (const auto& nb : sp.neighbors(i)) key[i] += std::abs(nb.weight);
    }
    std::iota(ord.begin(), ord.end(), 0);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) {
      return key[a] != key[b] ? key[a] > key[b] : a < b;
    });
  }

  std::vector<detail::BbShare> shares;
  std::vector<std::vector<std::pair<int, double>>> var_shares(m);
  for (const auto& c : sp.constraint_share) {
    detail::BbShare s;
    s.vars = c.support;
    s.coeff = c.coefficients;
    s.bound = c.bound;
    s.eq = is_equality(c.kind);
    for (std::size_t t = 0; t < s.vars.size(); ++t) {
      s.min_add += std::min(0.0, s.coeff[t]);
      s.max_add += std::max(0.0, s.coeff[t]);
      var_shares[s.vars[t]].push_back(
          {static_cast<int>(shares.size()), s.coeff[t]});
    }
    shares.push_back(std::move(s));
  }

  std::vector<std::uint8_t> x(m, 0);
  std::vector<std::uint8_t> decided(m, 0);
  std::vector<double> dyn(sp.effective_linear);
  std::vector<double> negsum(m, 0.0);
  for (const auto& t : sp.internal_quadratic) {
    negsum[t.i] += std::min(0.0, t.value);
    negsum[t.j] += std::min(0.0, t.value);
  }
  double partial = 0.0;
  double bound_tail = 0.0;
  for (int i = 0; i < m; ++i) bound_tail += std::min(0.0, dyn[i] + negsum[i]);

  long long nodes = 0;
  bool stopped = false;
  const auto t_start = std::chrono::steady_clock::now();
  const auto out_of_budget = [&]() {
    if (budget.node_budget != SolverBudget::kUnlimited &&
        nodes > budget.node_budget)
      return true;
    if (budget.wall_limit_s && (nodes & 2047) == 0) {
      const std::chrono::duration<double> el =
          std::chrono::steady_clock::now() - t_start;
      if (el.count() > *budget.wall_limit_s) return true;
    }
    return false;
  };

  struct NeighborSave {
    int node;
    double dyn, negsum;
  };
  struct ShareSave {
    int sidx;
    double cur, min_add, max_add;
  };
  std::vector<NeighborSave> nb_saves;
  std::vector<ShareSave> share_saves;

  const std::function<void(int)> search = [&](int depth) {
    ++nodes;
    if (stopped || out_of_budget()) {
      stopped = true;
      return;
    }
    if (depth == m) {
      if (!have_inc || partial < inc.cost) {
        have_inc = true;
        inc.cost = partial;
        inc.x = x;
      }
      return;
    }
    const int var = ord[depth];
    const int first = (dyn[var] + negsum[var] < 0.0) ? 1 : 0;
    for (int pick = 0; pick < 2 && !stopped; ++pick) {
      const int v = pick == 0 ? first : 1 - first;

      // Apply the decision, saving enough state to restore it exactly.
      const double save_tail = bound_tail;
      const double save_partial = partial;
      const std::size_t save_nb = nb_saves.size();
      const std::size_t save_sh = share_saves.size();
      bound_tail -= std::min(0.0, dyn[var] + negsum[var]);
      decided[var] = 1;
      x[var] = static_cast<std::uint8_t>(v);
      for (const auto& nb : sp.neighbors(var)) {
        if (decided[nb.node]) continue;
        nb_saves.push_back({nb.node, dyn[nb.node], negsum[nb.node]});
        bound_tail -= std::min(0.0, dyn[nb.node] + negsum[nb.node]);
        dyn[nb.node] += nb.weight * v;
        negsum[nb.node] -= std::min(0.0, nb.weight);
        bound_tail += std::min(0.0, dyn[nb.node] + negsum[nb.node]);
      }
      if (v == 1) partial += dyn[var];
      bool feasible = true;
      for (const auto& [sidx, a] : var_shares[var]) {
        auto& s = shares[sidx];
        share_saves.push_back({sidx, s.cur, s.min_add, s.max_add});
        s.cur += a * v;
        s.min_add -= std::min(0.0, a);
        s.max_add -= std::max(0.0, a);
        if (s.prunable()) feasible = false;
      }

      if (feasible && (!have_inc || partial + bound_tail < inc.cost))
        search(depth + 1);

      for (std::size_t t = share_saves.size(); t > save_sh; --t) {
        const auto& sv = share_saves[t - 1];
        shares[sv.sidx].cur = sv.cur;
        shares[sv.sidx].min_add = sv.min_add;
        shares[sv.sidx].max_add = sv.max_add;
      }
      share_saves.resize(save_sh);
      for (std::size_t t = nb_saves.size(); t > save_nb; --t) {
        const auto& sv = nb_saves[t - 1];
        dyn[sv.node] = sv.dyn;
        negsum[sv.node] = sv.negsum;
      }
      nb_saves.resize(save_nb);
      decided[var] = 0;
      x[var] = 0;
      bound_tail = save_tail;
      partial = save_partial;
    }
  };
  search(0);

  SubSolution out;
  out.nodes_explored = nodes;
  if (!have_inc) {
    out.x.assign(m, 0);
    out.status = SolveStatus::Infeasible;
    return out;
  }
  out.x = std::move(inc.x);
  out.cost = sp.value(out.x);
  out.status = stopped ? SolveStatus::BudgetExhausted : SolveStatus::Optimal;
  return out;
}

/// Named-solver dispatch; the registry is the hook for plugging in external
/// subproblem solvers.
using SubsolverFn = std::function<SubSolution(
    const Subproblem&, const SolverBudget&, std::uint64_t seed)>;

inline std::map<std::string, SubsolverFn>& subsolver_registry() {
  static std::map<std::string, SubsolverFn> registry{
      {"exhaustive",
       [](const Subproblem& sp, const SolverBudget&, std::uint64_t) {
         return solve_exhaustive(sp);
       }},
      {"branch_bound",
       [](const Subproblem& sp, const SolverBudget& b, std::uint64_t) {
         return solve_branch_bound(sp, b);
       }},
      {"greedy",
       [](const Subproblem& sp, const SolverBudget&, std::uint64_t seed) {
         return solve_greedy(sp, seed);
       }},
  };
  return registry;
}

inline SubSolution solve_with(const std::string& name, const Subproblem& sp,
                              const SolverBudget& budget, std::uint64_t seed) {
  const auto& reg = subsolver_registry();
  const auto it = reg.find(name);
  if (it == reg.end())
    throw std::invalid_argument("unknown subsolver '" + name + "'");
  return it->second(sp, budget, seed);
}

}  // namespace split
