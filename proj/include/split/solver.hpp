#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include "split/core.hpp"
#include "split/decompose.hpp"
#include "split/graph.hpp"
#include "split/partition.hpp"
#include "split/rng.hpp"
#include "split/subsolve.hpp"

namespace split {

enum class PartitionerKind { Spectral, Greedy, External };
enum class SweepMode { Auto, SingleFlip, DoubleFlip, Both, None };
enum class Termination { Converged, MaxIter, Cycle };

inline const char* to_string(Termination t) {
  switch (t) {
    case Termination::Converged: return "converged";
    case Termination::MaxIter: return "max_iter";
    case Termination::Cycle: return "cycle";
  }
  return "?";
}

/// Thrown when a solve cannot produce a feasible solution (impossible
/// capacity, or a subproblem reported infeasible).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SplitConfig {
  int k = 1;
  int n_iter = 500;
  std::uint64_t seed = 0;
  PartitionerKind partitioner = PartitionerKind::Spectral;
  std::string subsolver = "branch_bound";
  SolverBudget budget;
  SweepMode sweep = SweepMode::Auto;
  double convergence_tol = 1e-9;
  int cycle_window = 10;
  int worker_count = 1;
  double penalty_weight = 10.0;
  int spectral_dense_limit = 4000;
  std::optional<std::vector<int>> external_partition;
  std::optional<Assignment> warm_start;
};

struct IterationRecord {
  double cost_post_solve = 0.0;
  double cost_post_sweep = 0.0;
  double fields_norm = 0.0;
  double t_fields_s = 0.0;
  double t_solve_s = 0.0;
  double t_sweep_s = 0.0;
};

struct SolveReport {
  Assignment best_x;
  double best_cost = 0.0;
  std::vector<IterationRecord> iterations;
  int iterations_run = 0;
  Termination termination = Termination::MaxIter;
  double tts_seconds = 0.0;
  double partition_seconds = 0.0;
  bool feasible = true;
  /// Constant added to the objective by penalty conversion (0 when no
  /// cross-part equality constraints were penalized). Iteration costs are on
  /// the penalized objective, excluding this constant.
  double penalty_offset = 0.0;
};

/// One greedy pass over all bits in index order; a flip is kept only when it
/// strictly lowers the cost. Runs on incremental neighbor sums.
inline Assignment sweep_single_flip(const QuadraticProgram& qp, Assignment x) {
  detail::require_length(qp, x);
  const int n = qp.size();
  std::vector<double> act(n, 0.0);
  for (const auto& t : qp.quad_terms()) {
    if (x[t.j]) act[t.i] += t.value;
    if (x[t.i]) act[t.j] += t.value;
  }
  const auto& lin = qp.linear();
  for (int i = 0; i < n; ++i) {
    const double s = x[i] ? -1.0 : 1.0;
    if (s * (lin[i] + act[i]) < -1e-12) {
      x[i] ^= 1;
      const double step = x[i] ? 1.0 : -1.0;
      for (const auto& nb : qp.neighbors(i)) act[nb.node] += step * nb.weight;
    }
  }
  return x;
}

/// Pair pass over opposite-valued bits in different parts; each accepted
/// move flips both bits, so the total number of ones is preserved. Candidate
/// pairs are exhaustive up to 2000 nodes; beyond that, cross edges plus a
/// seeded sample of 10n pairs keep the pass near-linear.
inline Assignment sweep_double_flip(const QuadraticProgram& qp, Assignment x,
                                    const Partition& p,
                                    std::uint64_t seed = 0) {
  detail::require_length(qp, x);
  if (p.size() != qp.size())
    throw std::invalid_argument("partition does not cover the problem");
  const int n = qp.size();
  std::vector<double> act(n, 0.0);
  for (const auto& t : qp.quad_terms()) {
    if (x[t.j]) act[t.i] += t.value;
    if (x[t.i]) act[t.j] += t.value;
  }
  const auto& lin = qp.linear();

  const auto try_pair = [&](int i, int j) {
    if (x[i] == x[j] || p.assignment[i] == p.assignment[j]) return;
    const double si = x[i] ? -1.0 : 1.0;
    const double sj = x[j] ? -1.0 : 1.0;
    const double delta = si * (lin[i] + act[i]) + sj * (lin[j] + act[j]) +
                         qp.quad_coeff(i, j) * si * sj;
    if (delta < -1e-12) {
      for (int b : {i, j}) {
        x[b] ^= 1;
        const double step = x[b] ? 1.0 : -1.0;
        for (const auto& nb : qp.neighbors(b)) act[nb.node] += step * nb.weight;
      }
    }
  };

  if (n <= 2000) {
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) try_pair(i, j);
    return x;
  }

  std::vector<std::uint64_t> cand;
  for (const auto& t : qp.quad_terms())
    if (p.assignment[t.i] != p.assignment[t.j])
      cand.push_back(detail::pair_key(t.i, t.j));
  Rng rng(mix_seed(seed, 0x64626c66));
  for (long long s = 0; s < 10LL * n; ++s) {
    const int i = static_cast<int>(rng.next_below(n));
    const int j = static_cast<int>(rng.next_below(n));
    if (i != j) cand.push_back(detail::pair_key(i, j));
  }
  std::sort(cand.begin(), cand.end());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  for (const auto key : cand)
    try_pair(static_cast<int>(key >> 32),
             static_cast<int>(key & 0xffffffffULL));
  return x;
}

struct PenaltyAugmented {
  QuadraticProgram qp;
  double constant = 0.0;  // objective offset, tracked outside the program
};

/// Converts the selected equality constraints into quadratic penalty terms
/// weight*(sum A_i x_i - b)^2, expanded with x^2 = x. The penalized
/// constraints are removed from the returned program's constraint list.
inline PenaltyAugmented penalty_augment(const QuadraticProgram& qp,
                                        std::span<const int> constraint_indices,
                                        double weight) {
  if (weight <= 0.0) throw std::invalid_argument("penalty weight must be > 0");
  std::vector<char> drop(qp.constraints().size(), 0);
  std::unordered_map<std::uint64_t, double> quad;
  for (const auto& t : qp.quad_terms()) quad[detail::pair_key(t.i, t.j)] = t.value;
  std::vector<double> lin = qp.linear();
  double constant = 0.0;

  for (int idx : constraint_indices) {
    if (idx < 0 || idx >= static_cast<int>(qp.constraints().size()))
      throw std::out_of_range("constraint index out of range");
    const Constraint& c = qp.constraints()[idx];
    if (!is_equality(c.kind))
      throw std::invalid_argument(
          "only equality constraints can be penalty-converted");
    drop[idx] = 1;
    const double b = c.bound;
    constant += weight * b * b;
    for (std::size_t t = 0; t < c.support.size(); ++t) {
      const double a = c.coefficients[t];
      lin[c.support[t]] += weight * (a * a - 2.0 * b * a);
      for (std::size_t u = t + 1; u < c.support.size(); ++u)
        quad[detail::pair_key(c.support[t], c.support[u])] +=
            2.0 * weight * a * c.coefficients[u];
    }
  }

  std::vector<QuadTerm> terms;
  terms.reserve(quad.size());
  for (const auto& [key, v] : quad)
    terms.push_back({static_cast<int>(key >> 32),
                     static_cast<int>(key & 0xffffffffULL), v});
  std::vector<Constraint> kept;
  for (std::size_t c = 0; c < qp.constraints().size(); ++c)
    if (!drop[c]) kept.push_back(qp.constraints()[c]);
  return {QuadraticProgram(qp.size(), std::move(terms), std::move(lin),
                           std::move(kept)),
          constant};
}

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

}  // namespace detail

struct ExactResult {
  Assignment x;
  double cost = 0.0;
  SolveStatus status = SolveStatus::Infeasible;
  long long nodes_explored = 0;
  double tts_seconds = 0.0;
};

/// Reference solve of the whole problem by branch and bound. Unconstrained
/// problems are split into connected components first (their optima add up
/// exactly, and the budget applies per component); constrained problems are
/// solved as a single block with every constraint attached.
inline ExactResult solve_exact(const QuadraticProgram& qp,
                               const SolverBudget& budget = {}) {
  const auto t0 = std::chrono::steady_clock::now();
  const int n = qp.size();
  if (n < 1) throw std::invalid_argument("problem has no variables");
  ExactResult out;
  out.x.assign(n, 0);
  const LocalFields zero{std::vector<double>(n, 0.0)};

  if (!qp.constraints().empty()) {
    const Partition p = Partition::from_assignment(1, std::vector<int>(n, 0));
    const Subproblem sp =
        build_subproblem(qp, p, 0, zero, qp.constraints());
    SubSolution sol = solve_branch_bound(sp, budget);
    out.x = std::move(sol.x);
    out.status = sol.status;
    out.nodes_explored = sol.nodes_explored;
  } else {
    std::vector<int> comp(n, -1);
    int comp_count = 0;
    std::vector<int> stack;
    for (int s = 0; s < n; ++s) {
      if (comp[s] >= 0) continue;
      comp[s] = comp_count;
      stack.push_back(s);
      while (!stack.empty()) {
        const int v = stack.back();
        stack.pop_back();
        for (const auto& nb : qp.neighbors(v))
          if (comp[nb.node] < 0) {
            comp[nb.node] = comp_count;
            stack.push_back(nb.node);
          }
      }
      ++comp_count;
    }
    const Partition p = Partition::from_assignment(comp_count, comp);
    out.status = SolveStatus::Optimal;
    for (int c = 0; c < comp_count; ++c) {
      const Subproblem sp = build_subproblem(qp, p, c, zero);
      SubSolution sol = solve_branch_bound(sp, budget);
      if (sol.status == SolveStatus::Infeasible) {
        out.status = SolveStatus::Infeasible;
        break;
      }
      if (sol.status != SolveStatus::Optimal)
        out.status = SolveStatus::BudgetExhausted;
      out.nodes_explored += sol.nodes_explored;
      for (std::size_t l = 0; l < p.members[c].size(); ++l)
        out.x[p.members[c][l]] = sol.x[l];
    }
  }
  out.cost = evaluate_cost(qp, out.x);
  out.tts_seconds = detail::seconds_since(t0);
  return out;
}

/// Runs the full decomposition loop: partition once, then iterate
/// {fields -> parallel subproblem solves -> aggregate -> convergence check ->
/// sweep} and return the best feasible iterate seen.
inline SolveReport split_solve(const QuadraticProgram& qp,
                               const SplitConfig& cfg) {
  const int n = qp.size();
  if (n < 1) throw std::invalid_argument("problem has no variables");
  if (cfg.k < 1 || cfg.k > n)
    throw std::invalid_argument("k must lie in [1, n]");
  if (cfg.n_iter < 1) throw std::invalid_argument("n_iter must be >= 1");
  if (cfg.convergence_tol < 0.0 || cfg.cycle_window < 0)
    throw std::invalid_argument("tolerances must be >= 0");
  if (cfg.worker_count < 1)
    throw std::invalid_argument("worker_count must be >= 1");
  if (subsolver_registry().find(cfg.subsolver) == subsolver_registry().end())
    throw std::invalid_argument("unknown subsolver '" + cfg.subsolver + "'");

  const auto t_start = std::chrono::steady_clock::now();

  // Partitioning happens exactly once, before the iterations.
  Partition p;
  if (cfg.partitioner == PartitionerKind::External) {
    if (!cfg.external_partition)
      throw std::invalid_argument("external partitioner needs a partition");
    if (static_cast<int>(cfg.external_partition->size()) != n)
      throw std::invalid_argument("external partition length mismatch");
    p = Partition::from_assignment(cfg.k, *cfg.external_partition);
  } else {
    const InteractionGraph g = build_graph(qp);
    p = cfg.partitioner == PartitionerKind::Spectral
            ? partition_spectral(g, cfg.k, cfg.seed, cfg.spectral_dense_limit)
            : partition_greedy(g, cfg.k, cfg.seed);
  }
  const double t_partition = detail::seconds_since(t_start);

  // Constraint routing. Exactly one global capacity constraint is supported
  // as a hard constraint; equality constraints that span parts become
  // penalty terms; inequality constraints that span parts are not supported.
  const Constraint* global_card = nullptr;
  for (const auto& c : qp.constraints()) {
    if (!is_cardinality(c.kind)) continue;
    if (static_cast<int>(c.support.size()) != n)
      throw std::invalid_argument(
          "cardinality constraints must cover all variables");
    if (global_card != nullptr)
      throw std::invalid_argument(
          "at most one global capacity constraint is supported");
    global_card = &c;
  }
  const auto routed = assign_local_constraints(qp, p);
  std::vector<int> penalized;
  for (int idx : routed.unassignable) {
    if (qp.constraints()[idx].kind != ConstraintKind::LinearEq)
      throw std::invalid_argument(
          "inequality constraints spanning parts are not supported");
    penalized.push_back(idx);
  }
  double penalty_offset = 0.0;
  QuadraticProgram penalized_qp;
  const QuadraticProgram* work = &qp;
  if (!penalized.empty()) {
    PenaltyAugmented aug = penalty_augment(qp, penalized, cfg.penalty_weight);
    penalty_offset = aug.constant;
    penalized_qp = std::move(aug.qp);
    work = &penalized_qp;
  }

  std::vector<long long> quotas;
  if (global_card != nullptr) {
    const auto v = static_cast<long long>(global_card->bound);
    if (v < 0 || v > n)
      throw InfeasibleError("capacity " + std::to_string(v) +
                            " cannot be met with " + std::to_string(n) +
                            " variables");
    quotas = distribute_capacity(v, p);
  }

  // Static per-part shares (quota + local constraints) and subproblem
  // blueprints; only the effective linear terms change between iterations.
  const LocalFields zero_fields{std::vector<double>(n, 0.0)};
  std::vector<Subproblem> blueprint(p.k);
  for (int k = 0; k < p.k; ++k) {
    std::vector<Constraint> shares;
    if (global_card != nullptr) {
      Constraint q = global_card->kind == ConstraintKind::CardinalityEq
                         ? Constraint::cardinality_eq(p.members[k], quotas[k])
                         : Constraint::cardinality_le(p.members[k], quotas[k]);
      shares.push_back(std::move(q));
    }
    for (const auto& c : routed.per_part[k]) shares.push_back(c);
    blueprint[k] = build_subproblem(*work, p, k, zero_fields, shares);
  }

  const CrossEdges ce = build_cross_edges(*work, p);

  // Constraints the loop keeps hard; iterates violating them are never
  // reported as best.
  std::vector<Constraint> hard;
  if (global_card != nullptr) hard.push_back(*global_card);
  for (const auto& per : routed.per_part)
    for (const auto& c : per) hard.push_back(c);
  const auto hard_feasible = [&](const Assignment& x) {
    for (const auto& c : hard)
      if (!constraint_satisfied(c, x)) return false;
    return true;
  };

  Assignment x(n, 0);
  if (cfg.warm_start) {
    if (static_cast<int>(cfg.warm_start->size()) != n)
      throw std::invalid_argument("warm start length mismatch");
    x = *cfg.warm_start;
    for (auto& b : x)
      if (b > 1) throw std::invalid_argument("warm start must be binary");
  }

  const SweepMode sweep_mode =
      cfg.sweep != SweepMode::Auto
          ? cfg.sweep
          : (global_card != nullptr ? SweepMode::Both : SweepMode::SingleFlip);

  SolveReport report;
  report.partition_seconds = t_partition;
  bool best_set = false;
  double best_cost_work = std::numeric_limits<double>::infinity();
  const auto consider_best = [&](const Assignment& cand, double cost_work) {
    if (!best_set || cost_work < best_cost_work) {
      best_set = true;
      best_cost_work = cost_work;
      report.best_x = cand;
    }
  };

  std::vector<double> history;
  history.reserve(cfg.n_iter);
  std::vector<SubSolution> sols(p.k);
  Assignment x_new(n, 0);

  for (int iter = 0; iter < cfg.n_iter; ++iter) {
    const auto t0 = std::chrono::steady_clock::now();
    const LocalFields fields = compute_fields(x, ce);
    IterationRecord rec;
    rec.fields_norm = fields.norm();
    rec.t_fields_s = detail::seconds_since(t0);

    const auto t1 = std::chrono::steady_clock::now();
    {
      std::atomic<int> next{0};
      std::vector<std::exception_ptr> errors(p.k);
      const auto run = [&]() {
        for (int k = next.fetch_add(1); k < p.k; k = next.fetch_add(1)) {
          try {
            Subproblem sp = blueprint[k];
            for (int l = 0; l < sp.size(); ++l)
              sp.effective_linear[l] =
                  work->linear()[sp.nodes[l]] + fields.d[sp.nodes[l]];
            sols[k] = solve_with(cfg.subsolver, sp, cfg.budget,
                                 mix_seed(cfg.seed, iter + 1, k + 1));
          } catch (...) {
            errors[k] = std::current_exception();
          }
        }
      };
      const int workers = std::min(cfg.worker_count, p.k);
      if (workers <= 1) {
        run();
      } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(run);
        for (auto& t : pool) t.join();
      }
      for (int k = 0; k < p.k; ++k)
        if (errors[k]) std::rethrow_exception(errors[k]);
    }
    bool all_optimal = true;
    for (int k = 0; k < p.k; ++k) {
      if (sols[k].status == SolveStatus::Infeasible)
        throw InfeasibleError("subproblem " + std::to_string(k) + " (" +
                              std::to_string(p.members[k].size()) +
                              " variables) reported infeasible at iteration " +
                              std::to_string(iter + 1));
      if (sols[k].status != SolveStatus::Optimal) all_optimal = false;
      const auto& nodes = p.members[k];
      for (std::size_t l = 0; l < nodes.size(); ++l)
        x_new[nodes[l]] = sols[k].x[l];
    }
    rec.t_solve_s = detail::seconds_since(t1);

    const double h_new = evaluate_cost(*work, x_new);
    rec.cost_post_solve = h_new;
    rec.cost_post_sweep = h_new;
    consider_best(x_new, h_new);

    std::optional<Termination> term;
    if (!history.empty() &&
        std::abs(h_new - history.back()) <= cfg.convergence_tol) {
      term = Termination::Converged;
    } else {
      const int window =
          std::min<int>(cfg.cycle_window, static_cast<int>(history.size()));
      for (int t = static_cast<int>(history.size()) - window;
           t < static_cast<int>(history.size()); ++t)
        if (std::abs(h_new - history[t]) <= cfg.convergence_tol) {
          term = Termination::Cycle;
          break;
        }
      // With no cross couplings and proven-optimal parts nothing can change
      // in later iterations; the concatenation is already exact.
      if (!term && ce.empty() && all_optimal &&
          (p.k == 1 || global_card == nullptr))
        term = Termination::Converged;
    }
    history.push_back(h_new);
    x = x_new;

    if (term) {
      report.iterations.push_back(rec);
      report.termination = *term;
      break;
    }
    if (iter + 1 == cfg.n_iter) {
      report.iterations.push_back(rec);
      report.termination = Termination::MaxIter;
      break;
    }

    const auto t2 = std::chrono::steady_clock::now();
    if (sweep_mode == SweepMode::DoubleFlip || sweep_mode == SweepMode::Both)
      x = sweep_double_flip(*work, std::move(x), p,
                            mix_seed(cfg.seed, iter + 1, 0xd0));
    if (sweep_mode == SweepMode::SingleFlip || sweep_mode == SweepMode::Both)
      x = sweep_single_flip(*work, std::move(x));
    if (sweep_mode != SweepMode::None) {
      const double h_sweep = evaluate_cost(*work, x);
      rec.cost_post_sweep = h_sweep;
      if (hard_feasible(x)) consider_best(x, h_sweep);
    }
    rec.t_sweep_s = detail::seconds_since(t2);
    report.iterations.push_back(rec);
  }

  report.iterations_run = static_cast<int>(report.iterations.size());
  report.best_cost = evaluate_cost(qp, report.best_x);
  report.feasible = check_feasibility(qp, report.best_x).empty();
  report.penalty_offset = penalty_offset;
  report.tts_seconds = detail::seconds_since(t_start);
  return report;
}

}  // namespace split
