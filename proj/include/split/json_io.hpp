#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "split/core.hpp"
#include "split/instances.hpp"
#include "split/metrics.hpp"
#include "split/solver.hpp"

namespace split {

using nlohmann::json;

inline const char* to_string(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::CardinalityEq: return "cardinality_eq";
    case ConstraintKind::CardinalityLe: return "cardinality_le";
    case ConstraintKind::LinearEq: return "linear_eq";
    case ConstraintKind::LinearLe: return "linear_le";
  }
  return "?";
}

inline ConstraintKind constraint_kind_from_string(const std::string& s) {
  if (s == "cardinality_eq") return ConstraintKind::CardinalityEq;
  if (s == "cardinality_le") return ConstraintKind::CardinalityLe;
  if (s == "linear_eq") return ConstraintKind::LinearEq;
  if (s == "linear_le") return ConstraintKind::LinearLe;
  throw std::invalid_argument("unknown constraint kind '" + s + "'");
}

/// Canonical problem format: n, [i, j, value] triples, dense linear array,
/// constraint list. Unknown keys (e.g. "meta") are ignored on input.
inline json problem_to_json(const QuadraticProgram& qp) {
  json j;
  j["n"] = qp.size();
  json quad = json::array();
  for (const auto& t : qp.quad_terms()) quad.push_back({t.i, t.j, t.value});
  j["quadratic"] = std::move(quad);
  j["linear"] = qp.linear();
  json cons = json::array();
  for (const auto& c : qp.constraints()) {
    json jc;
    jc["kind"] = to_string(c.kind);
    jc["support"] = c.support;
    jc["coefficients"] = c.coefficients;
    jc["bound"] = c.bound;
    cons.push_back(std::move(jc));
  }
  j["constraints"] = std::move(cons);
  return j;
}

inline QuadraticProgram problem_from_json(const json& j) {
  if (!j.is_object() || !j.contains("n") || !j.contains("quadratic") ||
      !j.contains("linear"))
    throw std::invalid_argument("problem JSON needs n, quadratic and linear");
  const int n = j.at("n").get<int>();
  std::vector<QuadTerm> quad;
  for (const auto& t : j.at("quadratic")) {
    if (!t.is_array() || t.size() != 3)
      throw std::invalid_argument("quadratic entries must be [i, j, value]");
    quad.push_back({t[0].get<int>(), t[1].get<int>(), t[2].get<double>()});
  }
  auto linear = j.at("linear").get<std::vector<double>>();
  std::vector<Constraint> cons;
  for (const auto& jc : j.value("constraints", json::array())) {
    Constraint c;
    c.kind = constraint_kind_from_string(jc.at("kind").get<std::string>());
    c.support = jc.at("support").get<std::vector<int>>();
    if (jc.contains("coefficients"))
      c.coefficients = jc.at("coefficients").get<std::vector<double>>();
    else if (is_cardinality(c.kind))
      c.coefficients.assign(c.support.size(), 1.0);
    c.bound = jc.at("bound").get<double>();
    cons.push_back(std::move(c));
  }
  return QuadraticProgram(n, std::move(quad), std::move(linear),
                          std::move(cons));
}

inline json assignment_to_json(const Assignment& x) {
  json arr = json::array();
  for (auto b : x) arr.push_back(static_cast<int>(b));
  return arr;
}

inline Assignment assignment_from_json(const json& j) {
  Assignment x;
  for (const auto& v : j) {
    const int b = v.get<int>();
    if (b != 0 && b != 1)
      throw std::invalid_argument("assignment entries must be 0 or 1");
    x.push_back(static_cast<std::uint8_t>(b));
  }
  return x;
}

inline const char* to_string(PartitionerKind p) {
  switch (p) {
    case PartitionerKind::Spectral: return "spectral";
    case PartitionerKind::Greedy: return "greedy";
    case PartitionerKind::External: return "external";
  }
  return "?";
}

inline PartitionerKind partitioner_from_string(const std::string& s) {
  if (s == "spectral") return PartitionerKind::Spectral;
  if (s == "greedy") return PartitionerKind::Greedy;
  if (s == "external") return PartitionerKind::External;
  throw std::invalid_argument("unknown partitioner '" + s + "'");
}

inline const char* to_string(SweepMode m) {
  switch (m) {
    case SweepMode::Auto: return "auto";
    case SweepMode::SingleFlip: return "single_flip";
    case SweepMode::DoubleFlip: return "double_flip";
    case SweepMode::Both: return "both";
    case SweepMode::None: return "none";
  }
  return "?";
}

inline SweepMode sweep_from_string(const std::string& s) {
  if (s == "auto") return SweepMode::Auto;
  if (s == "single_flip") return SweepMode::SingleFlip;
  if (s == "double_flip") return SweepMode::DoubleFlip;
  if (s == "both") return SweepMode::Both;
  if (s == "none") return SweepMode::None;
  throw std::invalid_argument("unknown sweep mode '" + s + "'");
}

inline Termination termination_from_string(const std::string& s) {
  if (s == "converged") return Termination::Converged;
  if (s == "max_iter") return Termination::MaxIter;
  if (s == "cycle") return Termination::Cycle;
  throw std::invalid_argument("unknown termination '" + s + "'");
}

inline json config_to_json(const SplitConfig& cfg) {
  json j;
  j["k"] = cfg.k;
  j["n_iter"] = cfg.n_iter;
  j["seed"] = cfg.seed;
  j["partitioner"] = to_string(cfg.partitioner);
  j["subsolver"] = cfg.subsolver;
  j["node_budget"] = cfg.budget.node_budget;
  if (cfg.budget.wall_limit_s) j["wall_limit_s"] = *cfg.budget.wall_limit_s;
  j["sweep"] = to_string(cfg.sweep);
  j["convergence_tol"] = cfg.convergence_tol;
  j["cycle_window"] = cfg.cycle_window;
  j["worker_count"] = cfg.worker_count;
  j["penalty_weight"] = cfg.penalty_weight;
  j["spectral_dense_limit"] = cfg.spectral_dense_limit;
  if (cfg.external_partition) j["partition"] = *cfg.external_partition;
  if (cfg.warm_start) j["warm_start"] = assignment_to_json(*cfg.warm_start);
  return j;
}

inline SplitConfig config_from_json(const json& j) {
  SplitConfig cfg;
  cfg.k = j.value("k", cfg.k);
  cfg.n_iter = j.value("n_iter", cfg.n_iter);
  cfg.seed = j.value("seed", cfg.seed);
  if (j.contains("partitioner"))
    cfg.partitioner = partitioner_from_string(j.at("partitioner"));
  cfg.subsolver = j.value("subsolver", cfg.subsolver);
  cfg.budget.node_budget = j.value("node_budget", cfg.budget.node_budget);
  if (j.contains("wall_limit_s"))
    cfg.budget.wall_limit_s = j.at("wall_limit_s").get<double>();
  if (j.contains("sweep")) cfg.sweep = sweep_from_string(j.at("sweep"));
  cfg.convergence_tol = j.value("convergence_tol", cfg.convergence_tol);
  cfg.cycle_window = j.value("cycle_window", cfg.cycle_window);
  cfg.worker_count = j.value("worker_count", cfg.worker_count);
  cfg.penalty_weight = j.value("penalty_weight", cfg.penalty_weight);
  cfg.spectral_dense_limit =
      j.value("spectral_dense_limit", cfg.spectral_dense_limit);
  if (j.contains("partition")) {
    cfg.external_partition = j.at("partition").get<std::vector<int>>();
    cfg.partitioner = PartitionerKind::External;
  }
  if (j.contains("warm_start"))
    cfg.warm_start = assignment_from_json(j.at("warm_start"));
  return cfg;
}

inline json report_to_json(const SolveReport& r) {
  json j;
  j["best_cost"] = r.best_cost;
  j["best_x"] = assignment_to_json(r.best_x);
  j["feasible"] = r.feasible;
  j["iterations_run"] = r.iterations_run;
  j["termination"] = to_string(r.termination);
  j["tts_seconds"] = r.tts_seconds;
  j["partition_seconds"] = r.partition_seconds;
  j["penalty_offset"] = r.penalty_offset;
  json traj = json::array();
  for (const auto& it : r.iterations) {
    json ji;
    ji["cost_post_solve"] = it.cost_post_solve;
    ji["cost_post_sweep"] = it.cost_post_sweep;
    ji["fields_norm"] = it.fields_norm;
    ji["t_fields_s"] = it.t_fields_s;
    ji["t_solve_s"] = it.t_solve_s;
    ji["t_sweep_s"] = it.t_sweep_s;
    traj.push_back(std::move(ji));
  }
  j["trajectory"] = std::move(traj);
  return j;
}

inline SolveReport report_from_json(const json& j) {
  SolveReport r;
  r.best_cost = j.at("best_cost").get<double>();
  r.best_x = assignment_from_json(j.at("best_x"));
  r.feasible = j.at("feasible").get<bool>();
  r.iterations_run = j.at("iterations_run").get<int>();
  r.termination = termination_from_string(j.at("termination"));
  r.tts_seconds = j.at("tts_seconds").get<double>();
  r.partition_seconds = j.at("partition_seconds").get<double>();
  r.penalty_offset = j.value("penalty_offset", 0.0);
  for (const auto& ji : j.value("trajectory", json::array())) {
    IterationRecord it;
    it.cost_post_solve = ji.at("cost_post_solve").get<double>();
    it.cost_post_sweep = ji.at("cost_post_sweep").get<double>();
    it.fields_norm = ji.at("fields_norm").get<double>();
    it.t_fields_s = ji.at("t_fields_s").get<double>();
    it.t_solve_s = ji.at("t_solve_s").get<double>();
    it.t_sweep_s = ji.at("t_sweep_s").get<double>();
    r.iterations.push_back(it);
  }
  return r;
}

inline json app_instance_to_json(const AppInstance& inst) {
  json j;
  json sites = json::array(), devices = json::array();
  for (const auto& s : inst.sites) sites.push_back({s.x, s.y});
  for (const auto& d : inst.devices) devices.push_back({d.x, d.y});
  j["sites"] = std::move(sites);
  j["devices"] = std::move(devices);
  j["radius"] = inst.radius;
  j["v"] = inst.v;
  j["coverage"] = inst.coverage;
  json overlap = json::array();
  for (const auto& o : inst.overlap) overlap.push_back({o.i, o.j, o.count});
  j["overlap"] = std::move(overlap);
  return j;
}

inline AppInstance app_instance_from_json(const json& j) {
  std::vector<PlanarPoint> sites, devices;
  for (const auto& s : j.at("sites")) sites.push_back({s[0], s[1]});
  for (const auto& d : j.at("devices")) devices.push_back({d[0], d[1]});
  // Derived quantities are recomputed from the geometry.
  return AppInstance(std::move(sites), std::move(devices),
                     j.at("radius").get<double>(), j.at("v").get<long long>());
}

inline json record_to_json(const BenchmarkRecord& r) {
  json j;
  j["instance"] = r.instance;
  j["n"] = r.n;
  j["k"] = r.k;
  j["method"] = r.method;
  j["best_cost"] = r.best_cost;
  if (r.cut_value) j["cut_value"] = *r.cut_value;
  j["feasible"] = r.feasible;
  j["tts_seconds"] = r.tts_seconds;
  j["iterations"] = r.iterations;
  if (r.alpha) j["alpha"] = *r.alpha;
  if (r.alpha_cut) j["alpha_cut"] = *r.alpha_cut;
  if (r.speedup) j["speedup"] = *r.speedup;
  return j;
}

}  // namespace split
