// Command-line front end: instance generation, solving, exact references and
// batch benchmarking around the split decomposition solver.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "split/split.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Exit codes: 0 ok, 1 usage, 2 I/O or parse, 3 infeasible, 4 solver failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitFailure = 4;

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
}

json load_json(const std::string& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw IoError(path + ": " + e.what());
  }
}

void emit_json(const json& j, const std::string& output) {
  if (output.empty())
    std::cout << j.dump(2) << "\n";
  else
    write_text(output, j.dump(2) + "\n");
}

int default_workers() {
  if (const char* env = std::getenv("SPLIT_WORKERS")) {
    const int w = std::atoi(env);
    if (w >= 1) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

struct SolveFlags {
  int k = -1;  // -1: not set; 0: floor(n/50) heuristic
  std::optional<int> iters;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> subsolver;
  std::optional<long long> budget_nodes;
  std::optional<double> time_limit_s;
  std::optional<int> workers;
  std::optional<std::string> sweep;
  std::optional<std::string> partitioner;
  std::string partition_file;
  std::string warm_start_file;
};

void add_solve_flags(CLI::App* cmd, SolveFlags& f) {
  cmd->add_option("--k", f.k,
                  "number of subproblems (0 selects the floor(n/50) rule)");
  cmd->add_option("--iters", f.iters, "maximum iterations");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--subsolver", f.subsolver,
                  "exhaustive | branch_bound | greedy");
  cmd->add_option("--budget-nodes", f.budget_nodes,
                  "branch-and-bound node budget per subproblem solve");
  cmd->add_option("--time-limit-s", f.time_limit_s,
                  "wall-clock limit per subproblem solve (seconds)");
  cmd->add_option("--workers", f.workers,
                  "worker threads (default: SPLIT_WORKERS or hardware)");
  cmd->add_option("--sweep", f.sweep,
                  "auto | single_flip | double_flip | both | none");
  cmd->add_option("--partitioner", f.partitioner,
                  "spectral | greedy | external");
  cmd->add_option("--partition", f.partition_file,
                  "JSON array of per-node part indices (bypasses partitioning)");
  cmd->add_option("--warm-start", f.warm_start_file,
                  "JSON array with an initial binary assignment");
}

split::SplitConfig make_config(const SolveFlags& f, const json* config_json,
                               int n) {
  split::SplitConfig cfg;
  cfg.worker_count = default_workers();
  bool have_k = false;
  if (config_json != nullptr) {
    cfg = split::config_from_json(*config_json);
    have_k = config_json->contains("k");
  }
  if (f.k >= 0) {
    cfg.k = f.k == 0 ? std::max(1, n / 50) : f.k;
    have_k = true;
  }
  if (!have_k)
    throw CLI::ValidationError(
        "--k", "specify --k (0 selects floor(n/50)) or provide it in --config");
  if (f.iters) cfg.n_iter = *f.iters;
  if (f.seed) cfg.seed = *f.seed;
  if (f.subsolver) cfg.subsolver = *f.subsolver;
  if (f.budget_nodes) cfg.budget.node_budget = *f.budget_nodes;
  if (f.time_limit_s) cfg.budget.wall_limit_s = *f.time_limit_s;
  if (f.workers) cfg.worker_count = *f.workers;
  if (f.sweep) cfg.sweep = split::sweep_from_string(*f.sweep);
  if (f.partitioner)
    cfg.partitioner = split::partitioner_from_string(*f.partitioner);
  if (!f.partition_file.empty()) {
    cfg.external_partition =
        load_json(f.partition_file).get<std::vector<int>>();
    cfg.partitioner = split::PartitionerKind::External;
  }
  if (!f.warm_start_file.empty())
    cfg.warm_start = split::assignment_from_json(load_json(f.warm_start_file));
  return cfg;
}

int cmd_solve(const std::string& problem_path, const std::string& config_path,
              const SolveFlags& flags, const std::string& output) {
  const json jp = load_json(problem_path);
  const split::QuadraticProgram qp = split::problem_from_json(jp);
  std::optional<json> jc;
  if (!config_path.empty()) jc = load_json(config_path);
  const split::SplitConfig cfg =
      make_config(flags, jc ? &*jc : nullptr, qp.size());
  const split::SolveReport report = split::split_solve(qp, cfg);
  json out = split::report_to_json(report);
  out["k"] = cfg.k;
  if (jp.contains("meta") && jp["meta"].value("family", "") == "maxcut")
    out["cut_value"] = -report.best_cost;
  emit_json(out, output);
  return report.feasible ? kExitOk : kExitInfeasible;
}

int cmd_exact(const std::string& problem_path,
              std::optional<long long> budget_nodes,
              std::optional<double> time_limit_s, const std::string& output) {
  const json jp = load_json(problem_path);
  const split::QuadraticProgram qp = split::problem_from_json(jp);
  split::SolverBudget budget;
  if (budget_nodes) budget.node_budget = *budget_nodes;
  if (time_limit_s) budget.wall_limit_s = *time_limit_s;
  const split::ExactResult res = split::solve_exact(qp, budget);
  if (res.status == split::SolveStatus::Infeasible) {
    std::cerr << "problem is infeasible\n";
    return kExitInfeasible;
  }
  json out;
  out["cost"] = res.cost;
  out["x"] = split::assignment_to_json(res.x);
  out["status"] = split::to_string(res.status);
  out["nodes_explored"] = res.nodes_explored;
  out["tts_seconds"] = res.tts_seconds;
  if (jp.contains("meta") && jp["meta"].value("family", "") == "maxcut")
    out["cut_value"] = -res.cost;
  emit_json(out, output);
  return kExitOk;
}

int cmd_gen_maxcut(int n, int blobs, double stddev, double threshold,
                   std::uint64_t seed, const std::string& output) {
  const split::WeightedGraph g =
      split::generate_blob_graph(n, blobs, stddev, threshold, seed);
  json j = split::problem_to_json(split::maxcut_to_qubo(g));
  j["meta"] = {{"family", "maxcut"},  {"generator", "blobs"},
               {"n", n},              {"blobs", blobs},
               {"std", stddev},       {"threshold", threshold},
               {"seed", seed},        {"edges", g.edges.size()}};
  emit_json(j, output);
  return kExitOk;
}

int cmd_gen_app(int sites, int devices, long long v, double radius,
                int radius_n0, double box, std::uint64_t seed,
                const std::string& output, const std::string& instance_output) {
  if (devices < 0) devices = 20 * sites;
  if (v < 0) v = sites / 2;
  double r = radius;
  if (radius_n0 > 0) r = split::scale_radius(radius, sites, radius_n0);
  const split::AppInstance inst =
      split::generate_app(sites, devices, v, r, box, seed);
  json j = split::problem_to_json(split::app_to_qubo(inst));
  j["meta"] = {{"family", "app"}, {"sites", sites},  {"devices", devices},
               {"v", v},          {"radius", r},     {"box", box},
               {"seed", seed}};
  emit_json(j, output);
  if (!instance_output.empty())
    emit_json(split::app_instance_to_json(inst), instance_output);
  return kExitOk;
}

int cmd_import_gset(const std::string& input, const std::string& output) {
  const split::WeightedGraph g = split::parse_gset(read_file(input));
  json j = split::problem_to_json(split::maxcut_to_qubo(g));
  j["meta"] = {{"family", "maxcut"},
               {"source", fs::path(input).filename().string()},
               {"edges", g.edges.size()}};
  emit_json(j, output);
  return kExitOk;
}

int cmd_bench(const std::string& dir, const std::string& method,
              std::optional<double> time_cap_s, const SolveFlags& flags,
              const std::string& reference_path, const std::string& csv_path,
              const std::string& json_path) {
  std::vector<fs::path> files;
  if (!fs::exists(dir)) throw IoError("no such directory '" + dir + "'");
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());

  json reference;
  if (!reference_path.empty()) {
    const json jr = load_json(reference_path);
    for (const auto& rec : jr.value("records", json::array()))
      reference[rec.at("instance").get<std::string>()] = rec;
  }

  std::vector<split::BenchmarkRecord> records;
  for (const auto& file : files) {
    const json jp = load_json(file.string());
    const split::QuadraticProgram qp = split::problem_from_json(jp);
    const bool is_maxcut =
        jp.contains("meta") && jp["meta"].value("family", "") == "maxcut";

    split::BenchmarkRecord rec;
    rec.instance = file.stem().string();
    rec.n = qp.size();
    rec.method = method;
    if (method == "split") {
      const split::SplitConfig cfg = make_config(flags, nullptr, qp.size());
      rec.k = cfg.k;
      const split::SolveReport rep = split::split_solve(qp, cfg);
      rec.best_cost = rep.best_cost;
      rec.feasible = rep.feasible;
      rec.tts_seconds = rep.tts_seconds;
      rec.iterations = rep.iterations_run;
    } else if (method == "exact") {
      split::SolverBudget budget;
      if (flags.budget_nodes) budget.node_budget = *flags.budget_nodes;
      if (time_cap_s) budget.wall_limit_s = *time_cap_s;
      const split::ExactResult res = split::solve_exact(qp, budget);
      rec.k = 1;
      rec.best_cost = res.cost;
      rec.feasible = res.status != split::SolveStatus::Infeasible;
      rec.tts_seconds = res.tts_seconds;
      rec.iterations = 1;
      if (time_cap_s) rec.method = "exact_capped";
    } else {
      throw CLI::ValidationError("--method", "must be 'split' or 'exact'");
    }
    if (is_maxcut) rec.cut_value = -rec.best_cost;
    if (reference.contains(rec.instance)) {
      const json& ref = reference[rec.instance];
      const double ref_cost = ref.at("best_cost").get<double>();
      rec.alpha = split::approximation_ratio(rec.best_cost, ref_cost);
      if (is_maxcut && rec.cut_value)
        rec.alpha_cut = split::approximation_ratio(*rec.cut_value, -ref_cost);
      const double ref_tts = ref.value("tts_seconds", 0.0);
      if (ref_tts > 0.0 && rec.tts_seconds > 0.0)
        rec.speedup = split::speedup(ref_tts, rec.tts_seconds);
    }
    records.push_back(std::move(rec));
  }

  std::ostringstream csv;
  csv << split::benchmark_csv_header() << "\n";
  for (const auto& r : records) csv << split::to_csv_row(r) << "\n";
  if (csv_path.empty() && json_path.empty())
    std::cout << csv.str();
  else if (!csv_path.empty())
    write_text(csv_path, csv.str());
  if (!json_path.empty()) {
    json out;
    out["records"] = json::array();
    for (const auto& r : records) out["records"].push_back(split::record_to_json(r));
    write_text(json_path, out.dump(2) + "\n");
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Decomposition solver for large binary quadratic programs"};
  app.require_subcommand(1);

  // solve
  auto* solve = app.add_subcommand("solve", "solve a problem JSON");
  std::string solve_problem, solve_config, solve_output;
  SolveFlags solve_flags;
  solve->add_option("--problem", solve_problem, "problem JSON")->required();
  solve->add_option("--config", solve_config, "solver config JSON");
  solve->add_option("--output", solve_output, "report path (default stdout)");
  add_solve_flags(solve, solve_flags);

  // exact
  auto* exact = app.add_subcommand(
      "exact", "exact branch-and-bound reference on the full problem");
  std::string exact_problem, exact_output;
  std::optional<long long> exact_nodes;
  std::optional<double> exact_time;
  exact->add_option("--problem", exact_problem, "problem JSON")->required();
  exact->add_option("--budget-nodes", exact_nodes, "node budget");
  exact->add_option("--time-limit-s", exact_time, "wall-clock cap (seconds)");
  exact->add_option("--output", exact_output, "result path (default stdout)");

  // gen-maxcut
  auto* genmc = app.add_subcommand("gen-maxcut",
                                   "generate a Gaussian-blob MaxCut instance");
  int mc_n = 90, mc_blobs = 3;
  double mc_std = 1.0, mc_threshold = 1.5;
  std::uint64_t mc_seed = 0;
  std::string mc_output;
  genmc->add_option("--n", mc_n, "node count");
  genmc->add_option("--blobs", mc_blobs, "number of Gaussian blobs");
  genmc->add_option("--std", mc_std, "blob standard deviation");
  genmc->add_option("--threshold", mc_threshold, "edge distance threshold");
  genmc->add_option("--seed", mc_seed, "random seed");
  genmc->add_option("--output", mc_output, "problem path (default stdout)");

  // gen-app
  auto* genapp =
      app.add_subcommand("gen-app", "generate an antenna placement instance");
  int app_sites = 50, app_devices = -1, app_radius_n0 = 0;
  long long app_v = -1;
  double app_radius = 15.0, app_box = 100.0;
  std::uint64_t app_seed = 0;
  std::string app_output, app_instance_output;
  genapp->add_option("--sites", app_sites, "candidate site count");
  genapp->add_option("--devices", app_devices,
                     "device count (default 20*sites)");
  genapp->add_option("--v", app_v, "antennas available (default sites/2)");
  genapp->add_option("--radius", app_radius, "coverage radius (km)");
  genapp->add_option("--radius-n0", app_radius_n0,
                     "scale the radius by sqrt(n0/sites) from this base size");
  genapp->add_option("--box", app_box, "square side (km)");
  genapp->add_option("--seed", app_seed, "random seed");
  genapp->add_option("--output", app_output, "problem path (default stdout)");
  genapp->add_option("--instance-output", app_instance_output,
                     "also write the raw geometry instance");

  // import-gset
  auto* gset = app.add_subcommand("import-gset",
                                  "convert a Gset text file to problem JSON");
  std::string gset_input, gset_output;
  gset->add_option("--input", gset_input, "Gset text file")->required();
  gset->add_option("--output", gset_output, "problem path (default stdout)");

  // bench
  auto* bench = app.add_subcommand("bench", "run a directory of instances");
  std::string bench_dir, bench_method = "split", bench_reference;
  std::string bench_csv, bench_json;
  std::optional<double> bench_cap;
  SolveFlags bench_flags;
  bench->add_option("--dir", bench_dir, "directory of problem JSON files")
      ->required();
  bench->add_option("--method", bench_method, "split | exact");
  bench->add_option("--time-cap-s", bench_cap,
                    "wall-clock cap per instance (exact method)");
  bench->add_option("--reference", bench_reference,
                    "bench JSON of a reference run (enables alpha/speedup)");
  bench->add_option("--csv", bench_csv, "CSV output path");
  bench->add_option("--json", bench_json, "JSON output path");
  add_solve_flags(bench, bench_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (solve->parsed())
      return cmd_solve(solve_problem, solve_config, solve_flags, solve_output);
    if (exact->parsed())
      return cmd_exact(exact_problem, exact_nodes, exact_time, exact_output);
    if (genmc->parsed())
      return cmd_gen_maxcut(mc_n, mc_blobs, mc_std, mc_threshold, mc_seed,
                            mc_output);
    if (genapp->parsed())
      return cmd_gen_app(app_sites, app_devices, app_v, app_radius,
                         app_radius_n0, app_box, app_seed, app_output,
                         app_instance_output);
    if (gset->parsed()) return cmd_import_gset(gset_input, gset_output);
    if (bench->parsed())
      return cmd_bench(bench_dir, bench_method, bench_cap, bench_flags,
                       bench_reference, bench_csv, bench_json);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const split::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const split::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}
