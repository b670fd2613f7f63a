#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace split {

/// Approximation ratio h_star / h_min against a verified optimum. Undefined
/// (nullopt) when the optimum is numerically zero; callers report the
/// absolute gap instead.
inline std::optional<double> approximation_ratio(double h_star, double h_min) {
  if (std::abs(h_min) <= 1e-12) return std::nullopt;
  return h_star / h_min;
}

/// Ratio of a reference time-to-solution over this solver's.
inline double speedup(double tts_ref, double tts_split) {
  if (tts_ref <= 0.0 || tts_split <= 0.0)
    throw std::invalid_argument("speedup needs positive times");
  return tts_ref / tts_split;
}

/// One row of a benchmark table.
struct BenchmarkRecord {
  std::string instance;
  int n = 0;
  int k = 0;
  std::string method;
  double best_cost = 0.0;
  std::optional<double> cut_value;  // MaxCut instances only
  bool feasible = true;
  double tts_seconds = 0.0;
  int iterations = 0;
  std::optional<double> alpha;      // cost ratio, when a reference is known
  std::optional<double> alpha_cut;  // cut-value ratio, MaxCut only
  std::optional<double> speedup;    // reference TTS / this TTS
};

// Fixed column order; downstream diffs rely on it.
inline std::string benchmark_csv_header() {
  return "instance,n,k,method,best_cost,cut_value,feasible,tts_seconds,"
         "iterations,alpha,alpha_cut,speedup";
}

inline std::string to_csv_row(const BenchmarkRecord& r) {
  std::ostringstream out;
  out.precision(17);
  const auto opt = [&](const std::optional<double>& v) {
    if (v) out << *v;
  };
  out << r.instance << ',' << r.n << ',' << r.k << ',' << r.method << ','
      << r.best_cost << ',';
  opt(r.cut_value);
  out << ',' << (r.feasible ? "true" : "false") << ',' << r.tts_seconds << ','
      << r.iterations << ',';
  opt(r.alpha);
  out << ',';
  opt(r.alpha_cut);
  out << ',';
  opt(r.speedup);
  return out.str();
}

}  // namespace split
