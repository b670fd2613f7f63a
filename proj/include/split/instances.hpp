#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "split/core.hpp"
#include "split/rng.hpp"

namespace split {

struct GraphEdge {
  int i = 0;
  int j = 0;
  double weight = 0.0;
};

/// Plain weighted graph for MaxCut-style instances; edges stored once with
/// i < j, no duplicates.
struct WeightedGraph {
  int node_count = 0;
  std::vector<GraphEdge> edges;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Points sampled from `blob_count` isotropic Gaussians whose centers sit on
/// a circle of radius 10*stddev; nodes are connected (unit weight) when
/// closer than `threshold`. Deterministic per seed.
inline WeightedGraph generate_blob_graph(int n, int blob_count, double stddev,
                                         double threshold,
                                         std::uint64_t seed) {
  if (blob_count < 1 || n < blob_count)
    throw std::invalid_argument("need n >= blob_count >= 1");
  if (stddev <= 0.0 || threshold <= 0.0)
    throw std::invalid_argument("stddev and threshold must be > 0");
  Rng rng(mix_seed(seed, 0x626c6f62));
  std::vector<double> px(n), py(n);
  const double ring = 10.0 * stddev;
  int next = 0;
  for (int b = 0; b < blob_count; ++b) {
    const double angle = 2.0 * 3.14159265358979323846 * b / blob_count;
    const double cx = blob_count == 1 ? 0.0 : ring * std::cos(angle);
    const double cy = blob_count == 1 ? 0.0 : ring * std::sin(angle);
    const int count = n / blob_count + (b < n % blob_count ? 1 : 0);
    for (int t = 0; t < count; ++t, ++next) {
      px[next] = cx + stddev * rng.next_gaussian();
      py[next] = cy + stddev * rng.next_gaussian();
    }
  }
  WeightedGraph g;
  g.node_count = n;
  const double thr2 = threshold * threshold;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double dx = px[i] - px[j], dy = py[i] - py[j];
      if (dx * dx + dy * dy < thr2) g.edges.push_back({i, j, 1.0});
    }
  return g;
}

/// Cut QUBO: minimizing it maximizes the cut. Off-diagonal +2*w_ij, diagonal
/// -sum of incident weights, so the objective equals -cut(x) for every x.
inline QuadraticProgram maxcut_to_qubo(const WeightedGraph& g) {
  std::vector<QuadTerm> quad;
  quad.reserve(g.edges.size());
  std::vector<double> lin(g.node_count, 0.0);
  for (const auto& e : g.edges) {
    quad.push_back({e.i, e.j, 2.0 * e.weight});
    lin[e.i] -= e.weight;
    lin[e.j] -= e.weight;
  }
  return QuadraticProgram(g.node_count, std::move(quad), std::move(lin));
}

/// Total weight across the cut induced by x.
inline double cut_value(const WeightedGraph& g, const Assignment& x) {
  if (static_cast<int>(x.size()) != g.node_count)
    throw std::invalid_argument("assignment length does not match graph");
  double cut = 0.0;
  for (const auto& e : g.edges)
    if (x[e.i] != x[e.j]) cut += e.weight;
  return cut;
}

/// Parses the Gset plain-text format: header "n m", then m lines "i j w"
/// with 1-based node indices. Blank lines and trailing whitespace are
/// tolerated; anything else is a ParseError carrying the line number.
inline WeightedGraph parse_gset(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  const auto next_content_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (line.find_first_not_of(" \t\r\n") != std::string::npos) return true;
    }
    return false;
  };

  if (!next_content_line()) throw ParseError("empty Gset input");
  long long n = 0, m = 0;
  {
    std::istringstream hs(line);
    std::string extra;
    if (!(hs >> n >> m) || (hs >> extra))
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected header 'n m'");
    if (n < 0 || m < 0)
      throw ParseError("line " + std::to_string(line_no) + ": negative header");
  }
  WeightedGraph g;
  g.node_count = static_cast<int>(n);
  g.edges.reserve(m);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(m * 2);
  for (long long e = 0; e < m; ++e) {
    if (!next_content_line())
      throw ParseError("line " + std::to_string(line_no + 1) +
                       ": unexpected end of input (" + std::to_string(e) +
                       " of " + std::to_string(m) + " edges read)");
    std::istringstream es(line);
    long long i = 0, j = 0;
    double w = 0.0;
    std::string extra;
    if (!(es >> i >> j >> w) || (es >> extra))
      throw ParseError("line " + std::to_string(line_no) +
                       ": expected edge 'i j w'");
    if (i < 1 || i > n || j < 1 || j > n)
      throw ParseError("line " + std::to_string(line_no) +
                       ": node index out of range");
    if (i == j)
      throw ParseError("line " + std::to_string(line_no) + ": self-loop");
    const int a = static_cast<int>(std::min(i, j) - 1);
    const int b = static_cast<int>(std::max(i, j) - 1);
    if (!seen.insert(detail::pair_key(a, b)).second)
      throw ParseError("line " + std::to_string(line_no) + ": duplicate edge");
    g.edges.push_back({a, b, w});
  }
  if (next_content_line())
    throw ParseError("line " + std::to_string(line_no) +
                     ": trailing content after " + std::to_string(m) +
                     " edges");
  std::sort(g.edges.begin(), g.edges.end(),
            [](const GraphEdge& a, const GraphEdge& b) {
              return a.i != b.i ? a.i < b.i : a.j < b.j;
            });
  return g;
}

struct PlanarPoint {
  double x = 0.0;
  double y = 0.0;
};

struct OverlapEntry {
  int i = 0;
  int j = 0;
  long long count = 0;
};

/// An antenna-placement instance: candidate sites, devices to cover, a
/// coverage radius and the number of antennas available. The derived data
/// are the per-site covered-device counts A and the pairwise co-coverage
/// counts O (stored sparse, only when positive).
struct AppInstance {
  std::vector<PlanarPoint> sites;
  std::vector<PlanarPoint> devices;
  double radius = 0.0;
  long long v = 0;
  std::vector<long long> coverage;       // A_i
  std::vector<OverlapEntry> overlap;     // O_ij, i < j, count > 0

  AppInstance() = default;

  AppInstance(std::vector<PlanarPoint> sites_in,
              std::vector<PlanarPoint> devices_in, double radius_in,
              long long v_in)
      : sites(std::move(sites_in)),
        devices(std::move(devices_in)),
        radius(radius_in),
        v(v_in) {
    if (radius <= 0.0) throw std::invalid_argument("radius must be > 0");
    if (v < 0 || v > static_cast<long long>(sites.size()))
      throw std::invalid_argument("antenna count must lie in [0, n_sites]");
    recompute();
  }

  int site_count() const { return static_cast<int>(sites.size()); }

  void recompute() {
    const int ns = site_count();
    coverage.assign(ns, 0);
    std::map<std::pair<int, int>, long long> pairs;
    const double r2 = radius * radius;
    std::vector<int> covering;
    for (const auto& dev : devices) {
      covering.clear();
      for (int s = 0; s < ns; ++s) {
        const double dx = sites[s].x - dev.x, dy = sites[s].y - dev.y;
        if (dx * dx + dy * dy <= r2) covering.push_back(s);
      }
      for (std::size_t a = 0; a < covering.size(); ++a) {
        ++coverage[covering[a]];
        for (std::size_t b = a + 1; b < covering.size(); ++b)
          ++pairs[{covering[a], covering[b]}];
      }
    }
    overlap.clear();
    overlap.reserve(pairs.size());
    for (const auto& [key, count] : pairs)
      overlap.push_back({key.first, key.second, count});
  }
};

/// Sites and devices uniform in a box_km x box_km square; deterministic per
/// seed.
inline AppInstance generate_app(int n_sites, int n_devices, long long v,
                                double radius, double box_km,
                                std::uint64_t seed) {
  if (n_sites < 1) throw std::invalid_argument("need at least one site");
  if (n_devices < 0) throw std::invalid_argument("device count must be >= 0");
  if (box_km <= 0.0) throw std::invalid_argument("box size must be > 0");
  Rng rng(mix_seed(seed, 0x617070));
  std::vector<PlanarPoint> sites(n_sites), devices(n_devices);
  for (auto& s : sites) {
    s.x = rng.next_double() * box_km;
    s.y = rng.next_double() * box_km;
  }
  for (auto& d : devices) {
    d.x = rng.next_double() * box_km;
    d.y = rng.next_double() * box_km;
  }
  return AppInstance(std::move(sites), std::move(devices), radius, v);
}

/// Keeps site coverage overlapping sensibly as instances grow: the radius
/// shrinks with the square root of the site count.
inline double scale_radius(double radius_base, int n, int n_base) {
  if (radius_base <= 0.0 || n <= 0 || n_base <= 0)
    throw std::invalid_argument("scale_radius needs positive arguments");
  return radius_base * std::sqrt(static_cast<double>(n_base) /
                                 static_cast<double>(n));
}

/// Placement QUBO: pairwise co-coverage as repulsion, covered area as
/// reward, and an exact capacity on the number of chosen sites.
inline QuadraticProgram app_to_qubo(const AppInstance& inst) {
  const int n = inst.site_count();
  std::vector<QuadTerm> quad;
  quad.reserve(inst.overlap.size());
  for (const auto& o : inst.overlap)
    quad.push_back({o.i, o.j, static_cast<double>(o.count)});
  std::vector<double> lin(n);
  for (int i = 0; i < n; ++i)
    lin[i] = -static_cast<double>(inst.coverage[i]) / 4.0;
  std::vector<int> all(n);
  std::iota(all.begin(), all.end(), 0);
  std::vector<Constraint> cons{Constraint::cardinality_eq(std::move(all), inst.v)};
  return QuadraticProgram(n, std::move(quad), std::move(lin), std::move(cons));
}

}  // namespace split
