#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "split/core.hpp"

namespace split {

/// Undirected interaction graph of a quadratic program: one node per
/// variable, one edge per stored pair, edge weight |Q_ij|.
struct InteractionGraph {
  int node_count = 0;
  std::vector<std::vector<Neighbor>> adjacency;

  double total_weight() const {
    double w = 0.0;
    for (int i = 0; i < node_count; ++i)
      for (const auto& nb : adjacency[i])
        if (nb.node > i) w += nb.weight;
    return w;
  }

  long long edge_count() const {
    long long m = 0;
    for (const auto& a : adjacency) m += static_cast<long long>(a.size());
    return m / 2;
  }
};

inline InteractionGraph build_graph(const QuadraticProgram& qp) {
  InteractionGraph g;
  g.node_count = qp.size();
  g.adjacency.resize(qp.size());
  for (int i = 0; i < qp.size(); ++i) {
    const auto nbs = qp.neighbors(i);
    g.adjacency[i].reserve(nbs.size());
    for (const auto& nb : nbs)
      g.adjacency[i].push_back({nb.node, std::abs(nb.weight)});
  }
  return g;
}

/// A partition of the node set [0, n) into k non-empty subgraphs.
/// `members` lists are sorted ascending, which fixes the iteration order of
/// everything built downstream.
struct Partition {
  int k = 0;
  std::vector<int> assignment;
  std::vector<std::vector<int>> members;

  int size() const { return static_cast<int>(assignment.size()); }

  /// Builds and validates a partition from per-node part labels.
  static Partition from_assignment(int k, std::vector<int> labels) {
    if (k < 1) throw std::invalid_argument("partition needs k >= 1");
    Partition p;
    p.k = k;
    p.members.resize(k);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      const int part = labels[i];
      if (part < 0 || part >= k)
        throw std::out_of_range("part label out of range at node " +
                                std::to_string(i));
      p.members[part].push_back(static_cast<int>(i));
    }
    for (int part = 0; part < k; ++part)
      if (p.members[part].empty())
        throw std::invalid_argument("partition has empty part " +
                                    std::to_string(part));
    p.assignment = std::move(labels);
    return p;
  }
};

/// Total |Q| weight of edges crossing between different parts.
inline double cut_weight(const InteractionGraph& g, const Partition& p) {
  if (p.size() != g.node_count)
    throw std::invalid_argument("partition does not cover the graph");
  double w = 0.0;
  for (int i = 0; i < g.node_count; ++i)
    for (const auto& nb : g.adjacency[i])
      if (nb.node > i && p.assignment[i] != p.assignment[nb.node])
        w += nb.weight;
  return w;
}

}  // namespace split
