#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "split/graph.hpp"
#include "split/rng.hpp"

namespace split {

namespace detail {

/// Lloyd k-means with k-means++ seeding. Rows of `points` are the samples.
/// Empty clusters are repaired by moving the row farthest from its own
/// centroid. All tie-breaks are by lowest index, so the outcome is a pure
/// function of (points, k, seed).
inline std::vector<int> kmeans_rows(const Eigen::MatrixXd& points, int k,
                                    std::uint64_t seed) {
  const int n = static_cast<int>(points.rows());
  Rng rng(mix_seed(seed, 0x6b6d6561));
  std::vector<int> center_idx;
  center_idx.reserve(k);
  center_idx.push_back(static_cast<int>(rng.next_below(n)));
  Eigen::VectorXd d2 =
      (points.rowwise() - points.row(center_idx[0])).rowwise().squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    int pick = -1;
    if (total > 0.0) {
      double r = rng.next_double() * total;
      for (int i = 0; i < n; ++i) {
        r -= d2[i];
        if (r <= 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
      if (pick < 0)  // numeric underrun; take the last positive-distance row
        for (int i = n - 1; i >= 0; --i)
          if (d2[i] > 0.0) {
            pick = i;
            break;
          }
    }
    if (pick < 0) {
      // All rows coincide with a chosen center; fall back to fresh indices.
      std::vector<char> used(n, 0);
      for (int idx : center_idx) used[idx] = 1;
      for (int i = 0; i < n; ++i)
        if (!used[i]) {
          pick = i;
          break;
        }
      if (pick < 0) pick = 0;
    }
    center_idx.push_back(pick);
    d2 = d2.cwiseMin(
        (points.rowwise() - points.row(pick)).rowwise().squaredNorm());
  }

  Eigen::MatrixXd centers(k, points.cols());
  for (int c = 0; c < k; ++c) centers.row(c) = points.row(center_idx[c]);

  std::vector<int> labels(n, 0);
  std::vector<int> sizes(k, 0);
  for (int iter = 0; iter < 200; ++iter) {
    bool changed = false;
    sizes.assign(k, 0);
    for (int i = 0; i < n; ++i) {
      int best = 0;
      double best_d = (points.row(i) - centers.row(0)).squaredNorm();
      for (int c = 1; c < k; ++c) {
        const double d = (points.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      if (labels[i] != best) changed = true;
      labels[i] = best;
      ++sizes[best];
    }
    for (int c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      int far_node = -1;
      double far_d = -1.0;
      for (int i = 0; i < n; ++i) {
        if (sizes[labels[i]] < 2) continue;
        const double d = (points.row(i) - centers.row(labels[i])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far_node = i;
        }
      }
      if (far_node < 0) break;
      --sizes[labels[far_node]];
      labels[far_node] = c;
      ++sizes[c];
      changed = true;
    }
    for (int c = 0; c < k; ++c) centers.row(c).setZero();
    for (int i = 0; i < n; ++i) centers.row(labels[i]) += points.row(i);
    for (int c = 0; c < k; ++c)
      if (sizes[c] > 0) centers.row(c) /= static_cast<double>(sizes[c]);
    if (!changed) break;
  }
  return labels;
}

}  // namespace detail

/// Spectral partitioning in the normalized-cut style: symmetric normalized
/// Laplacian of the |Q| weights, embedding from the k lowest eigenvectors,
/// row normalization, then seeded k-means on the rows. Zero-degree nodes get
/// zero embedding rows and are placed into the smallest cluster afterwards.
///
/// Uses a dense eigensolver, so the graph must stay within `dense_limit`
/// nodes; beyond that use partition_greedy.
inline Partition partition_spectral(const InteractionGraph& g, int k,
                                    std::uint64_t seed, int dense_limit = 4000) {
  const int n = g.node_count;
  if (k < 1 || k > n) throw std::invalid_argument("k must be in [1, n]");
  if (n > dense_limit)
    throw std::invalid_argument(
        "graph exceeds the dense eigensolver limit (" +
        std::to_string(dense_limit) + " nodes); use partition_greedy");
  if (k == 1) return Partition::from_assignment(1, std::vector<int>(n, 0));
  if (k == n) {
    std::vector<int> labels(n);
    std::iota(labels.begin(), labels.end(), 0);
    return Partition::from_assignment(k, std::move(labels));
  }

  Eigen::VectorXd degree = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i)
    for (const auto& nb : g.adjacency[i]) degree[i] += nb.weight;

  Eigen::MatrixXd lap = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i) {
    if (degree[i] <= 0.0) continue;
    for (const auto& nb : g.adjacency[i]) {
      if (degree[nb.node] <= 0.0) continue;
      lap(i, nb.node) -= nb.weight / std::sqrt(degree[i] * degree[nb.node]);
    }
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap);
  if (eig.info() != Eigen::Success)
    throw std::runtime_error("eigendecomposition failed");
  Eigen::MatrixXd embedding = eig.eigenvectors().leftCols(k);

  for (int i = 0; i < n; ++i) {
    if (degree[i] <= 0.0) {
      embedding.row(i).setZero();
      continue;
    }
    const double norm = embedding.row(i).norm();
    if (norm > 0.0) embedding.row(i) /= norm;
  }

  std::vector<int> labels = detail::kmeans_rows(embedding, k, seed);

  std::vector<int> sizes(k, 0);
  for (int l : labels) ++sizes[l];
  for (int i = 0; i < n; ++i) {
    if (degree[i] > 0.0) continue;
    int smallest = 0;
    for (int c = 1; c < k; ++c)
      if (sizes[c] < sizes[smallest]) smallest = c;
    if (smallest != labels[i] && sizes[labels[i]] > 1) {
      --sizes[labels[i]];
      labels[i] = smallest;
      ++sizes[smallest];
    }
  }
  return Partition::from_assignment(k, std::move(labels));
}

namespace detail {

struct ClusterMergeState {
  std::vector<std::vector<int>> members;
  std::vector<std::unordered_map<int, double>> inter;  // cluster -> weight
  std::vector<char> alive;

  void merge(int a, int b) {  // b into a
    auto& ma = members[a];
    auto& mb = members[b];
    ma.insert(ma.end(), mb.begin(), mb.end());
    mb.clear();
    for (const auto& [c, w] : inter[b]) {
      if (c == a) continue;
      inter[a][c] += w;
      inter[c][a] += w;
      inter[c].erase(b);
    }
    inter[a].erase(b);
    for (auto& m : inter) m.erase(b);
    inter[b].clear();
    alive[b] = 0;
  }
};

}  // namespace detail

/// Scalable fallback partitioner: size-capped label propagation coarsens the
/// graph, clusters are merged down to exactly k parts (heaviest compatible
/// connections first), and a node-level rebalance enforces part sizes within
/// a factor of two of n/k.
inline Partition partition_greedy(const InteractionGraph& g, int k,
                                  std::uint64_t seed) {
  const int n = g.node_count;
  if (k < 1 || k > n) throw std::invalid_argument("k must be in [1, n]");
  if (k == 1) return Partition::from_assignment(1, std::vector<int>(n, 0));
  if (k == n) {
    std::vector<int> labels(n);
    std::iota(labels.begin(), labels.end(), 0);
    return Partition::from_assignment(k, std::move(labels));
  }

  const int cap = (n + k - 1) / k;
  std::vector<int> label(n);
  std::iota(label.begin(), label.end(), 0);
  std::vector<int> cluster_size(n, 1);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(mix_seed(seed, 0x6c70));
  rng.shuffle(order);

  std::vector<double> tally(n, 0.0);
  std::vector<int> touched;
  for (int pass = 0; pass < 30; ++pass) {
    bool moved = false;
    for (int v : order) {
      touched.clear();
      for (const auto& nb : g.adjacency[v]) {
        const int l = label[nb.node];
        if (tally[l] == 0.0) touched.push_back(l);
        tally[l] += nb.weight;
      }
      const double w_cur = tally[label[v]];
      int best = label[v];
      double w_best = w_cur;
      for (int l : touched) {
        if (l == label[v] || cluster_size[l] + 1 > cap) continue;
        if (tally[l] > w_best + 1e-12 ||
            (tally[l] > w_cur + 1e-12 && tally[l] >= w_best - 1e-12 &&
             l < best)) {
          w_best = tally[l];
          best = l;
        }
      }
      if (best != label[v]) {
        --cluster_size[label[v]];
        label[v] = best;
        ++cluster_size[best];
        moved = true;
      }
      for (int l : touched) tally[l] = 0.0;
    }
    if (!moved) break;
  }

  // Compact cluster ids and set up the merge state.
  std::vector<int> remap(n, -1);
  int cluster_count = 0;
  for (int v = 0; v < n; ++v)
    if (remap[label[v]] < 0) remap[label[v]] = cluster_count++;
  detail::ClusterMergeState st;
  st.members.resize(cluster_count);
  st.inter.resize(cluster_count);
  st.alive.assign(cluster_count, 1);
  for (int v = 0; v < n; ++v) st.members[remap[label[v]]].push_back(v);
  for (int v = 0; v < n; ++v)
    for (const auto& nb : g.adjacency[v]) {
      if (nb.node <= v) continue;
      const int a = remap[label[v]], b = remap[label[nb.node]];
      if (a == b) continue;
      st.inter[a][b] += nb.weight;
      st.inter[b][a] += nb.weight;
    }

  const int hi = std::max(1, (2 * n) / k);
  int alive_count = cluster_count;
  while (alive_count > k) {
    int best_a = -1, best_b = -1;
    double best_w = -1.0;
    bool best_fits = false;
    long long best_size = 0;
    for (int a = 0; a < cluster_count; ++a) {
      if (!st.alive[a]) continue;
      for (int b = a + 1; b < cluster_count; ++b) {
        if (!st.alive[b]) continue;
        const long long sz = static_cast<long long>(st.members[a].size()) +
                             static_cast<long long>(st.members[b].size());
        const bool fits = sz <= hi;
        const auto it = st.inter[a].find(b);
        const double w = it == st.inter[a].end() ? 0.0 : it->second;
        bool better;
        if (fits != best_fits) {
          better = fits;
        } else if (fits) {
          better = w > best_w || (w == best_w && sz < best_size);
        } else {
          better = sz < best_size;
        }
        if (best_a < 0 || better) {
          best_a = a;
          best_b = b;
          best_w = w;
          best_fits = fits;
          best_size = sz;
        }
      }
    }
    st.merge(best_a, best_b);
    --alive_count;
  }

  // Hand surviving clusters to parts; extra parts start empty and are filled
  // by the rebalance below.
  std::vector<int> part_of_cluster(cluster_count, -1);
  {
    std::vector<int> survivors;
    for (int c = 0; c < cluster_count; ++c)
      if (st.alive[c]) survivors.push_back(c);
    std::sort(survivors.begin(), survivors.end(), [&](int a, int b) {
      if (st.members[a].size() != st.members[b].size())
        return st.members[a].size() > st.members[b].size();
      return a < b;
    });
    for (std::size_t i = 0; i < survivors.size(); ++i)
      part_of_cluster[survivors[i]] = static_cast<int>(i);
  }
  std::vector<int> part(n, -1);
  for (int c = 0; c < cluster_count; ++c)
    if (st.alive[c])
      for (int v : st.members[c]) part[v] = part_of_cluster[c];

  std::vector<long long> part_size(k, 0);
  for (int v = 0; v < n; ++v) ++part_size[part[v]];

  const long long lo = std::max<long long>(1, (n + 2LL * k - 1) / (2LL * k));
  for (long long guard = 4LL * n * k; guard > 0; --guard) {
    int donor = 0, target = 0;
    for (int p = 1; p < k; ++p) {
      if (part_size[p] > part_size[donor]) donor = p;
      if (part_size[p] < part_size[target]) target = p;
    }
    if (part_size[target] >= lo && part_size[donor] <= hi) break;
    if (donor == target) break;
    int best_v = -1;
    double best_gain = -std::numeric_limits<double>::infinity();
    for (int v = 0; v < n; ++v) {
      if (part[v] != donor) continue;
      double to_target = 0.0, to_donor = 0.0;
      for (const auto& nb : g.adjacency[v]) {
        if (part[nb.node] == target) to_target += nb.weight;
        else if (part[nb.node] == donor) to_donor += nb.weight;
      }
      const double gain = to_target - to_donor;
      if (gain > best_gain) {
        best_gain = gain;
        best_v = v;
      }
    }
    if (best_v < 0) break;
    part[best_v] = target;
    --part_size[donor];
    ++part_size[target];
  }

  return Partition::from_assignment(k, std::move(part));
}

}  // namespace split
