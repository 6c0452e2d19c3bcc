/**
 *  Copyright (c) 2026 by Contributors
 * @file tests/testutil.hpp
 * @brief Independent oracles shared by the test suites: max-flow min cut,
 *        chi-square thresholds, exhaustive partition search, BFS closure.
 *        These stay implementation-free so they can check the real code paths.
 */
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <utility>
#include <vector>

#include "minisage/graph.hpp"
#include "minisage/ids.hpp"

namespace testutil {

using minisage::NodeId;

/// Emits both directions for every undirected pair.
inline std::vector<std::pair<NodeId, NodeId>> undirected(
    std::vector<std::pair<NodeId, NodeId>> pairs) {
  std::vector<std::pair<NodeId, NodeId>> out;
  out.reserve(pairs.size() * 2);
  for (auto [a, b] : pairs) {
    out.emplace_back(a, b);
    out.emplace_back(b, a);
  }
  return out;
}

/// Edmonds-Karp max flow on an undirected unit-capacity graph.
class MaxFlow {
 public:
  MaxFlow(std::uint64_t n, const std::vector<std::pair<NodeId, NodeId>>& undirected_pairs)
      : n_(n) {
    adj_.resize(n);
    for (auto [a, b] : undirected_pairs) {
      add_edge(a, b, 1);
      add_edge(b, a, 1);
    }
  }

  std::uint64_t max_flow(NodeId s, NodeId t) {
    for (auto& e : edges_) e.flow = 0;
    std::uint64_t total = 0;
    for (;;) {
      std::vector<std::int64_t> pred(n_, -1);
      std::queue<NodeId> q;
      q.push(s);
      pred[s] = -2;
      while (!q.empty() && pred[t] == -1) {
        NodeId u = q.front();
        q.pop();
        for (std::size_t idx : adj_[u]) {
          const Edge& e = edges_[idx];
          if (pred[e.to] == -1 && e.cap > e.flow) {
            pred[e.to] = static_cast<std::int64_t>(idx);
            q.push(e.to);
          }
        }
      }
      if (pred[t] == -1) break;
      for (NodeId v = t; v != s;) {
        auto idx = static_cast<std::size_t>(pred[v]);
        edges_[idx].flow += 1;
        edges_[idx ^ 1].flow -= 1;
        v = edges_[idx ^ 1].to;
      }
      ++total;
    }
    return total;
  }

  /// Global min cut = min over t != s of maxflow(s, t).
  std::uint64_t global_min_cut(NodeId s = 0) {
    std::uint64_t best = std::numeric_limits<std::uint64_t>::max();
    for (NodeId t = 0; t < n_; ++t)
      if (t != s) best = std::min(best, max_flow(s, t));
    return best;
  }

 private:
  struct Edge {
    NodeId to;
    std::int64_t cap;
    std::int64_t flow;
  };
  void add_edge(NodeId from, NodeId to, std::int64_t cap) {
    adj_[from].push_back(edges_.size());
    edges_.push_back({to, cap, 0});
  }
  std::uint64_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adj_;
};

/// Directed crossing-edge count straight off the edge list.
inline std::uint64_t cut_of(const std::vector<std::pair<NodeId, NodeId>>& edges,
                            const std::vector<minisage::PartId>& assign) {
  std::uint64_t cut = 0;
  for (auto [a, b] : edges)
    if (assign[a] != assign[b]) ++cut;
  return cut;
}

/// Upper critical value of chi-square with dof degrees at the given upper
/// tail probability (Wilson-Hilferty approximation).
inline double chi_square_critical(double dof, double upper_tail) {
  // z for the standard normal upper tail.
  double z;
  if (upper_tail <= 0.01 + 1e-12 && upper_tail >= 0.01 - 1e-12)
    z = 2.3263478740;
  else if (upper_tail <= 0.05 + 1e-12 && upper_tail >= 0.05 - 1e-12)
    z = 1.6448536270;
  else
    z = 2.3263478740;
  double a = 2.0 / (9.0 * dof);
  double v = 1.0 - a + z * std::sqrt(a);
  return dof * v * v * v;
}

/// Multi-hop in-neighborhood closure by BFS over the full graph: expected
/// node set per layer when fan-outs exceed every degree.
inline std::vector<std::set<NodeId>> bfs_layers(const minisage::Graph& g,
                                                const std::vector<NodeId>& seeds,
                                                std::size_t layers) {
  std::vector<std::set<NodeId>> out;
  std::set<NodeId> frontier(seeds.begin(), seeds.end());
  out.push_back(frontier);
  for (std::size_t l = 0; l < layers; ++l) {
    std::set<NodeId> next = frontier;
    for (NodeId v : frontier)
      for (NodeId u : g.in_neighbors(v)) next.insert(u);
    out.push_back(next);
    frontier = std::move(next);
  }
  return out;
}

}  // namespace testutil
