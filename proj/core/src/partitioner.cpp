/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/partitioner.cpp
 */
#include "minisage/partitioner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <stdexcept>
#include <unordered_set>

#include "minisage/rng.hpp"

namespace minisage {

namespace {

struct WeightedPair {
  NodeId a, b;  // a < b
  std::uint64_t w;
};

// Normalizes, sorts, and merges parallel pairs, summing weights.
std::vector<WeightedPair> merge_pairs(std::vector<WeightedPair> pairs) {
  std::sort(pairs.begin(), pairs.end(), [](const WeightedPair& x, const WeightedPair& y) {
    return x.a != y.a ? x.a < y.a : x.b < y.b;
  });
  std::vector<WeightedPair> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    if (!out.empty() && out.back().a == p.a && out.back().b == p.b)
      out.back().w += p.w;
    else
      out.push_back(p);
  }
  return out;
}

SupportGraph build_support_graph(std::uint64_t num_nodes, const std::vector<WeightedPair>& pairs,
                                 std::vector<double> node_weights, std::uint32_t weight_dim) {
  SupportGraph sg;
  sg.num_nodes = num_nodes;
  sg.weight_dim = weight_dim;
  sg.node_weights = std::move(node_weights);
  sg.adj_offsets.assign(num_nodes + 1, 0);
  for (const auto& p : pairs) {
    ++sg.adj_offsets[p.a + 1];
    ++sg.adj_offsets[p.b + 1];
  }
  for (std::uint64_t v = 0; v < num_nodes; ++v) sg.adj_offsets[v + 1] += sg.adj_offsets[v];
  sg.adj.resize(pairs.size() * 2);
  sg.adj_weights.resize(pairs.size() * 2);
  std::vector<std::uint64_t> cursor(sg.adj_offsets.begin(), sg.adj_offsets.end() - 1);
  for (const auto& p : pairs) {
    std::uint64_t ca = cursor[p.a]++, cb = cursor[p.b]++;
    sg.adj[ca] = p.b;
    sg.adj_weights[ca] = p.w;
    sg.adj[cb] = p.a;
    sg.adj_weights[cb] = p.w;
  }
  return sg;
}

// Per-dimension balance caps: (1 + eps) * total / k. Dimensions with zero
// total get an infinite cap (nothing to balance).
std::vector<double> balance_caps(const SupportGraph& g, const BalanceConstraints& c) {
  std::vector<double> totals(g.weight_dim, 0.0);
  for (std::uint64_t v = 0; v < g.num_nodes; ++v) {
    auto w = g.node_weight(v);
    for (std::uint32_t d = 0; d < g.weight_dim; ++d) totals[d] += w[d];
  }
  std::vector<double> caps(g.weight_dim);
  for (std::uint32_t d = 0; d < g.weight_dim; ++d) {
    caps[d] = totals[d] > 0.0
                  ? (1.0 + c.tolerance) * totals[d] / static_cast<double>(c.num_parts)
                  : std::numeric_limits<double>::infinity();
  }
  return caps;
}

bool fits_caps(std::span<const double> sums, std::span<const double> add,
               const std::vector<double>& caps) {
  for (std::size_t d = 0; d < caps.size(); ++d)
    if (sums[d] + add[d] > caps[d] + 1e-9) return false;
  return true;
}

std::vector<double> part_label_sums(const SupportGraph& g, std::span<const PartId> assign,
                                    std::uint32_t k) {
  std::vector<double> sums(static_cast<std::size_t>(k) * g.weight_dim, 0.0);
  for (std::uint64_t v = 0; v < g.num_nodes; ++v) {
    auto w = g.node_weight(v);
    for (std::uint32_t d = 0; d < g.weight_dim; ++d)
      sums[static_cast<std::size_t>(assign[v]) * g.weight_dim + d] += w[d];
  }
  return sums;
}

std::vector<double> imbalance_from_sums(const std::vector<double>& sums, std::uint32_t k,
                                        std::uint32_t dim) {
  std::vector<double> totals(dim, 0.0);
  for (std::uint32_t p = 0; p < k; ++p)
    for (std::uint32_t d = 0; d < dim; ++d) totals[d] += sums[static_cast<std::size_t>(p) * dim + d];
  std::vector<double> imb(dim, 1.0);
  for (std::uint32_t d = 0; d < dim; ++d) {
    if (totals[d] <= 0.0) continue;
    double worst = 0.0;
    for (std::uint32_t p = 0; p < k; ++p)
      worst = std::max(worst, sums[static_cast<std::size_t>(p) * dim + d]);
    imb[d] = worst * k / totals[d];
  }
  return imb;
}

std::uint64_t weighted_cut(const SupportGraph& g, std::span<const PartId> assign) {
  std::uint64_t cut = 0;
  for (std::uint64_t v = 0; v < g.num_nodes; ++v) {
    auto nbrs = g.neighbors(v);
    auto ws = g.weights(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i)
      if (nbrs[i] > v && assign[nbrs[i]] != assign[v]) cut += ws[i];
  }
  return cut;
}

std::uint64_t directed_cut(const Graph& g, std::span<const PartId> assign) {
  std::uint64_t cut = 0;
  for (NodeId v = 0; v < g.num_nodes; ++v)
    for (NodeId u : g.in_neighbors(v))
      if (assign[u] != assign[v]) ++cut;
  return cut;
}

void check_feasible(const SupportGraph& g, const BalanceConstraints& c,
                    const std::vector<double>& caps) {
  for (std::uint64_t v = 0; v < g.num_nodes; ++v) {
    auto w = g.node_weight(v);
    for (std::uint32_t d = 0; d < g.weight_dim; ++d) {
      if (w[d] > caps[d] + 1e-9)
        throw ConstraintInfeasible("constraint dim " + std::to_string(d) +
                                   " cannot be balanced over " + std::to_string(c.num_parts) +
                                   " parts within tolerance");
    }
  }
}

}  // namespace

BalanceConstraints BalanceConstraints::unit(std::uint32_t k, std::uint64_t num_nodes,
                                            double eps) {
  BalanceConstraints c;
  c.num_parts = k;
  c.tolerance = eps;
  c.label_dim = 1;
  c.node_labels.assign(num_nodes, 1.0);
  return c;
}

CoarseLevel build_support_level(const Graph& g, const BalanceConstraints& constraints) {
  std::vector<WeightedPair> pairs;
  pairs.reserve(g.num_edges);
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    for (NodeId u : g.in_neighbors(v)) {
      if (u == v) continue;  // self-loops never cross a cut
      pairs.push_back({std::min(u, v), std::max(u, v), 1});
    }
  }
  std::vector<double> weights;
  std::uint32_t dim = 1;
  if (!constraints.node_labels.empty()) {
    if (constraints.node_labels.size() != g.num_nodes * constraints.label_dim)
      throw std::invalid_argument("node_labels size mismatch");
    weights = constraints.node_labels;
    dim = constraints.label_dim;
  } else {
    weights.assign(g.num_nodes, 1.0);
  }
  CoarseLevel lvl;
  lvl.graph = build_support_graph(g.num_nodes, merge_pairs(std::move(pairs)), std::move(weights),
                                  dim);
  lvl.coarse_map.resize(g.num_nodes);
  std::iota(lvl.coarse_map.begin(), lvl.coarse_map.end(), 0);
  lvl.level = 0;
  return lvl;
}

CoarseLevel coarsen(const CoarseLevel& level, const BalanceConstraints& constraints,
                    std::uint64_t seed) {
  const SupportGraph& g = level.graph;
  if (g.num_nodes < 2) {
    CoarseLevel out = level;
    out.terminal = true;
    return out;
  }
  // Matching granularity: coarse nodes heavier than eps * total / k cannot be
  // packed into balanced bins later, so merges stop at that weight. With one
  // partition there is nothing to balance.
  std::vector<double> caps(g.weight_dim, std::numeric_limits<double>::infinity());
  if (constraints.num_parts > 1) {
    std::vector<double> totals(g.weight_dim, 0.0);
    for (std::uint64_t v = 0; v < g.num_nodes; ++v) {
      auto w = g.node_weight(v);
      for (std::uint32_t d = 0; d < g.weight_dim; ++d) totals[d] += w[d];
    }
    for (std::uint32_t d = 0; d < g.weight_dim; ++d) {
      if (totals[d] > 0.0)
        caps[d] = constraints.tolerance * totals[d] / static_cast<double>(constraints.num_parts);
    }
  }

  constexpr std::uint64_t kUnmatched = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> mate(g.num_nodes, kUnmatched);
  std::vector<NodeId> order(g.num_nodes);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  for (std::uint64_t i = g.num_nodes - 1; i > 0; --i)
    std::swap(order[i], order[rng.next_below(i + 1)]);

  std::vector<double> merged(g.weight_dim);
  std::uint64_t matched_pairs = 0;
  for (NodeId u : order) {
    if (mate[u] != kUnmatched) continue;
    auto nbrs = g.neighbors(u);
    auto ws = g.weights(u);
    NodeId best = kUnmatched;
    std::uint64_t best_w = 0;
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      NodeId v = nbrs[i];
      if (v == u || mate[v] != kUnmatched) continue;
      // A merge must not create a node heavier than the balance cap.
      auto wu = g.node_weight(u);
      auto wv = g.node_weight(v);
      bool ok = true;
      for (std::uint32_t d = 0; d < g.weight_dim; ++d)
        if (wu[d] + wv[d] > caps[d] + 1e-9) ok = false;
      if (!ok) continue;
      if (best == kUnmatched || ws[i] > best_w || (ws[i] == best_w && v < best)) {
        best = v;
        best_w = ws[i];
      }
    }
    if (best != kUnmatched) {
      mate[u] = best;
      mate[best] = u;
      ++matched_pairs;
    } else {
      mate[u] = u;
    }
  }

  CoarseLevel out;
  out.level = level.level + 1;
  out.terminal = matched_pairs == 0;
  if (out.terminal) {
    out.graph = g;
    out.coarse_map.resize(g.num_nodes);
    std::iota(out.coarse_map.begin(), out.coarse_map.end(), 0);
    return out;
  }

  // Coarse ids in fine-id order: deterministic given the matching.
  out.coarse_map.assign(g.num_nodes, kUnmatched);
  std::uint64_t num_coarse = 0;
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    if (out.coarse_map[v] != kUnmatched) continue;
    out.coarse_map[v] = num_coarse;
    out.coarse_map[mate[v]] = num_coarse;
    ++num_coarse;
  }

  std::vector<double> coarse_weights(num_coarse * g.weight_dim, 0.0);
  std::vector<std::uint64_t> degree_sum(num_coarse, 0), constituents(num_coarse, 0);
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    std::uint64_t c = out.coarse_map[v];
    auto w = g.node_weight(v);
    for (std::uint32_t d = 0; d < g.weight_dim; ++d) coarse_weights[c * g.weight_dim + d] += w[d];
    degree_sum[c] += g.degree(v);
    ++constituents[c];
  }

  std::vector<WeightedPair> pairs;
  pairs.reserve(g.num_undirected_edges());
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    auto nbrs = g.neighbors(v);
    auto ws = g.weights(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) {
      if (nbrs[i] <= v) continue;
      std::uint64_t cu = out.coarse_map[v], cv = out.coarse_map[nbrs[i]];
      if (cu == cv) continue;
      pairs.push_back({std::min(cu, cv), std::max(cu, cv), ws[i]});
    }
  }
  pairs = merge_pairs(std::move(pairs));

  // Edge retention: node c keeps its ceil(mean constituent degree) heaviest
  // incident edges; an edge survives if either endpoint keeps it.
  std::vector<std::vector<std::pair<std::uint64_t, std::size_t>>> incident(num_coarse);
  for (std::size_t e = 0; e < pairs.size(); ++e) {
    incident[pairs[e].a].push_back({pairs[e].w, e});
    incident[pairs[e].b].push_back({pairs[e].w, e});
  }
  std::vector<bool> retained(pairs.size(), false);
  for (std::uint64_t c = 0; c < num_coarse; ++c) {
    auto& inc = incident[c];
    std::uint64_t cap = (degree_sum[c] + constituents[c] - 1) / constituents[c];  // ceil
    if (inc.size() <= cap) {
      for (auto& [w, e] : inc) retained[e] = true;
      continue;
    }
    std::sort(inc.begin(), inc.end(), [&](const auto& x, const auto& y) {
      if (x.first != y.first) return x.first > y.first;
      return std::min(pairs[x.second].a, pairs[x.second].b) <
             std::min(pairs[y.second].a, pairs[y.second].b);
    });
    for (std::uint64_t i = 0; i < cap; ++i) retained[inc[i].second] = true;
  }
  std::vector<WeightedPair> kept;
  kept.reserve(pairs.size());
  for (std::size_t e = 0; e < pairs.size(); ++e)
    if (retained[e]) kept.push_back(pairs[e]);

  out.graph = build_support_graph(num_coarse, std::move(kept), std::move(coarse_weights),
                                  g.weight_dim);
  return out;
}

PartitionAssignment initial_partition(const CoarseLevel& coarsest,
                                      const BalanceConstraints& constraints,
                                      std::uint32_t trials, std::uint64_t seed) {
  const SupportGraph& g = coarsest.graph;
  const std::uint32_t k = constraints.num_parts;
  if (k == 0) throw std::invalid_argument("num_parts must be >= 1");
  const std::vector<double> caps = balance_caps(g, constraints);
  check_feasible(g, constraints, caps);

  PartitionAssignment best;
  bool best_feasible = false;
  std::uint64_t best_cut = std::numeric_limits<std::uint64_t>::max();

  for (std::uint32_t trial = 0; trial < std::max(trials, 1u); ++trial) {
    std::vector<PartId> assign(g.num_nodes, std::numeric_limits<PartId>::max());
    if (k == 1) {
      std::fill(assign.begin(), assign.end(), 0);
    } else {
      Rng rng(mix_seed(seed, trial));
      std::vector<double> sums(static_cast<std::size_t>(k) * g.weight_dim, 0.0);
      // conn[v*k+p]: weight from unassigned v to partition p.
      std::vector<std::uint64_t> conn(g.num_nodes * k, 0);
      std::vector<std::uint64_t> conn_total(g.num_nodes, 0);
      std::uint64_t unassigned = g.num_nodes;

      auto place = [&](NodeId v, PartId p) {
        assign[v] = p;
        auto w = g.node_weight(v);
        for (std::uint32_t d = 0; d < g.weight_dim; ++d)
          sums[static_cast<std::size_t>(p) * g.weight_dim + d] += w[d];
        auto nbrs = g.neighbors(v);
        auto ws = g.weights(v);
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
          if (assign[nbrs[i]] != std::numeric_limits<PartId>::max()) continue;
          conn[nbrs[i] * k + p] += ws[i];
          conn_total[nbrs[i]] += ws[i];
        }
        --unassigned;
      };

      auto relative_load = [&](PartId p) {
        double load = 0.0;
        for (std::uint32_t d = 0; d < g.weight_dim; ++d) {
          if (!std::isfinite(caps[d])) continue;
          load = std::max(load, sums[static_cast<std::size_t>(p) * g.weight_dim + d] / caps[d]);
        }
        return load;
      };

      // Seed partition 0 randomly, then each next partition at the unassigned
      // node farthest (BFS hops) from all seeds so far; unreachable nodes
      // count as infinitely far. Spread-out seeds keep the grown regions from
      // carving up the same cluster.
      std::vector<NodeId> seeds;
      seeds.push_back(rng.next_below(g.num_nodes));
      place(seeds[0], 0);
      constexpr std::uint64_t kInf = std::numeric_limits<std::uint64_t>::max();
      for (PartId p = 1; p < k && unassigned > 0; ++p) {
        std::vector<std::uint64_t> dist(g.num_nodes, kInf);
        std::vector<NodeId> queue(seeds.begin(), seeds.end());
        for (NodeId s : seeds) dist[s] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
          NodeId u = queue[head];
          for (NodeId w : g.neighbors(u)) {
            if (dist[w] != kInf) continue;
            dist[w] = dist[u] + 1;
            queue.push_back(w);
          }
        }
        NodeId best = kInf;
        for (NodeId v = 0; v < g.num_nodes; ++v) {
          if (assign[v] != std::numeric_limits<PartId>::max()) continue;
          if (best == kInf || dist[v] > dist[best]) best = v;
        }
        seeds.push_back(best);
        place(best, p);
      }

      while (unassigned > 0) {
        // Grow the least-loaded partition next.
        std::vector<PartId> order(k);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(),
                  [&](PartId a, PartId b) { return relative_load(a) < relative_load(b); });
        bool placed = false;
        for (PartId p : order) {
          // Claim the boundary node with the smallest cut increase.
          NodeId pick = std::numeric_limits<NodeId>::max();
          std::int64_t best_delta = std::numeric_limits<std::int64_t>::max();
          for (NodeId v = 0; v < g.num_nodes; ++v) {
            if (assign[v] != std::numeric_limits<PartId>::max()) continue;
            if (conn[v * k + p] == 0) continue;
            auto w = g.node_weight(v);
            if (!fits_caps({sums.data() + static_cast<std::size_t>(p) * g.weight_dim,
                            g.weight_dim},
                           w, caps))
              continue;
            auto delta = static_cast<std::int64_t>(conn_total[v] - conn[v * k + p]);
            if (delta < best_delta || (delta == best_delta && v < pick)) {
              best_delta = delta;
              pick = v;
            }
          }
          if (pick == std::numeric_limits<NodeId>::max()) {
            // No boundary candidate; claim any feasible node to keep growing.
            for (NodeId v = 0; v < g.num_nodes; ++v) {
              if (assign[v] != std::numeric_limits<PartId>::max()) continue;
              auto w = g.node_weight(v);
              if (fits_caps({sums.data() + static_cast<std::size_t>(p) * g.weight_dim,
                             g.weight_dim},
                            w, caps)) {
                pick = v;
                break;
              }
            }
          }
          if (pick != std::numeric_limits<NodeId>::max()) {
            place(pick, p);
            placed = true;
            break;
          }
        }
        if (!placed) {
          // Nothing fits anywhere: force-assign to the least-loaded partition.
          // The violation is reported through the imbalance field.
          for (NodeId v = 0; v < g.num_nodes; ++v) {
            if (assign[v] != std::numeric_limits<PartId>::max()) continue;
            place(v, order.empty() ? 0 : order.front());
          }
        }
      }
    }

    std::uint64_t cut = weighted_cut(g, assign);
    auto sums = part_label_sums(g, assign, k);
    auto imb = imbalance_from_sums(sums, k, g.weight_dim);
    bool feasible = true;
    for (double x : imb)
      if (x > 1.0 + constraints.tolerance + 1e-9) feasible = false;

    if ((feasible && !best_feasible) ||
        (feasible == best_feasible && cut < best_cut)) {
      best.assign = std::move(assign);
      best.edge_cut = cut;
      best.imbalance = imb;
      best_feasible = feasible;
      best_cut = cut;
    }
  }
  return best;
}

PartitionAssignment refine(const CoarseLevel& level, const PartitionAssignment& input,
                           const BalanceConstraints& constraints, std::uint32_t iters) {
  const SupportGraph& g = level.graph;
  const std::uint32_t k = constraints.num_parts;
  if (input.assign.size() != g.num_nodes)
    throw std::invalid_argument("assignment size mismatch");

  PartitionAssignment out = input;
  std::vector<PartId>& assign = out.assign;
  const std::vector<double> caps = balance_caps(g, constraints);

  std::vector<std::uint64_t> conn(g.num_nodes * k, 0);
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    auto nbrs = g.neighbors(v);
    auto ws = g.weights(v);
    for (std::size_t i = 0; i < nbrs.size(); ++i) conn[v * k + assign[nbrs[i]]] += ws[i];
  }
  std::vector<double> sums = part_label_sums(g, assign, k);
  std::uint64_t cut = weighted_cut(g, assign);
  std::vector<std::uint64_t> part_count(k, 0);
  for (PartId p : assign) ++part_count[p];

  // Relative load of one partition in one dimension; used by the zero-gain
  // balance rule (sum-of-squares potential strictly decreasing => no cycling).
  auto load = [&](PartId p, std::uint32_t d) {
    return std::isfinite(caps[d]) ? sums[static_cast<std::size_t>(p) * g.weight_dim + d] / caps[d]
                                  : 0.0;
  };

  // Best acceptable move for v under the current state: positive gain, or
  // zero gain with a strict balance improvement (sum-of-squares potential), in
  // either case within caps and never emptying the source partition.
  auto best_move = [&](NodeId v) -> std::pair<PartId, std::int64_t> {
    PartId s = assign[v];
    if (part_count[s] <= 1) return {s, 0};
    std::uint64_t internal = conn[v * k + s];
    auto w = g.node_weight(v);
    PartId best_t = s;
    std::int64_t best_gain = -1;
    for (PartId t = 0; t < k; ++t) {
      if (t == s || conn[v * k + t] == 0) continue;
      if (!fits_caps({sums.data() + static_cast<std::size_t>(t) * g.weight_dim, g.weight_dim},
                     w, caps))
        continue;
      auto gain = static_cast<std::int64_t>(conn[v * k + t]) -
                  static_cast<std::int64_t>(internal);
      if (gain < 0) continue;
      if (gain == 0) {
        double delta = 0.0;
        for (std::uint32_t d = 0; d < g.weight_dim; ++d) {
          if (!std::isfinite(caps[d])) continue;
          double wd = w[d] / caps[d];
          double ls = load(s, d), lt = load(t, d);
          delta += (lt + wd) * (lt + wd) - lt * lt + (ls - wd) * (ls - wd) - ls * ls;
        }
        if (delta >= -1e-12) continue;
      }
      if (gain > best_gain || (gain == best_gain && t < best_t)) {
        best_t = t;
        best_gain = gain;
      }
    }
    return {best_t, best_gain};
  };

  for (std::uint32_t pass = 0; pass < iters && k > 1; ++pass) {
    std::uint64_t moves = 0;
    std::vector<bool> moved(g.num_nodes, false);
    // Lazy max-heap by gain; stale entries are re-checked on pop.
    std::priority_queue<std::pair<std::int64_t, NodeId>> heap;
    for (NodeId v = 0; v < g.num_nodes; ++v) {
      auto [t, gain] = best_move(v);
      if (t != assign[v]) heap.push({gain, v});
    }
    while (!heap.empty()) {
      auto [queued_gain, v] = heap.top();
      heap.pop();
      if (moved[v]) continue;
      auto [best_t, best_gain] = best_move(v);
      PartId s = assign[v];
      if (best_t == s) continue;
      if (best_gain < queued_gain) {
        heap.push({best_gain, v});  // stale; requeue at the current gain
        continue;
      }

      auto w = g.node_weight(v);
      auto nbrs = g.neighbors(v);
      auto ws = g.weights(v);
      for (std::size_t i = 0; i < nbrs.size(); ++i) {
        conn[nbrs[i] * k + s] -= ws[i];
        conn[nbrs[i] * k + best_t] += ws[i];
        if (!moved[nbrs[i]]) {
          auto [nt, ngain] = best_move(nbrs[i]);
          if (nt != assign[nbrs[i]]) heap.push({ngain, nbrs[i]});
        }
      }
      for (std::uint32_t d = 0; d < g.weight_dim; ++d) {
        sums[static_cast<std::size_t>(s) * g.weight_dim + d] -= w[d];
        sums[static_cast<std::size_t>(best_t) * g.weight_dim + d] += w[d];
      }
      cut -= static_cast<std::uint64_t>(best_gain);
      assign[v] = best_t;
      --part_count[s];
      ++part_count[best_t];
      moved[v] = true;
      ++moves;
    }
    if (moves == 0) break;
  }

  out.edge_cut = cut;
  out.imbalance = imbalance_from_sums(sums, k, g.weight_dim);
  return out;
}

PartitionAssignment partition(const Graph& g, const BalanceConstraints& constraints,
                              std::uint64_t seed, const PartitionOptions& opts) {
  const std::uint32_t k = constraints.num_parts;
  if (k == 0) throw std::invalid_argument("num_parts must be >= 1");

  PartitionAssignment result;
  if (g.num_nodes == 0) {
    result.edge_cut = 0;
    result.imbalance.assign(constraints.label_dim, 1.0);
    return result;
  }
  if (k == 1) {
    result.assign.assign(g.num_nodes, 0);
    result.edge_cut = 0;
    result.imbalance.assign(constraints.label_dim, 1.0);
    return result;
  }

  std::vector<CoarseLevel> levels;
  levels.push_back(build_support_level(g, constraints));
  {
    const std::vector<double> caps = balance_caps(levels[0].graph, constraints);
    check_feasible(levels[0].graph, constraints, caps);
  }

  // Coarsen well below the initial-partitioning cap; the deeper the hierarchy,
  // the more the refinement cascade can recover.
  const std::uint64_t target =
      std::min(opts.coarsen_cap, std::max<std::uint64_t>(opts.coarsen_target, 2)) * k;
  while (levels.back().graph.num_nodes > target) {
    CoarseLevel next = coarsen(levels.back(), constraints, mix_seed(seed, levels.size()));
    if (next.terminal) break;
    // Stop when coarsening stalls.
    if (next.graph.num_nodes > levels.back().graph.num_nodes * 49 / 50) break;
    levels.push_back(std::move(next));
  }

  PartitionAssignment assign =
      initial_partition(levels.back(), constraints, opts.initial_trials, mix_seed(seed, 0x1717));
  assign = refine(levels.back(), assign, constraints, opts.refine_iters);

  for (std::size_t i = levels.size(); i-- > 1;) {
    const CoarseLevel& coarse = levels[i];
    const CoarseLevel& fine = levels[i - 1];
    PartitionAssignment projected;
    projected.assign.resize(fine.graph.num_nodes);
    for (NodeId v = 0; v < fine.graph.num_nodes; ++v)
      projected.assign[v] = assign.assign[coarse.coarse_map[v]];
    assign = refine(fine, projected, constraints, opts.refine_iters);
  }

  result.assign = std::move(assign.assign);
  result.edge_cut = directed_cut(g, result.assign);
  auto sums = part_label_sums(levels[0].graph, result.assign, k);
  result.imbalance = imbalance_from_sums(sums, k, levels[0].graph.weight_dim);
  return result;
}

PartitionAssignment random_partition(const Graph& g, std::uint32_t k, std::uint64_t seed) {
  if (k == 0) throw std::invalid_argument("num_parts must be >= 1");
  Rng rng(seed);
  PartitionAssignment out;
  out.assign.resize(g.num_nodes);
  for (NodeId v = 0; v < g.num_nodes; ++v)
    out.assign[v] = static_cast<PartId>(rng.next_below(k));
  out.edge_cut = directed_cut(g, out.assign);
  auto stats = partition_stats(out, g, BalanceConstraints::unit(k, g.num_nodes));
  out.imbalance = stats.imbalance;
  return out;
}

PartitionStats partition_stats(const PartitionAssignment& assignment, const Graph& g,
                               const BalanceConstraints& constraints) {
  if (assignment.assign.size() != g.num_nodes)
    throw std::invalid_argument("assignment size mismatch");
  const std::uint32_t k = constraints.num_parts;
  PartitionStats stats;
  stats.edge_cut = directed_cut(g, assignment.assign);

  const std::uint32_t dim = constraints.node_labels.empty() ? 1 : constraints.label_dim;
  std::vector<double> sums(static_cast<std::size_t>(k) * dim, 0.0);
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    if (constraints.node_labels.empty()) {
      sums[static_cast<std::size_t>(assignment.assign[v]) * dim] += 1.0;
    } else {
      auto w = constraints.labels_of(v);
      for (std::uint32_t d = 0; d < dim; ++d)
        sums[static_cast<std::size_t>(assignment.assign[v]) * dim + d] += w[d];
    }
  }
  stats.imbalance = imbalance_from_sums(sums, k, dim);

  std::vector<std::unordered_set<NodeId>> halos(k);
  for (NodeId v = 0; v < g.num_nodes; ++v) {
    PartId p = assignment.assign[v];
    for (NodeId u : g.in_neighbors(v))
      if (assignment.assign[u] != p) halos[p].insert(u);
  }
  stats.halo_counts.resize(k);
  for (std::uint32_t p = 0; p < k; ++p) stats.halo_counts[p] = halos[p].size();
  return stats;
}

PartitionedGraph build_partitions(const Graph& g, const PartitionAssignment& assignment,
                                  std::uint32_t num_parts) {
  if (assignment.assign.size() != g.num_nodes)
    throw std::invalid_argument("assignment does not cover all nodes");

  // Each edge follows its destination's core owner: unique edge assignment,
  // and every core vertex keeps its full in-neighborhood locally.
  std::vector<PartId> edge_assign(g.num_edges);
  for (NodeId v = 0; v < g.num_nodes; ++v)
    for (EdgeId e : g.in_edge_ids(v)) edge_assign[e] = assignment.assign[v];

  PartitionedGraph out;
  auto [rg, book] = relabel(g, assignment.assign, edge_assign, num_parts);
  out.relabeled = std::move(rg);
  out.book = std::move(book);

  const std::uint32_t k = out.book.num_parts;
  out.parts.resize(k);
  for (PartId p = 0; p < k; ++p) {
    LocalPartition& part = out.parts[p];
    part.part_id = p;
    const NodeId core_begin = out.book.node_range_starts[p];
    const NodeId core_end = out.book.node_range_starts[p + 1];
    part.num_core = core_end - core_begin;

    // Halo vertices: non-local sources of locally owned edges, ascending.
    std::unordered_set<NodeId> halo_set;
    for (NodeId gid = core_begin; gid < core_end; ++gid)
      for (NodeId src : out.relabeled.in_neighbors(gid))
        if (src < core_begin || src >= core_end) halo_set.insert(src);
    std::vector<NodeId> halos(halo_set.begin(), halo_set.end());
    std::sort(halos.begin(), halos.end());

    part.local_to_global.reserve(part.num_core + halos.size());
    for (NodeId gid = core_begin; gid < core_end; ++gid) part.local_to_global.push_back(gid);
    part.local_to_global.insert(part.local_to_global.end(), halos.begin(), halos.end());
    part.node_orig_ids.reserve(part.local_to_global.size());
    for (NodeId gid : part.local_to_global)
      part.node_orig_ids.push_back(out.book.node_perm_inv[gid]);
    part.build_halo_index();

    Graph& lg = part.local_graph;
    lg.num_nodes = part.local_to_global.size();
    lg.row_offsets.assign(lg.num_nodes + 1, 0);
    for (LocalId lv = 0; lv < part.num_core; ++lv)
      lg.row_offsets[lv + 1] = out.relabeled.in_degree(core_begin + lv);
    for (LocalId lv = 0; lv < lg.num_nodes; ++lv) lg.row_offsets[lv + 1] += lg.row_offsets[lv];
    lg.num_edges = lg.row_offsets.back();
    lg.col_indices.resize(lg.num_edges);
    lg.edge_ids.resize(lg.num_edges);
    part.edge_local_to_global.resize(lg.num_edges);
    part.edge_orig_ids.resize(lg.num_edges);

    std::uint64_t cursor = 0;
    for (LocalId lv = 0; lv < part.num_core; ++lv) {
      NodeId gid = core_begin + lv;
      auto srcs = out.relabeled.in_neighbors(gid);
      auto eids = out.relabeled.in_edge_ids(gid);
      for (std::size_t i = 0; i < srcs.size(); ++i, ++cursor) {
        lg.col_indices[cursor] = *part.local_of_global(srcs[i]);
        lg.edge_ids[cursor] = cursor;  // local edge ids in storage order
        part.edge_local_to_global[cursor] = eids[i];
        part.edge_orig_ids[cursor] = out.book.edge_perm_inv[eids[i]];
      }
    }
  }
  return out;
}

}  // namespace minisage
