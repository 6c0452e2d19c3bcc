/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/partitioner.hpp
 * @brief Multilevel min-cut partitioning with multi-constraint balancing and
 *        core/halo partition construction.
 *
 * The pipeline coarsens by heavy-edge matching (with degree-capped edge
 * retention so coarse graphs do not densify), computes an initial k-way
 * assignment by greedy graph growing on the coarsest graph, then projects the
 * assignment back level by level with boundary refinement. Partitioning
 * operates on the undirected support of the directed input graph; reciprocal
 * and parallel edges sum into the support edge weight, so the weighted support
 * cut at the finest level equals the directed edge cut being reported.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "minisage/graph.hpp"
#include "minisage/ids.hpp"
#include "minisage/local_partition.hpp"
#include "minisage/partition_book.hpp"

namespace minisage {

struct BalanceConstraints {
  std::uint32_t num_parts = 1;
  double tolerance = 0.05;  // per-constraint epsilon
  std::uint32_t label_dim = 1;
  std::vector<double> node_labels;  // [num_nodes x label_dim]; empty means unit labels

  static BalanceConstraints unit(std::uint32_t k, std::uint64_t num_nodes, double eps = 0.05);

  std::span<const double> labels_of(NodeId v) const {
    return {node_labels.data() + v * label_dim, label_dim};
  }
};

struct PartitionAssignment {
  std::vector<PartId> assign;
  std::uint64_t edge_cut = 0;      // directed input edges whose endpoints differ
  std::vector<double> imbalance;   // per constraint: max_p part_sum * k / total
};

// Undirected weighted graph used inside the multilevel pipeline. Symmetric:
// every edge appears in both endpoint rows with the same weight.
struct SupportGraph {
  std::uint64_t num_nodes = 0;
  std::vector<std::uint64_t> adj_offsets;
  std::vector<NodeId> adj;
  std::vector<std::uint64_t> adj_weights;
  std::vector<double> node_weights;  // [num_nodes x weight_dim]
  std::uint32_t weight_dim = 1;

  std::uint64_t degree(NodeId v) const { return adj_offsets[v + 1] - adj_offsets[v]; }
  std::span<const NodeId> neighbors(NodeId v) const {
    return {adj.data() + adj_offsets[v], degree(v)};
  }
  std::span<const std::uint64_t> weights(NodeId v) const {
    return {adj_weights.data() + adj_offsets[v], degree(v)};
  }
  std::span<const double> node_weight(NodeId v) const {
    return {node_weights.data() + v * weight_dim, weight_dim};
  }
  std::uint64_t num_undirected_edges() const { return adj.size() / 2; }
};

struct CoarseLevel {
  SupportGraph graph;
  std::vector<std::uint64_t> coarse_map;  // finer level's node -> this level's node
  std::uint32_t level = 0;
  bool terminal = false;  // no further useful coarsening
};

struct PartitionOptions {
  std::uint32_t initial_trials = 1;    // greedy-growing restarts on the coarsest graph
  std::uint32_t refine_iters = 1;      // refinement passes per level
  std::uint64_t coarsen_cap = 200;     // initial partitioning accepts <= cap * k nodes
  std::uint64_t coarsen_target = 4;    // keep coarsening down to ~target * k nodes
};

struct PartitionStats {
  std::uint64_t edge_cut = 0;
  std::vector<double> imbalance;
  std::vector<std::uint64_t> halo_counts;
};

struct PartitionedGraph {
  PartitionBook book;
  Graph relabeled;
  std::vector<LocalPartition> parts;
};

/// Builds the level-0 undirected support of a directed graph. Self-loops are
/// dropped; multiplicities sum into the pair weight. Node weight vectors come
/// from the constraints (unit weights if none given).
CoarseLevel build_support_level(const Graph& g, const BalanceConstraints& constraints);

/// One coarsening step: seeded heavy-edge matching, then degree-capped edge
/// retention (each coarse vertex keeps at most ceil(mean constituent degree)
/// incident edges, highest weights first; an edge survives if either endpoint
/// retains it). Matches that would push a node weight past eps * total / k in
/// any dimension are skipped, so the coarsest graph stays packable into
/// balanced bins.
CoarseLevel coarsen(const CoarseLevel& level, const BalanceConstraints& constraints,
                    std::uint64_t seed);

/// Greedy graph growing on the coarsest graph; best of `trials` seeded runs by
/// edge cut. Throws ConstraintInfeasible if a single node exceeds the balance
/// cap in some dimension.
PartitionAssignment initial_partition(const CoarseLevel& coarsest,
                                      const BalanceConstraints& constraints,
                                      std::uint32_t trials, std::uint64_t seed);

/// Boundary-only greedy refinement. Moves are cut-improving, or cut-neutral
/// when they strictly improve balance; the cut never increases.
PartitionAssignment refine(const CoarseLevel& level, const PartitionAssignment& assign,
                           const BalanceConstraints& constraints, std::uint32_t iters);

/// Multilevel driver. Deterministic given seed.
PartitionAssignment partition(const Graph& g, const BalanceConstraints& constraints,
                              std::uint64_t seed, const PartitionOptions& opts = {});

/// Uniform iid baseline.
PartitionAssignment random_partition(const Graph& g, std::uint32_t k, std::uint64_t seed);

/// Recomputes cut, per-constraint imbalance, and per-part halo counts from
/// scratch; the oracle for the counters carried on PartitionAssignment.
PartitionStats partition_stats(const PartitionAssignment& assignment, const Graph& g,
                               const BalanceConstraints& constraints);

/// Materializes core/halo partitions: edge u->v goes to the partition owning
/// v, so every core vertex's full in-neighborhood is local. Relabels so the
/// book is contiguous. num_parts 0 derives the count from the assignment.
PartitionedGraph build_partitions(const Graph& g, const PartitionAssignment& assignment,
                                  std::uint32_t num_parts = 0);

}  // namespace minisage
