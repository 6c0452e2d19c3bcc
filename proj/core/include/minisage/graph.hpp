/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/graph.hpp
 * @brief Immutable CSR graph keyed by destination vertex.
 *
 * Row v lists the sources u of edges u->v, i.e. the in-neighborhood of v.
 * Sampling gathers messages into target vertices, so in-neighborhoods are the
 * unit of locality throughout the system. Within a row, entries keep the
 * relative order the edges were given in, which later relabeling and
 * partitioning steps preserve; the sampler relies on this stable order.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "minisage/ids.hpp"

namespace minisage {

struct Graph {
  std::uint64_t num_nodes = 0;
  std::uint64_t num_edges = 0;
  std::vector<std::uint64_t> row_offsets;  // size num_nodes + 1
  std::vector<NodeId> col_indices;         // size num_edges; sources, per dst row
  std::vector<EdgeId> edge_ids;            // size num_edges; distinct

  std::uint64_t in_degree(NodeId v) const { return row_offsets[v + 1] - row_offsets[v]; }

  std::span<const NodeId> in_neighbors(NodeId v) const {
    return {col_indices.data() + row_offsets[v], in_degree(v)};
  }

  std::span<const EdgeId> in_edge_ids(NodeId v) const {
    return {edge_ids.data() + row_offsets[v], in_degree(v)};
  }

  /// Checks CSR invariants; throws std::invalid_argument on violation.
  void validate() const;
};

/// Builds a CSR keyed by destination. Edge IDs are assigned 0..num_edges-1 in
/// input order; duplicates and self-loops are preserved as given.
Graph build_csr(std::span<const std::pair<NodeId, NodeId>> edges, std::uint64_t num_nodes);

/// Reads a whitespace-separated `src dst` edge list with zero-based integer
/// IDs, one pair per line. num_nodes 0 means infer max endpoint + 1.
std::vector<std::pair<NodeId, NodeId>> read_edge_list(const std::string& path);

Graph build_csr_from_file(const std::string& path, std::uint64_t num_nodes = 0);

}  // namespace minisage
