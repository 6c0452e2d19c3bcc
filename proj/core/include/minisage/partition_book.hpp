/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/partition_book.hpp
 * @brief Contiguous-range ID directory and the relabeling that produces it.
 *
 * After relabeling, the vertices (and edges) of partition p occupy
 * [range_starts[p], range_starts[p+1]), so ownership is a binary search over a
 * (num_parts+1)-entry array and the local ID is a subtraction. The perm arrays
 * keep the mapping back to the original input IDs, which stay the stable
 * identity for data loading and for layout-independent RNG derivation.
 */
#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "minisage/graph.hpp"
#include "minisage/ids.hpp"

namespace minisage {

struct PartitionBook {
  std::uint32_t num_parts = 0;
  std::vector<NodeId> node_range_starts;  // size num_parts + 1
  std::vector<EdgeId> edge_range_starts;  // size num_parts + 1
  std::vector<NodeId> node_perm;          // original id -> relabeled id
  std::vector<NodeId> node_perm_inv;      // relabeled id -> original id
  std::vector<EdgeId> edge_perm;
  std::vector<EdgeId> edge_perm_inv;

  std::uint64_t num_nodes() const { return node_range_starts.back(); }
  std::uint64_t num_edges() const { return edge_range_starts.back(); }

  /// Partition owning a relabeled global node id (binary range lookup).
  PartId node_owner(NodeId gid) const;
  PartId edge_owner(EdgeId gid) const;

  /// (partition, local id) of a core vertex: local = gid - range_start.
  std::pair<PartId, LocalId> node_local(NodeId gid) const;
  std::pair<PartId, LocalId> edge_local(EdgeId gid) const;

  NodeId node_start(PartId p) const { return node_range_starts[p]; }
  std::uint64_t part_num_nodes(PartId p) const {
    return node_range_starts[p + 1] - node_range_starts[p];
  }
  std::uint64_t part_num_edges(PartId p) const {
    return edge_range_starts[p + 1] - edge_range_starts[p];
  }

  void save(const std::string& path) const;
  static PartitionBook load(const std::string& path);
};

/// Reorders nodes and edges so each partition's IDs are contiguous. Stable:
/// within a partition the original relative order is preserved. The returned
/// graph is the same graph under the new IDs; row entries keep their original
/// relative order. num_parts 0 means derive from the assignment (empty
/// trailing partitions would be lost in that case).
std::pair<Graph, PartitionBook> relabel(const Graph& g, std::span<const PartId> assign,
                                        std::span<const PartId> edge_assign,
                                        std::uint32_t num_parts = 0);

}  // namespace minisage
