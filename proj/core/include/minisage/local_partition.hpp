/**
 *  Copyright (c) 2026 by Contributors
 * @file minisage/local_partition.hpp
 * @brief Per-machine subgraph: core vertices, their full in-neighborhoods, and
 *        halo vertices.
 *
 * Core vertices occupy local IDs [0, num_core) and their global IDs are the
 * partition's contiguous range. Halo vertices are sources of locally owned
 * edges whose owner is another partition; they carry structure only, never
 * feature rows.
 */
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "minisage/graph.hpp"
#include "minisage/ids.hpp"

namespace minisage {

struct LocalPartition {
  PartId part_id = 0;
  Graph local_graph;  // rows over local ids; halo rows are empty
  std::uint64_t num_core = 0;
  std::vector<NodeId> local_to_global;  // local node -> relabeled global
  std::vector<NodeId> node_orig_ids;    // local node -> original input id
  std::vector<EdgeId> edge_local_to_global;
  std::vector<EdgeId> edge_orig_ids;

  bool is_halo(LocalId v) const { return v >= num_core; }
  std::uint64_t num_halo() const { return local_to_global.size() - num_core; }

  NodeId global_of(LocalId v) const { return local_to_global[v]; }

  /// Local id of a relabeled global id, if present in this partition
  /// (core range subtraction, halo hash lookup).
  std::optional<LocalId> local_of_global(NodeId gid) const;

  /// Rebuilds the halo lookup index; called by constructors and load().
  void build_halo_index();

  void save(const std::string& path) const;
  static LocalPartition load(const std::string& path);

 private:
  NodeId core_start_ = 0;
  std::unordered_map<NodeId, LocalId> halo_index_;
};

}  // namespace minisage
