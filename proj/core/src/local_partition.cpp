/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/local_partition.cpp
 */
#include "minisage/local_partition.hpp"

#include <stdexcept>

#include "minisage/binfile.hpp"

namespace minisage {

void LocalPartition::build_halo_index() {
  core_start_ = num_core > 0 ? local_to_global[0] : 0;
  halo_index_.clear();
  halo_index_.reserve(num_halo());
  for (LocalId v = num_core; v < local_to_global.size(); ++v)
    halo_index_.emplace(local_to_global[v], v);
}

std::optional<LocalId> LocalPartition::local_of_global(NodeId gid) const {
  if (gid >= core_start_ && gid < core_start_ + num_core) return gid - core_start_;
  auto it = halo_index_.find(gid);
  if (it == halo_index_.end()) return std::nullopt;
  return it->second;
}

void LocalPartition::save(const std::string& path) const {
  BinFileWriter w(path, "MDG1");
  w.put_u32(kGraphFileVersion);
  w.put_u32(kMdgKindPartition);
  w.put_u32(part_id);
  w.put_u64(num_core);
  w.put_u64(local_graph.num_nodes);
  w.put_u64(local_graph.num_edges);
  w.put_array(local_graph.row_offsets);
  w.put_array(local_graph.col_indices);
  w.put_array(local_graph.edge_ids);
  w.put_array(local_to_global);
  w.put_array(node_orig_ids);
  w.put_array(edge_local_to_global);
  w.put_array(edge_orig_ids);
}

LocalPartition LocalPartition::load(const std::string& path) {
  BinFileReader r(path, "MDG1");
  if (r.get_u32() != kGraphFileVersion) throw std::runtime_error("unsupported version: " + path);
  if (r.get_u32() != kMdgKindPartition)
    throw std::runtime_error("not a partition file: " + path);
  LocalPartition p;
  p.part_id = r.get_u32();
  p.num_core = r.get_u64();
  p.local_graph.num_nodes = r.get_u64();
  p.local_graph.num_edges = r.get_u64();
  p.local_graph.row_offsets = r.get_array<std::uint64_t>();
  p.local_graph.col_indices = r.get_array<NodeId>();
  p.local_graph.edge_ids = r.get_array<EdgeId>();
  p.local_to_global = r.get_array<NodeId>();
  p.node_orig_ids = r.get_array<NodeId>();
  p.edge_local_to_global = r.get_array<EdgeId>();
  p.edge_orig_ids = r.get_array<EdgeId>();
  p.build_halo_index();
  return p;
}

}  // namespace minisage
