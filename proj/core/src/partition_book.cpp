/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/partition_book.cpp
 */
#include "minisage/partition_book.hpp"

#include <algorithm>
#include <stdexcept>

#include "minisage/binfile.hpp"

namespace minisage {

namespace {

PartId range_lookup(const std::vector<std::uint64_t>& starts, std::uint64_t gid,
                    const char* what) {
  if (gid >= starts.back()) throw std::invalid_argument(std::string(what) + " id out of range");
  auto it = std::upper_bound(starts.begin(), starts.end(), gid);
  return static_cast<PartId>(std::distance(starts.begin(), it) - 1);
}

// Stable grouping: ids of partition 0 first, original order kept within a
// partition. Returns (perm, perm_inv, range_starts).
struct Grouping {
  std::vector<std::uint64_t> perm, perm_inv, range_starts;
};

Grouping group_by_partition(std::span<const PartId> assign, std::uint32_t num_parts) {
  Grouping out;
  out.range_starts.assign(num_parts + 1, 0);
  for (PartId p : assign) {
    if (p >= num_parts) throw std::invalid_argument("assignment entry out of range");
    ++out.range_starts[p + 1];
  }
  for (std::uint32_t p = 0; p < num_parts; ++p) out.range_starts[p + 1] += out.range_starts[p];

  out.perm.resize(assign.size());
  out.perm_inv.resize(assign.size());
  std::vector<std::uint64_t> cursor(out.range_starts.begin(), out.range_starts.end() - 1);
  for (std::uint64_t i = 0; i < assign.size(); ++i) {
    std::uint64_t g = cursor[assign[i]]++;
    out.perm[i] = g;
    out.perm_inv[g] = i;
  }
  return out;
}

}  // namespace

PartId PartitionBook::node_owner(NodeId gid) const {
  return range_lookup(node_range_starts, gid, "node");
}

PartId PartitionBook::edge_owner(EdgeId gid) const {
  return range_lookup(edge_range_starts, gid, "edge");
}

std::pair<PartId, LocalId> PartitionBook::node_local(NodeId gid) const {
  PartId p = node_owner(gid);
  return {p, gid - node_range_starts[p]};
}

std::pair<PartId, LocalId> PartitionBook::edge_local(EdgeId gid) const {
  PartId p = edge_owner(gid);
  return {p, gid - edge_range_starts[p]};
}

std::pair<Graph, PartitionBook> relabel(const Graph& g, std::span<const PartId> assign,
                                        std::span<const PartId> edge_assign,
                                        std::uint32_t num_parts) {
  if (assign.size() != g.num_nodes || edge_assign.size() != g.num_edges)
    throw std::invalid_argument("assignment size mismatch");
  for (PartId p : assign) num_parts = std::max(num_parts, p + 1);
  for (PartId p : edge_assign) num_parts = std::max(num_parts, p + 1);
  num_parts = std::max(num_parts, 1u);

  Grouping nodes = group_by_partition(assign, num_parts);
  Grouping edges = group_by_partition(edge_assign, num_parts);

  PartitionBook book;
  book.num_parts = num_parts;
  book.node_range_starts = std::move(nodes.range_starts);
  book.edge_range_starts = std::move(edges.range_starts);
  book.node_perm = std::move(nodes.perm);
  book.node_perm_inv = std::move(nodes.perm_inv);
  book.edge_perm = std::move(edges.perm);
  book.edge_perm_inv = std::move(edges.perm_inv);

  // Rebuild the CSR under the new ids. Row entries keep the original relative
  // order, so per-row edge order stays the input order in every labeling.
  Graph out;
  out.num_nodes = g.num_nodes;
  out.num_edges = g.num_edges;
  out.row_offsets.assign(g.num_nodes + 1, 0);
  out.col_indices.resize(g.num_edges);
  out.edge_ids.resize(g.num_edges);

  for (NodeId new_v = 0; new_v < g.num_nodes; ++new_v) {
    NodeId old_v = book.node_perm_inv[new_v];
    out.row_offsets[new_v + 1] = out.row_offsets[new_v] + g.in_degree(old_v);
    std::uint64_t cursor = out.row_offsets[new_v];
    auto srcs = g.in_neighbors(old_v);
    auto eids = g.in_edge_ids(old_v);
    for (std::size_t i = 0; i < srcs.size(); ++i, ++cursor) {
      out.col_indices[cursor] = book.node_perm[srcs[i]];
      out.edge_ids[cursor] = book.edge_perm[eids[i]];
    }
  }
  return {std::move(out), std::move(book)};
}

void PartitionBook::save(const std::string& path) const {
  BinFileWriter w(path, "MDG1");
  w.put_u32(kGraphFileVersion);
  w.put_u32(kMdgKindBook);
  w.put_u32(num_parts);
  w.put_array(node_range_starts);
  w.put_array(edge_range_starts);
  w.put_array(node_perm);
  w.put_array(node_perm_inv);
  w.put_array(edge_perm);
  w.put_array(edge_perm_inv);
}

PartitionBook PartitionBook::load(const std::string& path) {
  BinFileReader r(path, "MDG1");
  if (r.get_u32() != kGraphFileVersion) throw std::runtime_error("unsupported version: " + path);
  if (r.get_u32() != kMdgKindBook) throw std::runtime_error("not a book file: " + path);
  PartitionBook b;
  b.num_parts = r.get_u32();
  b.node_range_starts = r.get_array<NodeId>();
  b.edge_range_starts = r.get_array<EdgeId>();
  b.node_perm = r.get_array<NodeId>();
  b.node_perm_inv = r.get_array<NodeId>();
  b.edge_perm = r.get_array<EdgeId>();
  b.edge_perm_inv = r.get_array<EdgeId>();
  return b;
}

}  // namespace minisage
