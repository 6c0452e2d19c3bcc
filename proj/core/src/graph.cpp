/**
 *  Copyright (c) 2026 by Contributors
 * @file core/src/graph.cpp
 */
#include "minisage/graph.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace minisage {

void Graph::validate() const {
  if (row_offsets.size() != num_nodes + 1)
    throw std::invalid_argument("row_offsets size mismatch");
  if (row_offsets.front() != 0 || row_offsets.back() != num_edges)
    throw std::invalid_argument("row_offsets endpoints invalid");
  for (std::size_t i = 0; i + 1 < row_offsets.size(); ++i)
    if (row_offsets[i] > row_offsets[i + 1])
      throw std::invalid_argument("row_offsets not non-decreasing");
  if (col_indices.size() != num_edges || edge_ids.size() != num_edges)
    throw std::invalid_argument("edge array size mismatch");
  for (NodeId u : col_indices)
    if (u >= num_nodes) throw std::invalid_argument("col_indices entry out of range");
  std::vector<bool> seen(num_edges, false);
  for (EdgeId e : edge_ids) {
    if (e >= num_edges) throw std::invalid_argument("edge id out of range");
    if (seen[e]) throw std::invalid_argument("duplicate edge id");
    seen[e] = true;
  }
}

Graph build_csr(std::span<const std::pair<NodeId, NodeId>> edges, std::uint64_t num_nodes) {
  Graph g;
  g.num_nodes = num_nodes;
  g.num_edges = edges.size();
  g.row_offsets.assign(num_nodes + 1, 0);

  for (const auto& [src, dst] : edges) {
    if (src >= num_nodes || dst >= num_nodes)
      throw std::invalid_argument("edge endpoint out of range");
    ++g.row_offsets[dst + 1];
  }
  for (std::size_t v = 0; v < num_nodes; ++v) g.row_offsets[v + 1] += g.row_offsets[v];

  g.col_indices.resize(g.num_edges);
  g.edge_ids.resize(g.num_edges);
  std::vector<std::uint64_t> cursor(g.row_offsets.begin(), g.row_offsets.end() - 1);
  // Input order within each row; edge id = input position.
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto& [src, dst] = edges[e];
    std::uint64_t p = cursor[dst]++;
    g.col_indices[p] = src;
    g.edge_ids[p] = e;
  }
  return g;
}

std::vector<std::pair<NodeId, NodeId>> read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open edge list: " + path);
  std::vector<std::pair<NodeId, NodeId>> edges;
  NodeId src, dst;
  while (in >> src >> dst) edges.emplace_back(src, dst);
  if (!in.eof()) throw std::invalid_argument("malformed edge list: " + path);
  return edges;
}

Graph build_csr_from_file(const std::string& path, std::uint64_t num_nodes) {
  auto edges = read_edge_list(path);
  if (num_nodes == 0) {
    for (const auto& [src, dst] : edges) num_nodes = std::max({num_nodes, src + 1, dst + 1});
  }
  return build_csr(edges, num_nodes);
}

}  // namespace minisage
