/**
 *  Copyright (c) 2026 by Contributors
 * @file tests/test_graph_core.cpp
 */
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "minisage/graph.hpp"
#include "minisage/local_partition.hpp"
#include "minisage/partition_book.hpp"
#include "minisage/partitioner.hpp"
#include "minisage/rng.hpp"

using namespace minisage;

TEST_CASE("build_csr stores a 3-cycle keyed by destination") {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {1, 2}, {2, 0}};
  Graph g = build_csr(edges, 3);
  CHECK(g.row_offsets == std::vector<std::uint64_t>{0, 1, 2, 3});
  CHECK(g.col_indices == std::vector<NodeId>{2, 0, 1});
  CHECK(g.edge_ids == std::vector<EdgeId>{2, 0, 1});
  g.validate();
}

TEST_CASE("build_csr handles an empty graph") {
  Graph g = build_csr({}, 4);
  CHECK(g.num_edges == 0);
  CHECK(g.row_offsets == std::vector<std::uint64_t>{0, 0, 0, 0, 0});
}

TEST_CASE("build_csr preserves duplicate edges") {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {0, 1}};
  Graph g = build_csr(edges, 2);
  CHECK(g.num_edges == 2);
  CHECK(g.in_degree(1) == 2);
  CHECK(g.in_neighbors(1)[0] == 0);
  CHECK(g.in_neighbors(1)[1] == 0);
}

TEST_CASE("build_csr rejects out-of-range endpoints") {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 3}};
  CHECK_THROWS_AS(build_csr(edges, 3), std::invalid_argument);
}

TEST_CASE("relabel groups stably by partition") {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {1, 2}, {2, 0}};
  Graph g = build_csr(edges, 3);
  std::vector<PartId> assign{1, 0, 1};
  std::vector<PartId> edge_assign{0, 0, 0};
  auto [rg, book] = relabel(g, assign, edge_assign);
  CHECK(book.node_perm[1] == 0);
  CHECK(book.node_perm[0] == 1);
  CHECK(book.node_perm[2] == 2);
  CHECK(book.node_range_starts == std::vector<NodeId>{0, 1, 3});
}

TEST_CASE("relabel with a single partition is the identity") {
  std::vector<std::pair<NodeId, NodeId>> edges{{0, 1}, {1, 2}};
  Graph g = build_csr(edges, 3);
  std::vector<PartId> assign(3, 0), edge_assign(2, 0);
  auto [rg, book] = relabel(g, assign, edge_assign);
  for (NodeId v = 0; v < 3; ++v) CHECK(book.node_perm[v] == v);
  CHECK(book.node_range_starts == std::vector<NodeId>{0, 3});
  CHECK(rg.col_indices == g.col_indices);
}

TEST_CASE("relabel keeps already-grouped nodes in place") {
  Graph g = build_csr({}, 6);
  std::vector<PartId> assign{0, 0, 1, 1, 2, 2};
  auto [rg, book] = relabel(g, assign, {});
  CHECK(book.node_range_starts == std::vector<NodeId>{0, 2, 4, 6});
}

TEST_CASE("global_to_partition binary search") {
  PartitionBook book;
  book.num_parts = 3;
  book.node_range_starts = {0, 2, 4, 6};
  book.edge_range_starts = {0, 0, 0, 0};
  CHECK(book.node_owner(3) == 1);
  CHECK(book.node_owner(0) == 0);
  CHECK(book.node_owner(5) == 2);
  CHECK_THROWS_AS(book.node_owner(6), std::invalid_argument);

  CHECK(book.node_local(3) == std::pair<PartId, LocalId>{1, 1});
  CHECK(book.node_local(4) == std::pair<PartId, LocalId>{2, 0});

  PartitionBook single;
  single.num_parts = 1;
  single.node_range_starts = {0, 5};
  single.edge_range_starts = {0, 0};
  CHECK(single.node_local(4) == std::pair<PartId, LocalId>{0, 4});
}

TEST_CASE("global_to_partition agrees with a linear scan on random books") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    std::uint32_t parts = 1 + rng() % 9;
    std::vector<NodeId> starts{0};
    for (std::uint32_t p = 0; p < parts; ++p) starts.push_back(starts.back() + rng() % 20);
    if (starts.back() == 0) continue;
    PartitionBook book;
    book.num_parts = parts;
    book.node_range_starts = starts;
    book.edge_range_starts.assign(parts + 1, 0);
    for (NodeId g = 0; g < starts.back(); ++g) {
      PartId scan = 0;
      while (scan + 1 < parts && starts[scan + 1] <= g) ++scan;
      CHECK(book.node_owner(g) == scan);
    }
  }
}

TEST_CASE("relabel preserves isomorphism and round trip on random graphs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    std::uint64_t n = 2 + rng() % 40;
    std::uint64_t m = rng() % 120;
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::uint64_t e = 0; e < m; ++e) edges.emplace_back(rng() % n, rng() % n);
    Graph g = build_csr(edges, n);
    std::uint32_t k = 1 + rng() % 4;
    std::vector<PartId> assign(n), edge_assign(m);
    for (auto& a : assign) a = rng() % k;
    for (auto& a : edge_assign) a = rng() % k;
    auto [rg, book] = relabel(g, assign, edge_assign);
    rg.validate();

    // Round trip.
    for (NodeId v = 0; v < n; ++v) CHECK(book.node_perm_inv[book.node_perm[v]] == v);
    for (EdgeId e = 0; e < m; ++e) CHECK(book.edge_perm_inv[book.edge_perm[e]] == e);
    for (NodeId gid = 0; gid < n; ++gid) {
      auto [p, local] = book.node_local(gid);
      CHECK(book.node_range_starts[p] + local == gid);
    }

    // Exactly one image per edge, degree-preserving.
    std::multiset<std::pair<NodeId, NodeId>> before, after;
    for (auto [s, d] : edges) before.insert({book.node_perm[s], book.node_perm[d]});
    for (NodeId v = 0; v < n; ++v)
      for (NodeId u : rg.in_neighbors(v)) after.insert({u, v});
    CHECK(before == after);
  }
}

TEST_CASE("edge list ingestion") {
  auto dir = std::filesystem::temp_directory_path() / "minisage_graph_test";
  std::filesystem::create_directories(dir);
  auto path = (dir / "edges.txt").string();
  {
    std::ofstream out(path);
    out << "0 1\n1 2\n 2 0 \n";
  }
  Graph g = build_csr_from_file(path);
  CHECK(g.num_nodes == 3);
  CHECK(g.num_edges == 3);
  std::filesystem::remove_all(dir);
}

TEST_CASE("partition book and local partition binary round trip") {
  std::mt19937_64 rng(3);
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (int e = 0; e < 60; ++e) edges.emplace_back(rng() % 12, rng() % 12);
  Graph g = build_csr(edges, 12);
  PartitionAssignment assign;
  assign.assign.resize(12);
  for (auto& a : assign.assign) a = rng() % 3;
  PartitionedGraph pg = build_partitions(g, assign, 3);

  auto dir = std::filesystem::temp_directory_path() / "minisage_book_test";
  std::filesystem::create_directories(dir);
  pg.book.save((dir / "book.bin").string());
  PartitionBook loaded = PartitionBook::load((dir / "book.bin").string());
  CHECK(loaded.node_range_starts == pg.book.node_range_starts);
  CHECK(loaded.edge_range_starts == pg.book.edge_range_starts);
  CHECK(loaded.node_perm == pg.book.node_perm);
  CHECK(loaded.edge_perm_inv == pg.book.edge_perm_inv);

  pg.parts[1].save((dir / "part.bin").string());
  LocalPartition lp = LocalPartition::load((dir / "part.bin").string());
  CHECK(lp.part_id == 1);
  CHECK(lp.num_core == pg.parts[1].num_core);
  CHECK(lp.local_to_global == pg.parts[1].local_to_global);
  CHECK(lp.node_orig_ids == pg.parts[1].node_orig_ids);
  CHECK(lp.local_graph.col_indices == pg.parts[1].local_graph.col_indices);
  CHECK(lp.local_of_global(lp.local_to_global[0]) == LocalId{0});
  std::filesystem::remove_all(dir);
}
